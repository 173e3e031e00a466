"""Discrete variable-exponent modulars and the Luxemburg norm."""
from dataclasses import dataclass, field

import numpy as np

from .errors import BisectionBracketFailure, PropertyViolation
from .exponent import conjugate_exponent
from .grid import cell_gradient_sq

MAX_BISECTION = 200
NORM_RTOL = 1e-12
# slack for the inequality corpus; the identities are exact up to round-off
INEQ_RTOL = 1e-9


@dataclass(frozen=True)
class ModularReport:
    modular_value: float
    luxemburg_norm: float
    bisection_iters: int


def modular(u, p):
    grid = p.grid
    u = grid.check(u)
    return float(np.sum(np.abs(u) ** p.values) * grid.cell_measure)


def luxemburg_norm(u, p):
    """Norm by bisection on the decreasing map ``a -> modular(u / a)``.

    The starting bracket comes from the norm/modular power bounds, so it is
    valid analytically; it is widened only to absorb round-off.
    """
    u = p.grid.check(u)
    rho = modular(u, p)
    if not np.isfinite(rho):
        raise BisectionBracketFailure(f"modular is not finite ({rho})")
    if rho == 0.0:
        return ModularReport(0.0, 0.0, 0)
    if rho >= 1.0:
        lo, hi = rho ** (1.0 / p.p_plus), rho ** (1.0 / p.p_minus)
    else:
        lo, hi = rho ** (1.0 / p.p_minus), rho ** (1.0 / p.p_plus)
    lo *= 1.0 - 1e-9
    hi *= 1.0 + 1e-9

    def excess(a):
        return modular(u / a, p) - 1.0

    for _ in range(64):
        if excess(lo) >= 0.0:
            break
        lo *= 0.5
    else:
        raise BisectionBracketFailure("cannot bracket from below")
    for _ in range(64):
        if excess(hi) <= 0.0:
            break
        hi *= 2.0
    else:
        raise BisectionBracketFailure("cannot bracket from above")

    it = 0
    while hi - lo > NORM_RTOL * lo and it < MAX_BISECTION:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        it += 1
    return ModularReport(rho, 0.5 * (lo + hi), it)


def sobolev_modular(u, p):
    """``modular(u) + modular(|grad u|)`` with the per-cell gradient magnitude."""
    u = p.grid.check(u)
    return modular(u, p) + modular(np.sqrt(cell_gradient_sq(u, p.grid)), p)


def positive_negative_split(u):
    u = np.asarray(u, dtype=float)
    return np.maximum(u, 0.0), np.maximum(-u, 0.0)


def holder_pairing(u, v, p):
    """Both sides of ``int |u v| <= 2 |u|_p |v|_p'``."""
    grid = p.grid
    lhs = float(np.sum(np.abs(grid.check(u) * grid.check(v, "v"))) * grid.cell_measure)
    rhs = 2.0 * luxemburg_norm(u, p).luxemburg_norm * luxemburg_norm(v, conjugate_exponent(p)).luxemburg_norm
    return lhs, rhs


@dataclass
class PropertyReport:
    results: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.results.values())

    def record(self, item, ok, detail=""):
        ok = bool(ok)
        self.results[item] = self.results.get(item, True) and ok
        if not ok and item not in self.details:
            self.details[item] = detail

    def failures(self):
        return [k for k, ok in self.results.items() if not ok]

    def raise_first(self):
        for item in self.failures():
            raise PropertyViolation(item, self.details.get(item, ""))


def _le(a, b):
    return a <= b + INEQ_RTOL * max(1.0, abs(a), abs(b))


def modular_property_suite(u, p, v=None, raise_on_failure=True):
    """Check the norm/modular inequality corpus for ``u`` (and partner ``v``).

    ``u`` is examined as given and rescaled onto both sides of the unit
    sphere.  ``v`` (default: ``u`` rolled by one cell) drives the
    subadditivity, monotonicity and Hölder items.
    """
    grid = p.grid
    u = grid.check(u)
    if not np.any(u):
        raise ValueError("the property suite needs u != 0")
    v = np.roll(u, 1) if v is None else grid.check(v, "v")
    pm, pp = p.p_minus, p.p_plus
    rep = PropertyReport()

    base = luxemburg_norm(u, p).luxemburg_norm
    for target in (None, 3.0, 1.0 / 3.0):
        w = u if target is None else u * (target / base)
        r = luxemburg_norm(w, p)
        n, rho = r.luxemburg_norm, r.modular_value
        tag = f"norm={n:.6g}"
        rho_unit = modular(w / n, p)
        rep.record("1", abs(rho_unit - 1.0) <= 1e-10, f"{tag}: modular(u/|u|) = {rho_unit!r}")
        if abs(n - 1.0) > 1e-8:
            rep.record("3", (n > 1.0) == (rho > 1.0), f"{tag}, modular {rho:.6g}")
            rep.record("4", (n < 1.0) == (rho < 1.0), f"{tag}, modular {rho:.6g}")
        if n > 1.0:
            rep.record("5", _le(n**pm, rho) and _le(rho, n**pp), tag)
            rep.record("22", _le(rho ** (1 / pp), n) and _le(n, rho ** (1 / pm)), tag)
        elif n < 1.0:
            rep.record("6", _le(n**pp, rho) and _le(rho, n**pm), tag)
            rep.record("23", _le(n, rho ** (1 / pp)) and _le(rho ** (1 / pm), n), tag)
        if n <= 1.0:
            rep.record("25", _le(rho, n), tag)
        if n >= 1.0:
            rep.record("25", _le(n, rho), tag)
        for lam in (1.0, 1.5, 7.0):
            rl = modular(lam * w, p)
            rep.record("20", _le(lam**pm * rho, rl) and _le(rl, lam**pp * rho), f"{tag}, lambda={lam}")
        for lam in (0.3, 0.8):
            rl = modular(lam * w, p)
            rep.record("21", _le(rl, lam**pm * rho) and _le(lam**pp * rho, rl), f"{tag}, lambda={lam}")

    unit = u / base
    r_unit = luxemburg_norm(unit, p)
    rep.record("2", abs(r_unit.luxemburg_norm - 1.0) <= 1e-10 and abs(r_unit.modular_value - 1.0) <= 1e-10,
               f"norm {r_unit.luxemburg_norm!r}, modular {r_unit.modular_value!r}")

    ru, rv = modular(u, p), modular(v, p)
    ruv = modular(u + v, p)
    rep.record("11", _le(ruv, 2.0 ** (pp - 1.0) * (ru + rv)), f"{ruv} vs {2.0 ** (pp - 1.0) * (ru + rv)}")

    small = np.minimum(np.abs(u), np.abs(v))
    rs = modular(small, p)
    ok14 = _le(rs, ru)
    if np.any(np.abs(u) != small):
        ok14 = ok14 and rs < ru
    rep.record("14", ok14, f"{rs} vs {ru}")

    lhs, rhs = holder_pairing(u, v, p)
    rep.record("holder", _le(lhs, rhs), f"{lhs} vs {rhs}")

    if raise_on_failure:
        rep.raise_first()
    return rep
