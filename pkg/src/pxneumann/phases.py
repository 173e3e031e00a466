"""Multiple-phase flux ``a(x, xi) = sum_j w_j(x) |xi|^(p_j(x)-2) xi`` and its potential."""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, PropertyViolation
from .exponent import ExponentField, build_exponent_field


@dataclass(frozen=True)
class PhaseSpec:
    weights: tuple
    exponents: tuple
    omega: float
    p_max: ExponentField

    @property
    def grid(self):
        return self.p_max.grid

    @property
    def n_phases(self):
        return len(self.weights)

    def arrays(self):
        return [w for w in self.weights], [p.values for p in self.exponents]

    @cached_property
    def stacked(self):
        """``(W, P)`` as contiguous ``(n_phases, ny, nx)`` arrays, built once."""
        W, P = self.arrays()
        W, P = np.ascontiguousarray(np.stack(W)), np.ascontiguousarray(np.stack(P))
        W.setflags(write=False)
        P.setflags(write=False)
        return W, P


@dataclass(frozen=True)
class CoercivityConstants:
    delta: float
    delta_tilde: float


def build_phase_spec(phases, grid, omega=None):
    """``phases`` is a sequence of ``(weight, exponent)`` pairs.

    Weights are scalars or per-cell arrays; exponents are ExponentFields or
    raw values.  ``omega`` defaults to the smallest weight.
    """
    if len(phases) == 0:
        raise ValueError("at least one phase is required")
    weights, exps = [], []
    for w, p in phases:
        w = np.array(np.broadcast_to(np.asarray(w, dtype=float), grid.shape), dtype=float)
        if not np.all(np.isfinite(w)):
            raise ValueError("phase weights must be finite")
        w.setflags(write=False)
        weights.append(w)
        exps.append(p if isinstance(p, ExponentField) else build_exponent_field(p, grid))
    wmin = min(float(w.min()) for w in weights)
    omega = wmin if omega is None else float(omega)
    if not omega > 0:
        raise ValueError(f"phase weights must be bounded below by some omega > 0 (min weight {wmin:g})")
    if wmin < omega:
        raise ValueError(f"weight {wmin:g} is below omega = {omega:g}")
    pmax = build_exponent_field(np.max([p.values for p in exps], axis=0), grid)
    return PhaseSpec(tuple(weights), tuple(exps), omega, pmax)


def single_phase(grid, weight=1.0, exponent=2.0):
    return build_phase_spec([(weight, exponent)], grid)


def _params(spec, cell):
    if isinstance(cell, (int, np.integer)):
        w = np.array([x.reshape(-1)[cell] for x in spec.weights])
        p = np.array([x.values.reshape(-1)[cell] for x in spec.exponents])
    else:
        cell = tuple(cell)
        w = np.array([x[cell] for x in spec.weights])
        p = np.array([x.values[cell] for x in spec.exponents])
    return w, p


def psi(spec, cell, s):
    if not s > 0:
        raise DomainError(f"psi is defined for s > 0, got {s}")
    w, p = _params(spec, cell)
    return float(np.sum(w * s ** (p - 2.0)))


def phi(spec, cell, s):
    """``|a| = Phi(|xi|)``; continuous at 0 with ``Phi(0) = 0``."""
    s = abs(float(s))
    if s == 0.0:
        return 0.0
    w, p = _params(spec, cell)
    return float(np.sum(w * s ** (p - 1.0)))


def flux(spec, cell, xi):
    xi = np.asarray(xi, dtype=float)
    s = float(np.linalg.norm(xi))
    if s == 0.0:
        return np.zeros_like(xi)
    return psi(spec, cell, s) * xi


def potential(spec, cell, xi):
    w, p = _params(spec, cell)
    s = float(np.linalg.norm(np.atleast_1d(np.asarray(xi, dtype=float))))
    return float(np.sum(w * s**p / p))


def coercivity_constants(spec):
    return CoercivityConstants(spec.omega / spec.p_max.p_plus, 0.0)


def monotonicity_gap(spec, cell, xi1, xi2):
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    return float(np.dot(flux(spec, cell, xi1) - flux(spec, cell, xi2), xi1 - xi2))


def bregman_gap(spec, cell, xi1, xi2):
    """Both slacks of ``a(xi2).(xi2-xi1) >= A(xi2)-A(xi1) >= a(xi1).(xi2-xi1)``."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    dA = potential(spec, cell, xi2) - potential(spec, cell, xi1)
    step = xi2 - xi1
    lower = dA - float(np.dot(flux(spec, cell, xi1), step))
    upper = float(np.dot(flux(spec, cell, xi2), step)) - dA
    return lower, upper


@dataclass
class GrowthReport:
    a0: float
    b: float
    samples: int
    worst_ratio: float

    @property
    def passed(self):
        return self.worst_ratio <= 1.0 + 1e-12


def growth_bound_check(spec, samples=1000, rng=None, vmax=1e3):
    """Sample ``|a(x, v)| <= a0 + b |v|^(p(x)-1)`` over cells and magnitudes.

    ``a0 = b = l * max_j ||w_j||_inf``, from ``s^(p_j-1) <= 1 + s^(p-1)``.
    """
    rng = np.random.default_rng(rng)
    a0 = b = spec.n_phases * max(float(w.max()) for w in spec.weights)
    W = np.stack([w.ravel() for w in spec.weights])
    P = np.stack([p.values.ravel() for p in spec.exponents])
    pmax = spec.p_max.values.ravel()
    cells = rng.integers(0, pmax.size, samples)
    mags = rng.uniform(0.0, vmax, samples)
    mags[: min(3, samples)] = [0.0, 1.0, vmax][: min(3, samples)]
    amp = np.sum(W[:, cells] * mags ** (P[:, cells] - 1.0), axis=0)
    amp[mags == 0] = 0.0
    bound = a0 + b * mags ** (pmax[cells] - 1.0)
    worst = float(np.max(amp / bound))
    rep = GrowthReport(a0, b, samples, worst)
    if not rep.passed:
        raise PropertyViolation("growth", f"|a| / bound reached {worst}")
    return rep


def flux_potential_consistency(spec, cell, xi, h):
    """Max coordinate error of a central difference of ``A`` against ``a``."""
    xi = np.asarray(xi, dtype=float)
    a = flux(spec, cell, xi)
    err = 0.0
    for k in range(xi.size):
        e = np.zeros_like(xi)
        e[k] = h
        fd = (potential(spec, cell, xi + e) - potential(spec, cell, xi - e)) / (2.0 * h)
        err = max(err, abs(fd - a[k]))
    return err
