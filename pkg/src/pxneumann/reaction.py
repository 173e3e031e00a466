"""Logistic reaction ``f(x,s) = alpha s^q1 (r - kappa s^q2)`` and derived objects.

``kappa`` is the logistic weight (renamed to keep ``p`` for exponents).
"""
from dataclasses import dataclass

import numpy as np

from .errors import BoxViolation, DomainError, HypothesisViolation

GAMMA_SAMPLES = 10_000
GAMMA_SAFETY = 1.01
GAMMA_MIN = 1e-8
BOX_TOL = 1e-9


@dataclass(frozen=True)
class ReactionSource:
    alpha: float
    q1: np.ndarray
    q2: np.ndarray
    r: np.ndarray
    kappa: np.ndarray
    gamma: float
    lambda0: float

    @property
    def shape(self):
        return self.r.shape


def _field(x, shape, name):
    a = np.array(np.broadcast_to(np.asarray(x, dtype=float), shape), dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    a.setflags(write=False)
    return a


def _f(alpha, q1, q2, r, kappa, s):
    return alpha * s**q1 * (r - kappa * s**q2)


def build_reaction_source(grid, alpha=1.0, q1=1.0, q2=1.0, r=1.0, kappa=1.0, lambda0=None):
    """Assemble a source; ``gamma`` is estimated, ``lambda0`` defaults to ``2 gamma``.

    ``q1 >= 0`` is accepted (``q1 = 0`` gives sources such as ``1 - s``).
    """
    shape = grid.shape if hasattr(grid, "shape") else tuple(grid)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    q1 = _field(q1, shape, "q1")
    q2 = _field(q2, shape, "q2")
    r = _field(r, shape, "r")
    kappa = _field(kappa, shape, "kappa")
    if np.any(q1 < 0) or np.any(q2 < 0):
        raise ValueError("q1 and q2 must be non-negative")
    if np.any(r < 0) or np.any(kappa < 0):
        raise ValueError("r and kappa must be non-negative")
    gamma = _lipschitz(float(alpha), q1, q2, r, kappa)
    lam0 = 2.0 * gamma if lambda0 is None else float(lambda0)
    if not lam0 > gamma:
        raise ValueError(f"lambda0 = {lam0:g} must exceed gamma = {gamma:g}")
    return ReactionSource(float(alpha), q1, q2, r, kappa, gamma, lam0)


def _unique_params(q1, q2, r, kappa):
    rows = np.stack([q1.ravel(), q2.ravel(), r.ravel(), kappa.ravel()], axis=1)
    return np.unique(rows, axis=0)


def _lipschitz(alpha, q1, q2, r, kappa):
    s = np.linspace(0.0, 1.0, GAMMA_SAMPLES)
    ds = s[1] - s[0]
    best = 0.0
    for a, b, c, d in _unique_params(q1, q2, r, kappa):
        slopes = np.abs(np.diff(_f(alpha, a, b, c, d, s))) / ds
        best = max(best, float(slopes.max()))
    return max(GAMMA_SAFETY * best, GAMMA_MIN)


def lipschitz_constant(src):
    return _lipschitz(src.alpha, src.q1, src.q2, src.r, src.kappa)


def _at(src, cell):
    if isinstance(cell, (int, np.integer)):
        return tuple(float(x.reshape(-1)[cell]) for x in (src.q1, src.q2, src.r, src.kappa))
    cell = tuple(cell)
    return tuple(float(x[cell]) for x in (src.q1, src.q2, src.r, src.kappa))


def evaluate_f(src, cell, s):
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"f is defined on [0, 1], got s = {s}; use extend_fbar")
    return float(_f(src.alpha, *_at(src, cell), s))


def f_field(src, U):
    """``f(x, U(x))`` cellwise, for ``U`` in [0, 1]."""
    U = np.clip(np.asarray(U, dtype=float), 0.0, 1.0)
    return _f(src.alpha, src.q1, src.q2, src.r, src.kappa, U)


def extend_fbar(src, cell, s):
    q1, q2, r, k = _at(src, cell)
    if s < 0.0:
        return float(_f(src.alpha, q1, q2, r, k, 0.0) + src.gamma * s)
    if s > 1.0:
        return float(_f(src.alpha, q1, q2, r, k, 1.0) - src.gamma * (s - 1.0))
    return float(_f(src.alpha, q1, q2, r, k, s))


def primitive_F(src, cell, s):
    """``int_0^s fbar(x, t) dt`` in closed form."""
    q1, q2, r, k = _at(src, cell)
    a = src.alpha

    def F01(t):
        return a * (r * t ** (q1 + 1.0) / (q1 + 1.0) - k * t ** (q1 + q2 + 1.0) / (q1 + q2 + 1.0))

    if s < 0.0:
        return float(_f(a, q1, q2, r, k, 0.0) * s + 0.5 * src.gamma * s * s)
    if s > 1.0:
        return float(F01(1.0) + _f(a, q1, q2, r, k, 1.0) * (s - 1.0) - 0.5 * src.gamma * (s - 1.0) ** 2)
    return float(F01(s))


def shifted_source(src, U, lambda0=None):
    """``f(x, U) + lambda0 U``, which lies in ``[0, lambda0]`` for ``U`` in [0, 1]."""
    lam0 = src.lambda0 if lambda0 is None else lambda0
    U = np.asarray(U, dtype=float)
    lo, hi = float(U.min()), float(U.max())
    if lo < -BOX_TOL or hi > 1.0 + BOX_TOL:
        raise BoxViolation(f"U leaves [0,1]: range [{lo:.3e}, {hi:.3e}]")
    Uc = np.clip(U, 0.0, 1.0)
    return f_field(src, Uc) + lam0 * Uc


@dataclass
class AuditReport:
    results: dict
    passed: bool


def hypothesis_audit(src, samples=2001, raise_on_failure=True):
    s = np.linspace(0.0, 1.0, samples)
    f0 = _f(src.alpha, src.q1, src.q2, src.r, src.kappa, 0.0)
    f1 = _f(src.alpha, src.q1, src.q2, src.r, src.kappa, 1.0)
    sup0 = float(np.max(np.abs(f0)))
    res = {"H10": bool(np.all(f0 >= 0.0) and np.all(f1 <= 0.0)), "H11": True, "bound": True}
    for a, b, c, d in _unique_params(src.q1, src.q2, src.r, src.kappa):
        fs = _f(src.alpha, a, b, c, d, s)
        if not np.all(np.diff(fs + src.lambda0 * s) > 0.0):
            res["H11"] = False
        if np.any(np.abs(fs) > src.gamma + sup0 + 1e-12):
            res["bound"] = False
    rep = AuditReport(res, all(res.values()))
    if raise_on_failure:
        for name, ok in res.items():
            if not ok:
                raise HypothesisViolation(name, "reaction source fails this hypothesis")
    return rep
