"""Variable exponents sampled at cell centres."""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ExponentOutOfRange
from .grid import Grid


@dataclass(frozen=True)
class ExponentField:
    values: np.ndarray
    grid: Grid
    p_minus: float = field(init=False)
    p_plus: float = field(init=False)

    def __post_init__(self):
        self.values.setflags(write=False)
        object.__setattr__(self, "p_minus", float(self.values.min()))
        object.__setattr__(self, "p_plus", float(self.values.max()))


def embedding_threshold(dim):
    return 2.0 * dim / (dim + 2.0)


def build_exponent_field(values, grid):
    """Validate per-cell exponent values and wrap them.

    Values must lie in ``(1, inf)`` and their minimum must exceed
    ``2N/(N+2)`` for the grid dimension ``N``.
    """
    v = np.array(np.broadcast_to(np.asarray(values, dtype=float), grid.shape), dtype=float)
    if not np.all(np.isfinite(v)):
        raise ExponentOutOfRange("exponent values must be finite")
    if np.any(v <= 1.0):
        raise ExponentOutOfRange(f"exponent must be > 1 everywhere (min {v.min():g})")
    thr = embedding_threshold(grid.dim)
    if v.min() <= thr:
        raise ExponentOutOfRange(f"p_minus = {v.min():g} must exceed 2N/(N+2) = {thr:g}")
    return ExponentField(v, grid)


def conjugate_exponent(p):
    return build_exponent_field(p.values / (p.values - 1.0), p.grid)


def sobolev_critical(p, dim):
    """``N p / (N - p)`` where ``p < N``, ``+inf`` elsewhere."""
    v = p.values
    out = np.full(v.shape, np.inf)
    sub = v < dim
    out[sub] = dim * v[sub] / (dim - v[sub])
    return out


def log_holder_estimate(p, grid=None):
    """Largest ``|p(x)-p(y)| log(e + 1/|x-y|)`` over distinct cell pairs.

    Diagnostic only: a finite grid can neither confirm nor refute
    log-Hölder continuity.
    """
    grid = p.grid if grid is None else grid
    if grid.size < 2:
        raise ValueError("need at least two cells")
    X, Y = grid.centers()
    return _kernels.log_holder(p.values, X, Y)
