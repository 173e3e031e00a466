"""Discrete energy ``J(V) = A(V) + lam/2 |V|^2 + eps int |V|^p/p - int g V`` and its gradient.

Two gradient models are available:

``"cell"`` (default)
    ``A(x, grad V)`` is evaluated per cell on the isotropic magnitude from
    :func:`pxneumann.grid.cell_gradient_sq`.
``"face"``
    Each interior face carries half of each neighbour's ``A`` evaluated on
    the one-sided difference.  The energy is then a sum of convex functions
    of single differences, which gives an exact discrete comparison principle.

Both reduce to the 5-point Neumann Laplacian when ``p = 2`` with unit weight,
and in both the flux term of the gradient is ``-div F`` for a face flux ``F``,
so the Green identity of :mod:`pxneumann.grid` carries the Neumann condition.
"""
import numpy as np

from . import _kernels
from .grid import VectorField, cell_gradient_sq, gradient

MODELS = ("cell", "face")


def _prep(V, g, spec, p, lam, model):
    if model not in MODELS:
        raise ValueError(f"unknown gradient model {model!r}")
    grid = spec.grid
    V = grid.check(V, "V")
    g = np.broadcast_to(np.asarray(g, dtype=float), grid.shape)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), grid.shape)
    W, P = spec.stacked
    pe = spec.p_max.values if p is None else p.values
    return grid, V, g, lam, pe, W, P


def energy_and_gradient(V, g, spec, p=None, lam=1.0, eps=0.0, model="cell", use_numba=None):
    """Energy and its exact gradient (each scaled by the cell measure).

    ``lam`` may be a scalar or a per-cell array (a zeroth-order coefficient).
    ``p`` is the exponent of the perturbation term; defaults to ``spec.p_max``.
    """
    grid, V, g, lam, pe, W, P = _prep(V, g, spec, p, lam, model)
    E, G = _kernels.energy_grad(model, V, g, lam, eps, pe, W, P, grid.hx, grid.hy, use_numba)
    m = grid.cell_measure
    return E * m, G * m


def energy(V, g, spec, p=None, lam=1.0, eps=0.0, model="cell"):
    return energy_and_gradient(V, g, spec, p, lam, eps, model)[0]


def energy_gradient(V, g, spec, p=None, lam=1.0, eps=0.0, model="cell"):
    return energy_and_gradient(V, g, spec, p, lam, eps, model)[1]


def operator_residual(V, g, spec, p=None, lam=1.0, eps=0.0, model="cell"):
    """Max-norm of the gradient per unit measure (the strong-form residual)."""
    G = energy_gradient(V, g, spec, p, lam, eps, model)
    return float(np.max(np.abs(G)) / spec.grid.cell_measure)


def face_coefficients(V, spec, model="cell", s_floor=0.0):
    """Secant coefficients ``k_f`` with face flux ``F_f = k_f D_f``.

    For the cell model ``k_f`` averages ``Psi(x, |grad V|)`` of the two
    neighbouring cells; for the face model it is the face's own
    ``Psi``.  Magnitudes below ``s_floor`` are raised to it, which only the
    solver metric uses (with ``s_floor = 0`` a vanishing magnitude gives 0).
    """
    grid = spec.grid
    V = grid.check(V, "V")
    D = gradient(V, grid)
    W, P = spec.arrays()
    if model == "cell":
        s = np.sqrt(cell_gradient_sq(V, grid))
        pos = s > 0 if s_floor == 0.0 else np.ones(grid.shape, dtype=bool)
        s = np.maximum(s, s_floor)
        psi = np.zeros(grid.shape)
        for w, pp in zip(W, P):
            psi[pos] += w[pos] * s[pos] ** (pp[pos] - 2.0)
        return 0.5 * (psi[:, 1:] + psi[:, :-1]), 0.5 * (psi[1:, :] + psi[:-1, :])

    def side(d, WL, WR, PL, PR):
        a = np.maximum(np.abs(d), s_floor)
        pos = a > 0
        k = np.zeros_like(d)
        for wl, wr, pl, pr in zip(WL, WR, PL, PR):
            k[pos] += 0.5 * (wl[pos] * a[pos] ** (pl[pos] - 2.0) + wr[pos] * a[pos] ** (pr[pos] - 2.0))
        return k

    kx = side(D.x, [w[:, :-1] for w in W], [w[:, 1:] for w in W], [q[:, :-1] for q in P], [q[:, 1:] for q in P])
    ky = side(D.y, [w[:-1, :] for w in W], [w[1:, :] for w in W], [q[:-1, :] for q in P], [q[1:, :] for q in P])
    return kx, ky


def face_flux(V, spec, model="cell"):
    """The face flux ``F`` with ``-div F`` equal to the operator part of the gradient."""
    grid = spec.grid
    D = gradient(grid.check(V, "V"), grid)
    kx, ky = face_coefficients(V, spec, model)
    return VectorField(kx * D.x, ky * D.y)
