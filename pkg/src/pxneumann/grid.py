"""Rectangular cell-centred grid with homogeneous Neumann structure.

Grid functions are ``(ny, nx)`` float arrays (axis 0 is y, axis 1 is x).
Vector fields live on interior faces only; the normal component on the
boundary is structurally absent, which is how ``dV/dnu = 0`` enters.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    hx: float
    hy: float

    def __post_init__(self):
        if self.nx < 2 or self.ny < 1:
            raise ValueError(f"grid needs nx >= 2 and ny >= 1, got {self.nx}x{self.ny}")
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError("grid spacings must be positive")

    @classmethod
    def unit_square(cls, nx, ny=None):
        """Grid covering [0,1]^2 (or [0,1] when ``ny == 1``)."""
        ny = nx if ny is None else ny
        return cls(nx, ny, 1.0 / nx, 1.0 / ny if ny > 1 else 1.0)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def size(self):
        return self.nx * self.ny

    @property
    def dim(self):
        return 1 if self.ny == 1 else 2

    @property
    def cell_measure(self):
        return self.hx * self.hy

    @property
    def measure(self):
        return self.size * self.cell_measure

    def centers(self):
        """Cell-centre coordinates ``(X, Y)``, each of shape ``(ny, nx)``."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y)

    def check(self, u, name="u"):
        u = np.asarray(u, dtype=float)
        if u.shape != self.shape:
            if u.size == self.size:
                u = u.reshape(self.shape)
            else:
                raise ValueError(f"{name} has shape {u.shape}, grid expects {self.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError(f"{name} has non-finite values")
        return u


class VectorField(NamedTuple):
    """Face-normal components: ``x`` has shape (ny, nx-1), ``y`` (ny-1, nx)."""

    x: np.ndarray
    y: np.ndarray

    def dot(self, other):
        return float(np.sum(self.x * other.x) + np.sum(self.y * other.y))


def gradient(u, grid):
    u = grid.check(u)
    return VectorField(np.diff(u, axis=1) / grid.hx, np.diff(u, axis=0) / grid.hy)


def divergence(F, grid):
    """Cell flux balance; the negative adjoint of :func:`gradient`."""
    out = np.zeros(grid.shape)
    fx = F.x / grid.hx
    fy = F.y / grid.hy
    out[:, :-1] += fx
    out[:, 1:] -= fx
    out[:-1, :] += fy
    out[1:, :] -= fy
    return out


def integrate(u, grid):
    return float(np.sum(u) * grid.cell_measure)


def inner(u, v, grid):
    return float(np.sum(u * v) * grid.cell_measure)


def face_inner(F, G, grid):
    """Discrete L2 pairing of face fields; each face carries one cell measure."""
    return F.dot(G) * grid.cell_measure


def cell_gradient_sq(u, grid):
    """Squared per-cell gradient magnitude.

    Each direction contributes the mean of the squared differences on its two
    faces, a missing boundary face counting as zero.  For a quadratic energy
    this reproduces the 5-point Neumann Laplacian exactly.
    """
    D = gradient(u, grid)
    s2 = np.zeros(grid.shape)
    dx2 = 0.5 * D.x**2
    dy2 = 0.5 * D.y**2
    s2[:, 1:] += dx2
    s2[:, :-1] += dx2
    s2[1:, :] += dy2
    s2[:-1, :] += dy2
    return s2


def l2_norm(u, grid):
    return float(np.sqrt(np.sum(np.square(u)) * grid.cell_measure))


@lru_cache(maxsize=16)
def difference_matrix(grid):
    """Sparse ``(n_faces, n_cells)`` matrix of :func:`gradient` (x-faces first)."""
    idx = np.arange(grid.size).reshape(grid.shape)
    blocks = []
    for a, b, h in ((idx[:, :-1], idx[:, 1:], grid.hx), (idx[:-1, :], idx[1:, :], grid.hy)):
        a = a.ravel()
        b = b.ravel()
        k = np.arange(a.size)
        data = np.concatenate([-np.ones(a.size), np.ones(a.size)]) / h
        blocks.append(sp.csr_matrix((data, (np.concatenate([k, k]), np.concatenate([a, b]))),
                                    shape=(a.size, grid.size)))
    return sp.vstack(blocks).tocsr()
