"""Independent reference computations, written with plain loops."""
import numpy as np


def neumann_laplacian_apply(u, hx, hy):
    """``-Lap u`` with the 5-point stencil and mirrored (zero-flux) boundaries."""
    ny, nx = u.shape
    out = np.zeros_like(u)
    for j in range(ny):
        for i in range(nx):
            acc = 0.0
            if i > 0:
                acc += (u[j, i] - u[j, i - 1]) / hx**2
            if i < nx - 1:
                acc += (u[j, i] - u[j, i + 1]) / hx**2
            if j > 0:
                acc += (u[j, i] - u[j - 1, i]) / hy**2
            if j < ny - 1:
                acc += (u[j, i] - u[j + 1, i]) / hy**2
            out[j, i] = acc
    return out


def gauss_seidel_neumann(g, lam, hx, hy, tol=1e-12, omega=1.8, max_sweeps=20_000):
    """Solve ``-Lap V + lam V = g`` by lexicographic (over-relaxed) Gauss-Seidel sweeps.

    Stops when the residual divided by the stencil diagonal (the size of the
    next point correction) drops below ``tol`` in max norm.
    """
    ny, nx = g.shape
    V = np.zeros_like(g)
    cx, cy = 1.0 / hx**2, 1.0 / hy**2
    diag = np.full(g.shape, lam)
    diag[:, 1:] += cx
    diag[:, :-1] += cx
    diag[1:, :] += cy
    diag[:-1, :] += cy
    for sweep in range(max_sweeps):
        for j in range(ny):
            for i in range(nx):
                acc = g[j, i]
                if i > 0:
                    acc += cx * V[j, i - 1]
                if i < nx - 1:
                    acc += cx * V[j, i + 1]
                if j > 0:
                    acc += cy * V[j - 1, i]
                if j < ny - 1:
                    acc += cy * V[j + 1, i]
                V[j, i] += omega * (acc / diag[j, i] - V[j, i])
        if sweep % 10 == 9:
            res = neumann_laplacian_apply(V, hx, hy) + lam * V - g
            if np.max(np.abs(res / diag)) <= tol:
                return V, sweep + 1
    raise RuntimeError("Gauss-Seidel did not converge")
