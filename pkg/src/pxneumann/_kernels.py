"""Hot loops of the discrete energy, in a numba flavour and a numpy flavour.

The numba path is used when numba imports and ``PXNEUMANN_NUMBA`` is not set
to ``0``/``false``/``off``.  Both paths compute the same quantities and are
cross-checked in the test-suite; ``benchmarks/bench_kernels.py`` times them.

All energy kernels return ``(E, G)`` where ``E`` is the energy divided by the
cell measure and ``G`` the gradient divided by the cell measure.
"""
import math
import os

import numpy as np

_FLAG = os.environ.get("PXNEUMANN_NUMBA", "1").strip().lower()

try:
    if _FLAG in ("0", "false", "off", "no"):
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# --------------------------------------------------------------------------
# numpy reference path
# --------------------------------------------------------------------------

def _lower_order_np(u, g, lam, eps, pe):
    E = np.sum(0.5 * lam * u * u - g * u)
    G = lam * u - g
    if eps != 0.0:
        au = np.abs(u)
        aup = au**pe
        E += eps * np.sum(aup / pe)
        with np.errstate(divide="ignore", invalid="ignore"):
            G = G + eps * np.where(au > 0, np.sign(u) * aup / np.where(au > 0, au, 1.0), 0.0)
    return E, G


def energy_grad_cell_np(u, g, lam, eps, pe, W, P, hx, hy):
    dx = (u[:, 1:] - u[:, :-1]) / hx
    dy = (u[1:, :] - u[:-1, :]) / hy
    s2 = np.zeros_like(u)
    s2[:, 1:] += 0.5 * dx * dx
    s2[:, :-1] += 0.5 * dx * dx
    s2[1:, :] += 0.5 * dy * dy
    s2[:-1, :] += 0.5 * dy * dy
    s = np.sqrt(s2)
    pos = s2 > 0
    safe = np.where(pos, s2, 1.0)
    A = np.zeros_like(u)
    psi = np.zeros_like(u)
    for w, p in zip(W, P):
        sp = np.where(pos, s, 0.0) ** p
        A += w * sp / p
        psi += w * sp / safe
    psi[~pos] = 0.0
    E, G = _lower_order_np(u, g, lam, eps, pe)
    E += np.sum(A)
    fx = 0.5 * (psi[:, 1:] + psi[:, :-1]) * dx / hx
    fy = 0.5 * (psi[1:, :] + psi[:-1, :]) * dy / hy
    G[:, :-1] -= fx
    G[:, 1:] += fx
    G[:-1, :] -= fy
    G[1:, :] += fy
    return float(E), G


def _face_terms_np(d, WL, WR, PL, PR):
    a = np.abs(d)
    e = np.zeros_like(d)
    f = np.zeros_like(d)
    for wl, wr, pl, pr in zip(WL, WR, PL, PR):
        al = a**pl
        ar = a**pr
        e += 0.5 * (wl * al / pl + wr * ar / pr)
        with np.errstate(divide="ignore", invalid="ignore"):
            f += np.where(a > 0, 0.5 * (wl * al + wr * ar) / np.where(a > 0, a, 1.0), 0.0)
    return e, f * np.sign(d)


def energy_grad_face_np(u, g, lam, eps, pe, W, P, hx, hy):
    dx = (u[:, 1:] - u[:, :-1]) / hx
    dy = (u[1:, :] - u[:-1, :]) / hy
    ex, fx = _face_terms_np(dx, [w[:, :-1] for w in W], [w[:, 1:] for w in W],
                            [p[:, :-1] for p in P], [p[:, 1:] for p in P])
    ey, fy = _face_terms_np(dy, [w[:-1, :] for w in W], [w[1:, :] for w in W],
                            [p[:-1, :] for p in P], [p[1:, :] for p in P])
    E, G = _lower_order_np(u, g, lam, eps, pe)
    E += np.sum(ex) + np.sum(ey)
    fx = fx / hx
    fy = fy / hy
    G[:, :-1] -= fx
    G[:, 1:] += fx
    G[:-1, :] -= fy
    G[1:, :] += fy
    return float(E), G


def log_holder_np(vals, xs, ys):
    v = vals.ravel()
    x = xs.ravel()
    y = ys.ravel()
    best = 0.0
    for i in range(v.size - 1):
        dist = np.hypot(x[i + 1:] - x[i], y[i + 1:] - y[i])
        c = np.abs(v[i + 1:] - v[i]) * np.log(np.e + 1.0 / dist)
        if c.size:
            best = max(best, float(c.max()))
    return best


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _lower_order_nb(u, g, lam, eps, pe, G):
        ny, nx = u.shape
        E = 0.0
        for j in range(ny):
            for i in range(nx):
                v = u[j, i]
                E += 0.5 * lam[j, i] * v * v - g[j, i] * v
                G[j, i] = lam[j, i] * v - g[j, i]
                if eps != 0.0 and v != 0.0:
                    av = abs(v)
                    avp = av ** pe[j, i]
                    E += eps * avp / pe[j, i]
                    G[j, i] += eps * math.copysign(avp / av, v)
        return E

    @njit(cache=True)
    def energy_grad_cell_nb(u, g, lam, eps, pe, W, P, hx, hy):
        ny, nx = u.shape
        nph = W.shape[0]
        s2 = np.zeros((ny, nx))
        for j in range(ny):
            for i in range(nx - 1):
                d = (u[j, i + 1] - u[j, i]) / hx
                s2[j, i] += 0.5 * d * d
                s2[j, i + 1] += 0.5 * d * d
        for j in range(ny - 1):
            for i in range(nx):
                d = (u[j + 1, i] - u[j, i]) / hy
                s2[j, i] += 0.5 * d * d
                s2[j + 1, i] += 0.5 * d * d
        psi = np.zeros((ny, nx))
        G = np.empty((ny, nx))
        E = _lower_order_nb(u, g, lam, eps, pe, G)
        for j in range(ny):
            for i in range(nx):
                q = s2[j, i]
                if q > 0.0:
                    ls = 0.5 * math.log(q)
                    acc = 0.0
                    for k in range(nph):
                        sp = math.exp(P[k, j, i] * ls)
                        E += W[k, j, i] * sp / P[k, j, i]
                        acc += W[k, j, i] * sp
                    psi[j, i] = acc / q
        for j in range(ny):
            for i in range(nx - 1):
                d = (u[j, i + 1] - u[j, i]) / hx
                f = 0.5 * (psi[j, i] + psi[j, i + 1]) * d / hx
                G[j, i] -= f
                G[j, i + 1] += f
        for j in range(ny - 1):
            for i in range(nx):
                d = (u[j + 1, i] - u[j, i]) / hy
                f = 0.5 * (psi[j, i] + psi[j + 1, i]) * d / hy
                G[j, i] -= f
                G[j + 1, i] += f
        return E, G

    @njit(cache=True)
    def _face_nb(d, W, P, jl, il, jr, ir):
        a = abs(d)
        e = 0.0
        f = 0.0
        if a > 0.0:
            la = math.log(a)
            for k in range(W.shape[0]):
                al = math.exp(P[k, jl, il] * la)
                ar = math.exp(P[k, jr, ir] * la)
                e += 0.5 * (W[k, jl, il] * al / P[k, jl, il] + W[k, jr, ir] * ar / P[k, jr, ir])
                f += 0.5 * (W[k, jl, il] * al + W[k, jr, ir] * ar)
            f = math.copysign(f / a, d)
        return e, f

    @njit(cache=True)
    def energy_grad_face_nb(u, g, lam, eps, pe, W, P, hx, hy):
        ny, nx = u.shape
        G = np.empty((ny, nx))
        E = _lower_order_nb(u, g, lam, eps, pe, G)
        for j in range(ny):
            for i in range(nx - 1):
                e, f = _face_nb((u[j, i + 1] - u[j, i]) / hx, W, P, j, i, j, i + 1)
                E += e
                G[j, i] -= f / hx
                G[j, i + 1] += f / hx
        for j in range(ny - 1):
            for i in range(nx):
                e, f = _face_nb((u[j + 1, i] - u[j, i]) / hy, W, P, j, i, j + 1, i)
                E += e
                G[j, i] -= f / hy
                G[j + 1, i] += f / hy
        return E, G

    @njit(cache=True)
    def log_holder_nb(vals, xs, ys):
        v = vals.ravel()
        x = xs.ravel()
        y = ys.ravel()
        best = 0.0
        for i in range(v.size):
            for k in range(i + 1, v.size):
                dist = math.hypot(x[k] - x[i], y[k] - y[i])
                c = abs(v[k] - v[i]) * math.log(math.e + 1.0 / dist)
                if c > best:
                    best = c
        return best


def _stack(arrs):
    if isinstance(arrs, np.ndarray) and arrs.ndim == 3 and arrs.flags.c_contiguous and arrs.dtype == np.float64:
        return arrs
    return np.ascontiguousarray(np.stack(arrs), dtype=np.float64)


def energy_grad(model, u, g, lam, eps, pe, W, P, hx, hy, use_numba=None):
    """Dispatch to the selected energy kernel.

    ``lam`` and ``pe`` are full arrays; ``W`` and ``P`` are sequences of
    per-phase arrays or ready-stacked ``(n_phases, ny, nx)`` arrays.
    """
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        fn = energy_grad_cell_nb if model == "cell" else energy_grad_face_nb
        E, G = fn(np.ascontiguousarray(u, dtype=np.float64), np.ascontiguousarray(g, dtype=np.float64),
                  np.ascontiguousarray(lam, dtype=np.float64), float(eps),
                  np.ascontiguousarray(pe, dtype=np.float64), _stack(W), _stack(P), float(hx), float(hy))
        return float(E), G
    fn = energy_grad_cell_np if model == "cell" else energy_grad_face_np
    return fn(u, g, lam, float(eps), pe, list(W), list(P), hx, hy)


def log_holder(vals, xs, ys, use_numba=None):
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        return float(log_holder_nb(np.ascontiguousarray(vals, dtype=np.float64),
                                   np.ascontiguousarray(xs, dtype=np.float64),
                                   np.ascontiguousarray(ys, dtype=np.float64)))
    return log_holder_np(vals, xs, ys)
