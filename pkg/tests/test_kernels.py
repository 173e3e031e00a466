import numpy as np
import pytest

from pxneumann import _kernels
from pxneumann.grid import Grid
from pxneumann.phases import build_phase_spec

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba path unavailable")


def setup(rng, nx=9, ny=7):
    g = Grid(nx, ny, 0.3, 0.2)
    spec = build_phase_spec(
        [(rng.uniform(0.5, 1.5, g.shape), rng.uniform(1.6, 2.0, g.shape)), (1.0, rng.uniform(2.0, 3.5, g.shape))], g
    )
    W, P = spec.stacked
    return g, W, P, spec.p_max.values


@needs_numba
@pytest.mark.parametrize("model", ["cell", "face"])
@pytest.mark.parametrize("eps", [0.0, 0.3])
def test_numba_matches_numpy(model, eps, rng):
    g, W, P, pe = setup(rng)
    u = rng.standard_normal(g.shape)
    u[2, :] = u[2, 0]  # flat rows exercise the zero-gradient branch
    src = rng.random(g.shape)
    lam = rng.uniform(0, 2, g.shape)
    E1, G1 = _kernels.energy_grad(model, u, src, lam, eps, pe, W, P, g.hx, g.hy, use_numba=True)
    E2, G2 = _kernels.energy_grad(model, u, src, lam, eps, pe, list(W), list(P), g.hx, g.hy, use_numba=False)
    assert E1 == pytest.approx(E2, rel=1e-13)
    np.testing.assert_allclose(G1, G2, rtol=1e-12, atol=1e-12 * np.max(np.abs(G2)))


@needs_numba
def test_numba_log_holder_matches(rng):
    g, _, P, _ = setup(rng)
    X, Y = g.centers()
    assert _kernels.log_holder(P[0], X, Y, True) == pytest.approx(_kernels.log_holder(P[0], X, Y, False), rel=1e-14)


def test_constant_field_has_zero_flux(rng):
    g, W, P, pe = setup(rng)
    u = np.full(g.shape, 0.4)
    for model in ("cell", "face"):
        for nb in (False, _kernels.HAVE_NUMBA):
            _, G = _kernels.energy_grad(model, u, np.full(g.shape, 0.4), np.ones(g.shape), 0.0, pe, W, P, g.hx, g.hy, nb)
            np.testing.assert_allclose(G, 0.0, atol=1e-15)


def test_env_flag_disables_numba():
    import subprocess
    import sys

    code = "import pxneumann._kernels as k; print(k.HAVE_NUMBA)"
    out = subprocess.run([sys.executable, "-c", code], env={"PXNEUMANN_NUMBA": "0", "PATH": ""},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
