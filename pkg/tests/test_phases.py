import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pxneumann.errors import DomainError, PropertyViolation
from pxneumann.grid import Grid
from pxneumann.phases import (
    bregman_gap,
    build_phase_spec,
    coercivity_constants,
    flux,
    flux_potential_consistency,
    growth_bound_check,
    monotonicity_gap,
    phi,
    potential,
    psi,
    single_phase,
)

G = Grid.unit_square(4)


def two_phase(p1=2.0, p2=4.0, w1=1.0, w2=1.0):
    return build_phase_spec([(w1, np.full(G.shape, p1)), (w2, np.full(G.shape, p2))], G)


def random_spec(rng):
    return build_phase_spec(
        [(rng.uniform(0.5, 1.5, G.shape), rng.uniform(1.5, 2.0, G.shape)),
         (rng.uniform(0.2, 1.0, G.shape), rng.uniform(2.0, 4.0, G.shape))],
        G,
    )


vec = st.tuples(st.floats(-10, 10), st.floats(-10, 10)).map(np.array)
cells = st.integers(0, 15)


def test_spec_invariants(rng):
    spec = random_spec(rng)
    assert spec.n_phases == 2
    np.testing.assert_array_equal(spec.p_max.values, np.maximum(*[p.values for p in spec.exponents]))
    assert spec.omega == min(float(w.min()) for w in spec.weights)


@pytest.mark.parametrize("w", [0.0, -1.0, np.nan])
def test_bad_weight(w):
    with pytest.raises(ValueError):
        build_phase_spec([(w, 2.0)], G)


def test_psi_examples():
    assert psi(single_phase(G), 3, 7.3) == 1.0
    assert psi(two_phase(), (1, 1), 1.0) == 2.0
    spec = two_phase(1.5, 3.0)
    vals = [psi(spec, 0, s) * s for s in (1e-2, 1e-4, 1e-8)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-3
    with pytest.raises(DomainError):
        psi(spec, 0, 0.0)


def test_flux_examples():
    np.testing.assert_array_equal(flux(two_phase(), 0, np.zeros(2)), 0.0)
    xi = np.array([0.3, -1.7])
    np.testing.assert_allclose(flux(single_phase(G), 5, xi), xi, rtol=1e-15)
    np.testing.assert_allclose(flux(two_phase(), 5, np.array([1.0, 0.0])), [2.0, 0.0], rtol=1e-15)


def test_potential_examples():
    assert potential(two_phase(), 0, np.zeros(2)) == 0.0
    assert potential(two_phase(), 0, np.array([0.6, 0.8])) == pytest.approx(0.75, rel=1e-15)
    xi = np.array([1.2, -0.5])
    assert potential(single_phase(G), 0, xi) == pytest.approx(0.5 * xi @ xi, rel=1e-15)


@pytest.mark.parametrize("omega,pplus,delta", [(1.0, 4.0, 0.25), (2.0, 2.0, 1.0), (0.5, 3.0, 1.0 / 6.0)])
def test_coercivity_constants(omega, pplus, delta):
    spec = build_phase_spec([(omega, np.full(G.shape, pplus))], G)
    c = coercivity_constants(spec)
    assert c.delta == pytest.approx(delta, rel=1e-15) and c.delta_tilde == 0.0


def test_monotonicity_examples(rng):
    spec = random_spec(rng)
    xi = np.array([0.4, 0.1])
    assert monotonicity_gap(spec, 2, xi, xi) == 0.0
    x1, x2 = rng.standard_normal(2), rng.standard_normal(2)
    assert monotonicity_gap(single_phase(G), 0, x1, x2) == pytest.approx(np.sum((x1 - x2) ** 2), rel=1e-13)


def test_monotonicity_sampled(rng):
    spec = random_spec(rng)
    for _ in range(10_000):
        c = int(rng.integers(16))
        x1, x2 = rng.standard_normal(2) * 3, rng.standard_normal(2) * 3
        assert monotonicity_gap(spec, c, x1, x2) > 0.0


def test_bregman_examples():
    assert bregman_gap(two_phase(), 0, np.ones(2), np.ones(2)) == (0.0, 0.0)
    lo, up = bregman_gap(single_phase(G), 0, np.zeros(2), np.array([1.0, 0.0]))
    assert lo == pytest.approx(0.5) and up == pytest.approx(0.5)


@given(cells, vec, vec, st.integers(0, 2**31 - 1))
def test_bregman_nonnegative(c, x1, x2, seed):
    spec = random_spec(np.random.default_rng(seed))
    lo, up = bregman_gap(spec, c, x1, x2)
    scale = 1e-12 * max(1.0, potential(spec, c, x1), potential(spec, c, x2))
    assert lo >= -scale and up >= -scale


@given(cells, vec, st.integers(0, 2**31 - 1))
def test_potential_even_and_phi_increasing(c, xi, seed):
    spec = random_spec(np.random.default_rng(seed))
    assert potential(spec, c, -xi) == potential(spec, c, xi)
    s = np.sort(np.random.default_rng(seed).uniform(0, 10, 2))
    if s[0] < s[1]:
        assert phi(spec, c, s[0]) < phi(spec, c, s[1])


@given(cells, vec, vec, st.floats(0.01, 0.99), st.integers(0, 2**31 - 1))
def test_midpoint_convexity(c, x1, x2, t, seed):
    spec = random_spec(np.random.default_rng(seed))
    gap = t * potential(spec, c, x1) + (1 - t) * potential(spec, c, x2) - potential(spec, c, t * x1 + (1 - t) * x2)
    assert gap >= -1e-10 * max(1.0, potential(spec, c, x1) + potential(spec, c, x2))


def test_growth_bound(rng):
    spec = random_spec(rng)
    rep = growth_bound_check(spec, samples=5000, rng=1)
    assert rep.passed and rep.a0 == rep.b == 2 * max(float(w.max()) for w in spec.weights)
    one = single_phase(G, weight=1.7, exponent=3.0)
    assert np.linalg.norm(flux(one, 0, np.array([1.0, 0.0]))) == pytest.approx(1.7)
    assert growth_bound_check(one, samples=100, rng=2).passed


def test_growth_bound_detects_violation(monkeypatch, rng):
    import pxneumann.phases as ph

    spec = random_spec(rng)
    monkeypatch.setattr(ph.GrowthReport, "passed", property(lambda self: False))
    with pytest.raises(PropertyViolation):
        ph.growth_bound_check(spec, samples=10, rng=0)


def test_flux_potential_consistency(rng):
    xi = np.array([0.3, 0.9])
    assert flux_potential_consistency(single_phase(G), 0, xi, 1e-3) < 1e-12
    spec = two_phase(1.7, 3.3)
    u = np.array([0.6, 0.8])
    e3 = flux_potential_consistency(spec, 0, u, 1e-3)
    e4 = flux_potential_consistency(spec, 0, u, 1e-4)
    assert 60 < e3 / e4 < 140
    # at the origin the one-sided difference of A vanishes for p >= 1.5
    spec = two_phase(1.5, 2.5)
    slopes = [potential(spec, 0, np.array([h, 0.0])) / h for h in (1e-2, 1e-4, 1e-6)]
    assert slopes[0] > slopes[1] > slopes[2] and slopes[2] < 1e-2
