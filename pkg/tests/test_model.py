import numpy as np
import pytest
from hypothesis import given, strategies as st

from quadnls.model import (FieldPair, ModelParams, SobolevPair, conserved_mass, hamiltonian, mass,
                           nonlinear_rhs, region_contains, region_sample, resonance_lines,
                           resonance_n1, resonance_n2, stationary_wave)
from quadnls.spectral import ComplexField, make_grid

from conftest import random_pair

G = make_grid(2 * np.pi, 32)


def plane(k, amp=1.0, grid=G):
    return ComplexField.from_function(grid, lambda x: amp * np.exp(1j * k * x))


def zero(grid=G):
    return ComplexField(grid, np.zeros(grid.num_points))


# -- parameters ----------------------------------------------------------------

def test_params_defaults_and_a():
    p = ModelParams(sigma=4.0)
    assert p.a * p.sigma == pytest.approx(1.0, rel=1e-15)
    assert p.n2_coefficient == pytest.approx(p.a / 2)
    assert ModelParams(sigma=3, n2_coefficient=0.5).mass_weight == pytest.approx(6.0)


def test_mass_weight_general():
    p = ModelParams(sigma=3.0)  # n2 = 1/6
    assert p.mass_weight == pytest.approx(3.0 / (1 / 6))
    assert ModelParams(sigma=3.0, n2_coefficient=0.5).mass_weight == pytest.approx(6.0)


@pytest.mark.parametrize("kw", [dict(p=0), dict(q=2), dict(sigma=0.0), dict(sigma=-1.0),
                                dict(sigma=np.nan)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)


def test_replace_requires_explicit_n2_when_sigma_changes():
    p = ModelParams(sigma=2.0)
    with pytest.raises(ValueError):
        p.replace(sigma=3.0)
    assert p.replace(sigma=3.0, n2_coefficient=0.5).sigma == 3.0
    assert p.replace(theta=1.0).n2_coefficient == p.n2_coefficient


def test_field_pair_grid_mismatch():
    with pytest.raises(ValueError):
        FieldPair(zero(), zero(make_grid(2 * np.pi, 16)))


# -- region W_sigma ----------------------------------------------------------------

REGION_CASES = [
    # documented examples
    (2, 0, 0, True), (3, 0, -1, True), (1, 0, -0.6, False), (2, 0.5, 0, False),
    # sigma < 2: |k| - 1/2 <= s < min(k + 1/2, 2k + 1/2)
    (1, 0, -0.5, True),       # lower bound closed
    (1, 0, 0.5, False),       # upper bound open
    (1, 0, 0.49, True),
    (1, 1, 0.5, True),        # lower bound |k|-1/2 closed
    (1, 1, 1.5, False),       # k + 1/2 open
    (1, 1, 1.49, True),
    (1, -0.25, -0.25, True),  # negative kappa: upper bound 2k + 1/2 = 0
    (1, -0.25, 0.0, False),
    (1, -0.2, 0.05, True),
    (1, -0.2, 0.1, False),
    (0.5, 0.25, -0.25, True),
    (0.5, -0.5, 0.0, False),
    (1, -0.25, -0.3, False),
    # sigma = 2: k == s >= 0
    (2, 1, 1, True), (2, 0.3, 0.3, True), (2, -0.1, -0.1, False), (2, 1, 0.9, False),
    # sigma > 2: |k| - 1 <= s < min(k + 1, 2k + 1)
    (3, 0, -1, True), (3, 0, 1, False), (3, 0, 0.99, True), (3, 2, 1, True),
    (3, 2, 0.99, False), (3, 2, 3, False), (3, -0.5, -0.5, True), (3, -0.5, 0.0, False),
    (3, -0.25, 0.5, False), (3, -0.25, 0.25, True), (3, -0.25, -0.75, True), (3, -0.25, -0.875, False),
]


def _expected(sigma, k, s):
    if sigma < 2:
        return abs(k) - 0.5 <= s < min(k + 0.5, 2 * k + 0.5)
    if sigma == 2:
        return k == s and s >= 0
    return abs(k) - 1 <= s < min(k + 1, 2 * k + 1)


@pytest.mark.parametrize("sigma,k,s,flag", REGION_CASES)
def test_region_contains_cases(sigma, k, s, flag):
    assert region_contains(sigma, SobolevPair(k, s)) == flag
    assert _expected(sigma, k, s) == flag


def test_region_rejects_bad_sigma():
    with pytest.raises(ValueError):
        region_contains(0.0, SobolevPair(0, 0))


def test_region_sample_sigma2_diagonal():
    pts = region_sample(2, (-1, 1), (-1, 1), 3)
    inside = {(k, s) for k, s, f in pts if f}
    assert inside == {(0.0, 0.0), (1.0, 1.0)}
    assert len(pts) == 9


def test_region_sample_sigma1_segment():
    pts = region_sample(1, (0, 0), (-0.5, 0.4), 10)
    assert len(pts) == 100 and all(f for _, _, f in pts)


@given(st.sampled_from([0.5, 1.0, 2.0, 3.0]), st.floats(-3, 3), st.floats(-3, 3))
def test_region_sample_pointwise(sigma, a, b):
    pts = region_sample(sigma, (min(a, b), max(a, b)), (-2, 2), 2)
    for k, s, f in pts:
        assert f == region_contains(sigma, SobolevPair(k, s))


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_region_sigma2_implies_diagonal(k, s):
    if region_contains(2, SobolevPair(k, s)):
        assert k == s


# -- nonlinearity ---------------------------------------------------------------------

def test_nonlinear_rhs_examples():
    p = ModelParams(sigma=2.0)
    z = nonlinear_rhs(FieldPair(zero(), zero()), p)
    assert np.all(z.u.samples == 0) and np.all(z.v.samples == 0)
    r = nonlinear_rhs(FieldPair(plane(1), plane(2)), p)
    assert np.allclose(r.u.samples, 1j * plane(1).samples, atol=1e-12)
    r = nonlinear_rhs(FieldPair(plane(1), zero()), p)
    assert np.allclose(r.u.samples, 0, atol=1e-12)
    c = 1j * p.n2_coefficient / p.sigma
    assert np.allclose(r.v.samples, c * plane(2).samples, atol=1e-12)


def test_nonlinear_rhs_dealiased_drops_out_of_band_products():
    # e^{i 12 x} squared is e^{i 24 x}, which lies outside the 32-point lattice
    r = nonlinear_rhs(FieldPair(plane(12), zero()), ModelParams())
    assert np.allclose(r.v.samples, 0, atol=1e-12)


# -- conserved quantities -------------------------------------------------------------

def test_mass_examples():
    assert mass(FieldPair(zero(), zero()), 2.0) == 0
    assert mass(FieldPair(plane(1), zero()), 2.0) == pytest.approx(2 * np.pi, rel=1e-12)
    assert mass(FieldPair(zero(), plane(1)), 2.0) == pytest.approx(8 * np.pi, rel=1e-12)


def test_hamiltonian_examples():
    p = ModelParams(sigma=1.0, n2_coefficient=0.5)
    assert hamiltonian(FieldPair(zero(), zero()), p) == 0
    st_ = FieldPair(plane(1, 2 * np.sqrt(2)), plane(2))
    assert hamiltonian(st_, p) == pytest.approx(8 * np.pi, rel=1e-12)
    L = 5.0
    g = make_grid(L, 16)
    for sign in (1, -1):
        pc = ModelParams(p=sign, theta=1.0, sigma=1.0, n2_coefficient=0.5)
        c = 1.7
        u = ComplexField(g, np.full(16, c))
        assert hamiltonian(FieldPair(u, zero(g)), pc) == pytest.approx(c * c * L, rel=1e-12)


def test_stationary_wave_formula():
    p = ModelParams(sigma=1.0, n2_coefficient=0.5)
    w = stationary_wave(G, p, 1.0)
    assert np.allclose(w.u.samples, 2 * np.sqrt(2) * np.exp(1j * G.x), atol=1e-14)
    assert np.allclose(w.v.samples, np.exp(2j * G.x), atol=1e-14)
    # the nonlinear parts of u_t, v_t cancel the linear ones (-i k^2 u, -4 i k^2 v / sigma)
    r = nonlinear_rhs(w, p)
    assert np.allclose(r.u.samples, 1j * w.u.samples, atol=1e-12)
    assert np.allclose(r.v.samples, 4j * w.v.samples, atol=1e-12)
    with pytest.raises(ValueError):
        stationary_wave(G, p, 0.3)


@given(st.integers(0, 2 ** 31), st.integers(-15, 15), st.floats(0.2, 5.0))
def test_mass_and_hamiltonian_translation_invariant(seed, k, sigma):
    g = make_grid(7.0, 32)
    st_ = random_pair(g, np.random.default_rng(seed), nyquist=False)
    p = ModelParams(sigma=sigma, theta=0.3, alpha=-0.2)
    sh = st_.shift(k)
    assert mass(sh, sigma) == pytest.approx(mass(st_, sigma), rel=1e-12)
    assert conserved_mass(sh, p) == pytest.approx(conserved_mass(st_, p), rel=1e-12)
    h0 = hamiltonian(st_, p)
    assert abs(hamiltonian(sh, p) - h0) <= 1e-12 * max(1.0, abs(h0))


# -- resonance functions ---------------------------------------------------------------

def test_resonance_examples():
    assert resonance_n1(0, 0, 0.3) == 0
    assert resonance_n1(1, 2, 0.5) == pytest.approx(8)
    assert resonance_n1(1, -3, 0.25) == pytest.approx(2.75)
    assert 2.75 >= (1 - 2 * 0.25) * ((1 - 3) ** 2 + 1)
    assert resonance_n2(0, 0, 0.7) == 0
    assert resonance_n2(1, 1, 0.5) == 0
    assert resonance_n2(1, -1, 0.25) == pytest.approx(-2)


def test_resonance_lines_examples():
    assert resonance_lines(1.0) == pytest.approx((0.0, 1.0))
    assert resonance_lines(0.5) == pytest.approx((0.5, 0.5))
    assert resonance_lines(5 / 8) == pytest.approx((0.25, 0.75))
    with pytest.raises(ValueError):
        resonance_lines(0.49)


finite = st.floats(-1e3, 1e3)


@given(finite)
def test_mass_resonance_diagonal(x):
    assert resonance_n2(x, x, 0.5) == 0


@given(finite, finite, st.floats(0.0, 0.499))
def test_nonresonant_lower_bounds(x1, x2, a):
    xi = x1 + x2
    tol = 1e-9 * (xi * xi + x1 * x1 + x2 * x2 + 1)
    assert abs(resonance_n1(x1, x2, a)) >= (1 - 2 * a) * (xi * xi + x1 * x1) - tol
    assert abs(resonance_n2(x1, x2, a)) >= (1 - 2 * a) * (x1 * x1 + x2 * x2) - tol


@given(finite, finite, st.floats(0.5, 10.0))
def test_resonance_factorisation(xi, x2, a):
    mu, one_minus = resonance_lines(a)
    lhs = 2 * abs(xi - mu * x2) * abs(xi - one_minus * x2)
    rhs = abs(2 * xi * xi - 2 * xi * x2 + (1 - a) * x2 * x2)
    scale = 2 * (abs(xi) + abs(x2)) ** 2 * (1 + a) + 1e-300
    assert abs(lhs - rhs) <= 1e-10 * scale
