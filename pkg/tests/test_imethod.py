import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quadnls.evolve import EvolveConfig, run
from quadnls.imethod import (REGIMES, IMultiplier, apply_I, commutator_n1, commutator_n2,
                             default_delta, energy_derivative_check, increment_experiment,
                             modified_energy, multiplier_M, multiplier_m, regime_bound,
                             regime_classify, sample_regime)
from quadnls.model import FieldPair, ModelParams, mass
from quadnls.spectral import ComplexField, apply_symbol, make_grid, sobolev_norm

from conftest import random_field, random_pair


# -- multiplier ------------------------------------------------------------------

def test_imultiplier_validation():
    with pytest.raises(ValueError):
        IMultiplier(1.0, -0.5)
    with pytest.raises(ValueError):
        IMultiplier(10.0, 0.1)


def test_multiplier_examples():
    im = IMultiplier(10.0, -0.5)
    assert multiplier_m(3.0, im) == 1.0
    assert multiplier_m(-9.99, im) == 1.0
    assert multiplier_m(20.0, im) == pytest.approx(2 ** -0.5, rel=1e-15)
    assert multiplier_m(20.0, im) == pytest.approx(0.70711, abs=1e-5)
    assert multiplier_m(1e6, IMultiplier(10.0, 0.0)) == 1.0


@given(st.floats(1.01, 1e3), st.floats(-2, 0), st.floats(0, 1e4), st.floats(0, 1e4))
def test_multiplier_properties(N, s, a, b):
    im = IMultiplier(N, s)
    ma, mb = multiplier_m(a, im), multiplier_m(b, im)
    assert multiplier_m(-a, im) == ma
    assert 0 < ma <= 1
    if a <= b:
        assert mb <= ma
    if a >= 2 * N:
        assert ma == pytest.approx(N ** (-s) * a ** s, rel=1e-12)
    if a < N:
        assert ma == 1.0


def test_multiplier_continuous_at_N():
    im = IMultiplier(7.0, -0.8)
    assert multiplier_m(7.0 * (1 + 1e-12), im) == pytest.approx(1.0, abs=1e-11)
    assert multiplier_m(14.0 * (1 - 1e-12), im) == pytest.approx(2 ** -0.8, rel=1e-11)


# -- operator I ----------------------------------------------------------------------

G = make_grid(2 * np.pi, 64)


def mode(k, grid=G, amp=1.0):
    return ComplexField.from_function(grid, lambda x: amp * np.exp(1j * k * x))


def test_apply_I_examples(rng):
    u = random_field(G, rng)
    assert np.allclose(apply_I(u, IMultiplier(4.0, 0.0)).samples, u.samples, atol=1e-12)
    im = IMultiplier(4.0, -1.0)
    out = apply_I(mode(16), im)
    assert np.allclose(out.samples, 0.25 * mode(16).samples, atol=1e-12)


@given(st.integers(0, 2 ** 31), st.floats(1.5, 20), st.floats(-1, 0))
def test_apply_I_bound_commutation_conjugation(seed, N, s):
    rng = np.random.default_rng(seed)
    u = random_field(G, rng)
    im = IMultiplier(N, s)
    Iu = apply_I(u, im)
    assert sobolev_norm(Iu, 0) <= 2 * N ** (-s) * sobolev_norm(u, s)
    d = lambda xi: 1j * xi ** 3 - 2 * xi ** 2 + 0.5
    a = apply_symbol(Iu, d)
    b = apply_I(apply_symbol(u, d), im)
    assert np.max(np.abs(a.samples - b.samples)) <= 1e-12 * max(1, np.max(np.abs(a.samples)))
    v = random_field(G, rng, nyquist=False)
    lhs = apply_I(v.conj(), im).samples
    rhs = apply_I(v, im).conj().samples
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


# -- modified energy ----------------------------------------------------------------------

def test_modified_energy_examples():
    im = IMultiplier(4.0, -1.0)
    z = FieldPair.zeros(G)
    assert modified_energy(z, 2.0, im) == 0
    low = FieldPair(mode(3, amp=0.7), mode(-2))
    assert modified_energy(low, 2.0, im) == pytest.approx(mass(low, 2.0), rel=1e-12)
    unit = mode(16, amp=1 / np.sqrt(2 * np.pi))
    st_ = FieldPair(unit, ComplexField(G, np.zeros(64)))
    assert mass(st_, 3.0) == pytest.approx(1.0, rel=1e-12)
    assert modified_energy(st_, 3.0, im) == pytest.approx(1 / 16, rel=1e-12)


@given(st.integers(0, 2 ** 31), st.floats(1.5, 40), st.floats(-1, -0.05), st.floats(0.2, 4))
def test_modified_energy_below_mass(seed, N, s, sigma):
    st_ = random_pair(G, np.random.default_rng(seed))
    im = IMultiplier(N, s)
    E, M = modified_energy(st_, sigma, im), mass(st_, sigma)
    assert 0 <= E <= M * (1 + 1e-12)
    # content above N makes the inequality strict (unless N exceeds the lattice)
    if N < 31:
        assert E < M * (1 - 1e-12)


# -- commutators -------------------------------------------------------------------------------

def brute_commutators(u_raw, v_raw, L, N, s):
    """Double sum over frequency pairs; returns raw coefficients of both commutators."""
    n = len(u_raw)
    idx = [j if j < n // 2 else j - n for j in range(n)]
    pos = {k: j for j, k in enumerate(idx)}
    m = lambda k: 1.0 if abs(2 * np.pi * k / L) <= N else (abs(2 * np.pi * k / L) / N) ** s
    c1 = np.zeros(n, complex)
    c2 = np.zeros(n, complex)
    for i, ki in enumerate(idx):
        for j, kj in enumerate(idx):
            # conj(u) has coefficient conj(u_hat(ki)) at frequency -ki
            k = -ki + kj
            if k in pos:
                term = np.conj(u_raw[i]) * v_raw[j] / n
                c1[pos[k]] += (m(k) - m(ki) * m(kj)) * term
            k = ki + kj
            if k in pos:
                term = u_raw[i] * u_raw[j] / n
                c2[pos[k]] += (m(k) - m(ki) * m(kj)) * term
    return c1, c2


@pytest.mark.parametrize("n", [8, 16])
@pytest.mark.parametrize("L,N,s", [(2 * np.pi, 1.5, -0.5), (2 * np.pi, 2.0, -1.0), (3.0, 4.0, -0.3)])
def test_commutators_match_brute_force(n, L, N, s, rng):
    g = make_grid(L, n)
    u, v = random_field(g, rng), random_field(g, rng)
    im = IMultiplier(N, s)
    b1, b2 = brute_commutators(u.raw(), v.raw(), L, N, s)
    c1 = commutator_n1(u, v, im).raw()
    c2 = commutator_n2(u, im).raw()
    assert np.max(np.abs(c1 - b1)) <= 1e-12 * max(1.0, np.max(np.abs(b1)))
    assert np.max(np.abs(c2 - b2)) <= 1e-12 * max(1.0, np.max(np.abs(b2)))


def test_commutators_vanish_below_N_and_for_s0(rng):
    u = mode(3) + mode(-5)
    v = mode(2) + mode(7)
    im = IMultiplier(20.0, -0.7)
    assert np.max(np.abs(commutator_n1(u, v, im).samples)) < 1e-12
    assert np.max(np.abs(commutator_n2(u, im).samples)) < 1e-12
    a, b = random_field(G, rng), random_field(G, rng)
    im0 = IMultiplier(3.0, 0.0)
    assert np.max(np.abs(commutator_n1(a, b, im0).samples)) < 1e-12
    assert np.max(np.abs(commutator_n2(a, im0).samples)) < 1e-12


def test_commutator_grid_mismatch(rng):
    with pytest.raises(ValueError):
        commutator_n1(random_field(G, rng), random_field(make_grid(2 * np.pi, 32), rng),
                      IMultiplier(3.0, -0.5))


# -- M and the regimes ----------------------------------------------------------------------------

def test_multiplier_M_low_frequencies():
    im = IMultiplier(10.0, -0.5)
    assert multiplier_M(5.0, 2.0, im) == 0.0
    assert multiplier_M(-4.0, 6.0, im) == 0.0


@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4), st.floats(1.5, 100), st.floats(-1, 0))
def test_multiplier_M_symmetric(xi, xi1, N, s):
    im = IMultiplier(N, s)
    a = multiplier_M(xi, xi1, im)
    b = multiplier_M(xi, xi - xi1, im)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_regime_classify_examples():
    assert regime_classify(11.0, 1.0, 10.0) == "i"
    assert regime_classify(11.0, 10.0, 10.0) == "ii"
    assert regime_classify(80.0, 40.0, 10.0) == "v"
    assert regime_classify(-100.0, 25.0, 10.0) == "iii"
    assert regime_classify(100.0, 125.0, 10.0) == "iv"
    assert regime_classify(12.0, 6.0, 10.0) == "none"


@pytest.mark.parametrize("regime", REGIMES)
def test_regime_sampler_and_bounds(regime):
    rng = np.random.default_rng(3)
    for N in (16.0, 32.0):
        xi, xi1 = sample_regime(regime, N, 500, rng)
        assert all(regime_classify(a, b, N) == regime for a, b in zip(xi, xi1))
        ratio = np.abs(multiplier_M(xi, xi1, IMultiplier(N, -1.0))) / regime_bound(regime, xi, xi1, N)
        assert np.max(ratio) <= 10


# -- energy derivative -----------------------------------------------------------------------------

NARROW = make_grid(4 * np.pi, 512)


def narrow_gaussian(amp=1.0, width=0.1):
    g = amp * np.exp(-(NARROW.x / width) ** 2)
    return FieldPair(ComplexField(NARROW, g), ComplexField(NARROW, 0.5 * g))


def test_energy_derivative_s0_is_roundoff():
    p = ModelParams(sigma=3.0, n2_coefficient=0.5)
    traj = run(narrow_gaussian(), p, EvolveConfig(dt=1e-3, t_end=0.02, scheme="gauss4"))
    res = energy_derivative_check(traj, 3.0, IMultiplier(32.0, 0.0))
    assert res.rate_scale == 0.0
    E = mass(traj.state(0), 3.0)
    assert res.absolute <= 1e-10 * E


def test_energy_derivative_linear_dynamics():
    p = ModelParams(sigma=3.0, n1_coefficient=0.0, n2_coefficient=0.0)
    traj = run(narrow_gaussian(), p, EvolveConfig(dt=1e-3, t_end=0.02))
    res = energy_derivative_check(traj, 3.0, IMultiplier(32.0, -0.5))
    E = mass(traj.state(0), 3.0)
    assert res.rate_scale == 0.0 and res.absolute <= 1e-10 * E


def test_energy_derivative_validation():
    p = ModelParams(sigma=3.0, n2_coefficient=0.5)
    sparse = run(narrow_gaussian(), p, EvolveConfig(dt=1e-3, t_end=0.01, record_every=2))
    with pytest.raises(ValueError):
        energy_derivative_check(sparse, 3.0, IMultiplier(32.0, -0.5))
    ok = run(narrow_gaussian(), p, EvolveConfig(dt=1e-3, t_end=0.01))
    with pytest.raises(ValueError):
        energy_derivative_check(ok, 2.0, IMultiplier(32.0, -0.5))


def test_energy_derivative_formula_tracks_difference_quotient():
    p = ModelParams(sigma=3.0, n2_coefficient=0.5)
    traj = run(narrow_gaussian(), p, EvolveConfig(dt=6.25e-5, t_end=0.01))
    res = energy_derivative_check(traj, 3.0, IMultiplier(32.0, -0.5))
    assert res.rate_scale > 0
    assert res.relative < 0.01


# -- increment experiment --------------------------------------------------------------------------

def test_default_delta():
    assert default_delta(64.0, -0.5) == 1.0
    assert default_delta(64.0, 0.0) == 1.0
    assert default_delta(64.0, -0.5, prefactor=1e-3) == pytest.approx(1e-3 * 64 ** (2 / 3))


def test_increment_experiment_validation():
    g = make_grid(8 * np.pi, 256)
    base = FieldPair(ComplexField(g, np.exp(-np.abs(g.x))), ComplexField(g, np.exp(-np.abs(g.x))))
    with pytest.raises(ValueError):
        increment_experiment(base, 3.0, -0.5, [16, 32, 64])
    with pytest.raises(ValueError):
        increment_experiment(base, 3.0, -0.5, [16, 20, 24, 30])
    with pytest.raises(ValueError):
        increment_experiment(base, 3.0, 0.5, [4, 8, 16, 32])


def test_increment_experiment_s0_control_and_report():
    g = make_grid(8 * np.pi, 512)
    e = np.exp(-np.abs(g.x))
    base = FieldPair(ComplexField(g, e), ComplexField(g, 0.5 * e))
    rep = increment_experiment(base, 3.0, 0.0, [4, 8, 16, 32], dt=5e-3, scheme="gauss4")
    assert all(inc <= rep.roundoff_floor for inc in rep.increments)
    assert rep.excluded == [4.0, 8.0, 16.0, 32.0] and np.isnan(rep.fitted_exponent)
    assert len(rep.rows()) == 4 and all(r[1] == 1.0 for r in rep.rows())
    doc = json.loads(rep.to_json())
    assert doc["N_values"] == [4.0, 8.0, 16.0, 32.0]


def test_increment_experiment_decays_in_N():
    g = make_grid(8 * np.pi, 512)
    e = np.exp(-np.abs(g.x))
    base = FieldPair(ComplexField(g, e), ComplexField(g, 0.5 * e))
    rep = increment_experiment(base, 3.0, -0.5, [4, 8, 16, 32], dt=5e-3, scheme="gauss4")
    assert all(i >= 0 for i in rep.increments)
    assert rep.fitted_exponent < -0.4


@pytest.mark.parametrize("s", [-0.25, -0.5, -0.75])
def test_regime_bounds_general_s(s):
    rng = np.random.default_rng(4)
    for regime in REGIMES:
        maxima = []
        for N in (16.0, 32.0, 64.0):
            xi, xi1 = sample_regime(regime, N, 2000, rng)
            r = np.abs(multiplier_M(xi, xi1, IMultiplier(N, s))) / regime_bound(regime, xi, xi1, N)
            maxima.append(np.max(r))
        assert max(maxima) <= 10 and max(maxima) <= 2 * min(maxima)
