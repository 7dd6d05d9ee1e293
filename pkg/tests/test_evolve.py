import numpy as np
import pytest
from hypothesis import given, strategies as st

from quadnls.evolve import (DIAGNOSTIC_COLUMNS, BlowUpError, EvolveConfig, gauss4_step,
                            ifrk4_step, linear_propagate, lipschitz_probe, run, strang_step)
from quadnls.model import FieldPair, ModelParams, conserved_mass, hamiltonian, stationary_wave
from quadnls.spectral import ComplexField, make_grid

from conftest import random_pair

G = make_grid(2 * np.pi, 32)
STEPS = [strang_step, ifrk4_step, gauss4_step]
WAVE_PARAMS = ModelParams(sigma=1.0, n2_coefficient=0.5)
UNCOUPLED = ModelParams(sigma=2.5, theta=0.4, alpha=-1.1, n1_coefficient=0.0, n2_coefficient=0.0)


def gaussian_pair(grid, amp=1.0):
    g = amp * np.exp(-grid.x ** 2)
    return FieldPair(ComplexField(grid, g), ComplexField(grid, g))


def test_config_validation():
    assert EvolveConfig().dt == 1e-3
    for kw in [dict(dt=0), dict(t_end=-1), dict(dt=2.0, t_end=1.0), dict(scheme="euler"),
               dict(record_every=0), dict(blowup_threshold=0)]:
        with pytest.raises(ValueError):
            EvolveConfig(**kw)


def test_linear_propagate_examples():
    u = ComplexField.from_function(G, lambda x: np.exp(1j * x))
    st_ = FieldPair(u, u)
    p = ModelParams(sigma=2.0)
    same = linear_propagate(st_, p, 0.0)
    assert np.allclose(same.u.samples, st_.u.samples, rtol=0, atol=1e-14)
    half = linear_propagate(st_, p, np.pi)
    assert np.allclose(half.u.samples, -u.samples, atol=1e-12)


@given(st.integers(0, 2 ** 31), st.floats(-5, 5), st.floats(-5, 5))
def test_linear_group_law_and_unitarity(seed, t1, t2):
    st_ = random_pair(G, np.random.default_rng(seed))
    p = ModelParams(p=-1, q=1, sigma=0.7, theta=0.3, alpha=2.0)
    a = linear_propagate(linear_propagate(st_, p, t1), p, t2)
    b = linear_propagate(st_, p, t1 + t2)
    assert a.l2_distance(b) <= 1e-11 * st_.l2_distance(FieldPair.zeros(G))
    m0 = conserved_mass(st_, p)
    assert conserved_mass(linear_propagate(st_, p, t1), p) == pytest.approx(m0, rel=1e-12)


@pytest.mark.parametrize("step", STEPS)
def test_coupling_off_reduces_to_linear(step, rng):
    st_ = random_pair(G, rng)
    a = step(st_, UNCOUPLED, 0.013)
    b = linear_propagate(st_, UNCOUPLED, 0.013)
    assert a.l2_distance(b) <= 1e-12 * st_.l2_distance(FieldPair.zeros(G))


@pytest.mark.parametrize("step", STEPS)
def test_zero_state_stays_zero(step):
    z = FieldPair.zeros(G)
    out = step(z, ModelParams(sigma=3.0), 0.1)
    assert np.all(out.u.samples == 0) and np.all(out.v.samples == 0)


def test_strang_linear_time_reversal(rng):
    st_ = random_pair(G, rng)
    back = strang_step(strang_step(st_, UNCOUPLED, 0.02), UNCOUPLED, -0.02)
    assert back.l2_distance(st_) <= 1e-12 * st_.l2_distance(FieldPair.zeros(G))


@pytest.mark.parametrize("step,order", [(strang_step, 3), (ifrk4_step, 5), (gauss4_step, 5)])
def test_local_error_order_on_exact_wave(step, order):
    w = stationary_wave(G, WAVE_PARAMS, 1.0)
    errs = [w.l2_distance(step(w, WAVE_PARAMS, dt)) for dt in (0.05, 0.025)]
    ratio = errs[0] / errs[1]
    assert 2 ** order * 0.85 <= ratio <= 2 ** order * 1.15


def test_blowup_flag_and_error():
    st_ = gaussian_pair(G, 2.0)
    out = strang_step(st_, ModelParams(), 0.01, blowup_threshold=0.5)
    assert out.u.blown_up
    cfg = EvolveConfig(dt=0.01, t_end=0.1, blowup_threshold=0.5)
    traj = run(st_, ModelParams(), cfg)
    assert traj.blown_up and traj.blowup_time == pytest.approx(0.01)
    assert traj.diagnostic_rows()[-1][-1] == 1
    with pytest.raises(BlowUpError):
        run(st_, ModelParams(), cfg, raise_on_blowup=True)


def test_nan_detected_as_blowup():
    st_ = gaussian_pair(G, 1e200)
    traj = run(st_, ModelParams(), EvolveConfig(dt=0.1, t_end=1.0, blowup_threshold=1e300))
    assert traj.blown_up


def test_zero_data_zero_trajectory():
    traj = run(FieldPair.zeros(G), ModelParams(), EvolveConfig(dt=0.01, t_end=0.1))
    assert np.all(traj.u_raw == 0) and np.all(traj.diagnostics["mass"] == 0)


def test_trajectory_shape_and_diagnostics():
    st_ = gaussian_pair(make_grid(20.0, 64), 0.5)
    p = ModelParams(sigma=2.0, theta=0.1)
    traj = run(st_, p, EvolveConfig(dt=0.01, t_end=0.1, record_every=3))
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[-1] == pytest.approx(0.1)
    assert traj.u_raw.shape == (len(traj.times), 64)
    rows = traj.diagnostic_rows()
    assert len(rows[0]) == len(DIAGNOSTIC_COLUMNS)
    assert traj.diagnostics["hamiltonian"][0] == pytest.approx(hamiltonian(st_, p), rel=1e-12)
    assert traj.diagnostics["mass"][0] == pytest.approx(conserved_mass(st_, p), rel=1e-12)


def test_run_is_deterministic():
    st_ = gaussian_pair(make_grid(20.0, 64))
    cfg = EvolveConfig(dt=0.01, t_end=0.2)
    a = run(st_, ModelParams(sigma=3.0), cfg)
    b = run(st_, ModelParams(sigma=3.0), cfg)
    assert np.array_equal(a.u_raw, b.u_raw) and np.array_equal(a.v_raw, b.v_raw)


def test_gauss4_conserves_mass_at_coarse_steps():
    st_ = gaussian_pair(make_grid(40.0, 128), 1.5)
    p = ModelParams(sigma=3.0, n2_coefficient=0.5)
    traj = run(st_, p, EvolveConfig(dt=0.05, t_end=1.0, scheme="gauss4"))
    m = traj.diagnostics["mass"]
    assert np.max(np.abs(m - m[0])) <= 1e-13 * m[0]


def test_strang_and_ifrk4_agree():
    grid = make_grid(20 * np.pi, 256)
    st_ = gaussian_pair(grid)
    p = ModelParams(sigma=3.0, n2_coefficient=0.5)
    a = run(st_, p, EvolveConfig(dt=1e-4, t_end=1.0, scheme="strang", record_every=10000)).final
    b = run(st_, p, EvolveConfig(dt=1e-4, t_end=1.0, scheme="ifrk4", record_every=10000)).final
    assert a.l2_distance(b) <= 1e-5 * b.l2_distance(FieldPair.zeros(grid))


def test_lipschitz_probe():
    grid = make_grid(20 * np.pi, 256)
    st_ = gaussian_pair(grid)
    cfg = EvolveConfig(dt=0.01, t_end=1.0)
    assert lipschitz_probe(st_, 0.0, ModelParams(), cfg) == 0.0
    assert lipschitz_probe(st_, 1e-3, UNCOUPLED, cfg) == pytest.approx(1.0, rel=1e-10)
    p = ModelParams(sigma=3.0, n2_coefficient=0.5)
    r3 = lipschitz_probe(st_, 1e-3, p, cfg, seed=7)
    r4 = lipschitz_probe(st_, 1e-4, p, cfg, seed=7)
    assert abs(r3 - r4) <= 0.1 * r4
    with pytest.raises(ValueError):
        lipschitz_probe(st_, -1.0, p, cfg)
