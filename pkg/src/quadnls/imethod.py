"""The I-method: smoothing multiplier, modified energy and its increments.

``I`` is the Fourier multiplier with symbol ``m(xi) = 1`` for ``|xi| <= N``
and ``(|xi|/N)^s`` above ``N`` (``s <= 0``). The modified energy
``E(Iu, Iv) = ||Iu||^2 + 2 sigma ||Iv||^2`` is conserved when ``s = 0`` and
almost conserved otherwise; along the flow

    dE/dt = -2 Im int (I(conj(u) v) - conj(Iu) Iv) conj(Iu)
            -2 Im int (I(u^2) - (Iu)^2) conj(Iv)

for the ``n2 = 1/2`` normalisation (other ``n2`` use the conserved weight
``sigma * n1 / n2`` in place of ``2 sigma``; the formula is unchanged).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .evolve import EvolveConfig, Trajectory, run
from .fitting import loglog_slope
from .model import FieldPair, ModelParams, mass
from .spectral import ComplexField, _check_same_grid, apply_symbol, dealiased_product

REGIMES = ("i", "ii", "iii", "iv", "v")


@dataclass(frozen=True)
class IMultiplier:
    N: float
    s: float

    def __post_init__(self):
        if not self.N > 1:
            raise ValueError(f"N must exceed 1, got {self.N}")
        if self.s > 0:
            raise ValueError(f"s must be <= 0, got {self.s}")


def multiplier_m(xi, im: IMultiplier):
    a = np.abs(np.asarray(xi, dtype=float))
    with np.errstate(divide="ignore"):
        val = np.where(a <= im.N, 1.0, (np.maximum(a, im.N) / im.N) ** im.s)
    return float(val) if np.ndim(val) == 0 else val


def apply_I(field: ComplexField, im: IMultiplier) -> ComplexField:
    return apply_symbol(field, lambda xi: multiplier_m(xi, im))


def _m_on_grid(grid, im):
    return multiplier_m(grid.frequencies, im)


def modified_energy(state: FieldPair, sigma: float, im: IMultiplier) -> float:
    return mass(FieldPair(apply_I(state.u, im), apply_I(state.v, im)), sigma)


def _commutator_n1_raw(ur, vr, m):
    return m * dealiased_product(ur, vr, conj_a=True) - dealiased_product(m * ur, m * vr, conj_a=True)


def _commutator_n2_raw(ur, m):
    mu = m * ur
    return m * dealiased_product(ur, ur) - dealiased_product(mu, mu)


def commutator_n1(u: ComplexField, v: ComplexField, im: IMultiplier) -> ComplexField:
    """``I(conj(u) v) - conj(Iu) Iv`` (dealiased)."""
    _check_same_grid(u.grid, v.grid)
    m = _m_on_grid(u.grid, im)
    return ComplexField.from_raw(u.grid, _commutator_n1_raw(u.raw(), v.raw(), m))


def commutator_n2(u: ComplexField, im: IMultiplier) -> ComplexField:
    """``I(u^2) - (Iu)^2`` (dealiased)."""
    m = _m_on_grid(u.grid, im)
    return ComplexField.from_raw(u.grid, _commutator_n2_raw(u.raw(), m))


def multiplier_M(xi, xi1, im: IMultiplier):
    """``(m(xi) - m(xi1) m(xi2)) / (m(xi1) m(xi2))`` with ``xi2 = xi - xi1``."""
    xi = np.asarray(xi, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    m1 = multiplier_m(xi1, im)
    m2 = multiplier_m(xi - xi1, im)
    return (multiplier_m(xi, im) - m1 * m2) / (m1 * m2)


def regime_classify(xi: float, xi1: float, N: float) -> str:
    """First of the cases (i)-(v) met by ``(|xi1|, |xi2|)``, or ``"none"``.

    Case (v), ``|xi1| ~ |xi2| >~ N``, is read as ``|xi1|/2 < |xi2| < 2|xi1|``
    with ``min(|xi1|, |xi2|) >= N``.
    """
    a1 = abs(xi1)
    a2 = abs(xi - xi1)
    if 2 * a1 <= a2 and 2 * a1 <= N:
        return "i"
    if 2 * a2 <= a1 and 2 * a2 <= N:
        return "ii"
    if 2 * a1 <= a2 and a1 >= 2 * N:
        return "iii"
    if 2 * a2 <= a1 and a2 >= 2 * N:
        return "iv"
    if a1 / 2 < a2 < 2 * a1 and min(a1, a2) >= N:
        return "v"
    return "none"


def regime_bound(regime: str, xi, xi1, N):
    """The size bound attached to each case: N1/N2, N2/N1, N1/N, N2/N, (N1/N)^2."""
    n1 = np.abs(np.asarray(xi1, dtype=float))
    n2 = np.abs(np.asarray(xi, dtype=float) - xi1)
    return {
        "i": lambda: n1 / n2,
        "ii": lambda: n2 / n1,
        "iii": lambda: n1 / N,
        "iv": lambda: n2 / N,
        "v": lambda: (n1 / N) ** 2,
    }[regime]()


def sample_regime(regime: str, N: float, size: int, rng: np.random.Generator,
                  max_ratio: float = 64.0):
    """Random ``(xi, xi1)`` inside one case, magnitudes log-uniform in units of ``N``.

    Sampling in units of ``N`` makes the statistics comparable across
    dyadic levels; random signs cover both ``xi1 xi2 > 0`` and ``< 0``.
    """
    def logu(lo, hi, k):
        return np.exp(rng.uniform(np.log(lo), np.log(hi), k))

    out1 = np.empty(0)
    out2 = np.empty(0)
    while out1.size < size:
        k = 2 * size
        if regime in ("i", "ii"):
            small = logu(1e-3, 0.5, k) * N
            big = small * logu(2.0, max_ratio / 1e-3, k)
            keep = big <= max_ratio * N
            small, big = small[keep], big[keep]
        elif regime in ("iii", "iv"):
            small = logu(2.0, max_ratio / 2, k) * N
            big = small * logu(2.0, max_ratio, k)
        else:
            small = logu(1.0, max_ratio, k) * N
            big = small * logu(1.0, 2.0, k)
            keep = big < 2 * small
            small, big = small[keep], big[keep]
        a1, a2 = (small, big) if regime in ("i", "iii", "v") else (big, small)
        if regime == "v":
            swap = rng.random(a1.size) < 0.5
            a1, a2 = np.where(swap, a2, a1), np.where(swap, a1, a2)
        s1 = rng.choice([-1.0, 1.0], a1.size)
        s2 = rng.choice([-1.0, 1.0], a2.size)
        out1 = np.concatenate([out1, s1 * a1])
        out2 = np.concatenate([out2, s2 * a2])
    xi1 = out1[:size]
    xi2 = out2[:size]
    return xi1 + xi2, xi1


@dataclass
class DerivativeResidual:
    """Central-difference ``dE/dt`` against the commutator formula."""

    absolute: float
    relative: float
    rate_scale: float
    times: np.ndarray = field(repr=False, default=None)
    finite_difference: np.ndarray = field(repr=False, default=None)
    formula: np.ndarray = field(repr=False, default=None)


def _modified_energy_raw(grid, params, m, ur, vr):
    f = grid.norm_factor ** 2
    return (np.sum(np.abs(m * ur) ** 2, axis=-1)
            + params.mass_weight * np.sum(np.abs(m * vr) ** 2, axis=-1)) * f


def energy_rate_raw(grid, params: ModelParams, m, ur, vr):
    """Commutator expression for ``dE(Iu, Iv)/dt`` at the given raw states."""
    f = grid.norm_factor ** 2
    c1 = _commutator_n1_raw(ur, vr, m)
    c2 = _commutator_n2_raw(ur, m)
    t1 = np.sum(c1 * np.conj(m * ur), axis=-1) * f
    t2 = np.sum(c2 * np.conj(m * vr), axis=-1) * f
    return -2.0 * params.n1_coefficient * (np.imag(t1) + np.imag(t2))


def energy_derivative_check(trajectory: Trajectory, sigma: float, im: IMultiplier) -> DerivativeResidual:
    if len(trajectory) < 3:
        raise ValueError("trajectory too short for a central difference")
    if trajectory.config.record_every != 1:
        raise ValueError("energy_derivative_check needs record_every == 1")
    params = trajectory.params
    if not math.isclose(sigma, params.sigma):
        raise ValueError("sigma does not match the trajectory's parameters")
    grid = trajectory.grid
    m = _m_on_grid(grid, im)
    E = _modified_energy_raw(grid, params, m, trajectory.u_raw, trajectory.v_raw)
    t = trajectory.times
    fd = (E[2:] - E[:-2]) / (t[2:] - t[:-2])
    rate = energy_rate_raw(grid, params, m, trajectory.u_raw[1:-1], trajectory.v_raw[1:-1])
    err = float(np.max(np.abs(fd - rate)))
    scale = float(np.max(np.abs(rate)))
    rel = err / scale if scale > 0 else (0.0 if err == 0 else math.inf)
    return DerivativeResidual(err, rel, scale, t[1:-1], fd, rate)


def default_delta(N: float, s: float, prefactor: float = 1.0) -> float:
    """Local time step ``min(1, c N^(-4s/3))``."""
    return float(min(1.0, prefactor * N ** (-4.0 * s / 3.0)))


@dataclass
class IncrementReport:
    N_values: List[float]
    increments: List[float]
    fitted_exponent: float
    delta_used: List[float]
    s: float = 0.0
    sigma: float = 1.0
    excluded: List[float] = field(default_factory=list)
    roundoff_floor: float = 0.0
    blown_up: List[float] = field(default_factory=list)

    def rows(self):
        return [[n, d, inc] for n, d, inc in zip(self.N_values, self.delta_used, self.increments)]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def increment_experiment(base_data: FieldPair, sigma: float, s: float,
                         N_values: Sequence[float], params: Optional[ModelParams] = None,
                         dt: float = 1e-3, scheme: str = "ifrk4",
                         delta_prefactor: float = 1.0) -> IncrementReport:
    """``|E(Iu,Iv)(delta) - E(Iu,Iv)(0)|`` for each ``N`` and its power-law fit in ``N``.

    A single run covers the largest ``delta``; each ``N`` reads its own
    ``delta(N)`` from it (``delta`` is rounded to the recording mesh).
    Increments below ``1e3`` times the round-off level of ``E`` are
    excluded from the fit and listed in ``excluded``.
    """
    Ns = [float(n) for n in N_values]
    if len(Ns) < 4:
        raise ValueError("need at least 4 values of N")
    if max(Ns) / min(Ns) < 4 * (1 - 1e-12):
        raise ValueError("N values must span at least two dyadic levels")
    if s > 0:
        raise ValueError("s must be <= 0")
    if params is None:
        params = ModelParams(sigma=sigma, n2_coefficient=0.5)
    elif not math.isclose(params.sigma, sigma):
        raise ValueError("sigma does not match params")
    deltas = [default_delta(n, s, delta_prefactor) for n in Ns]
    t_end = max(deltas)
    traj = run(base_data, params, EvolveConfig(dt=min(dt, t_end / 2), t_end=t_end, scheme=scheme,
                                               record_every=1))
    grid = base_data.grid
    increments, blown = [], []
    E0max = 0.0
    for n, d in zip(Ns, deltas):
        k = int(np.argmin(np.abs(traj.times - d)))
        if traj.blown_up and traj.times[-1] <= d:
            blown.append(n)
            increments.append(float("nan"))
            continue
        m = _m_on_grid(grid, IMultiplier(n, s))
        E = _modified_energy_raw(grid, params, m, traj.u_raw[[0, k]], traj.v_raw[[0, k]])
        E0max = max(E0max, float(abs(E[0])))
        increments.append(float(abs(E[1] - E[0])))
    floor = 1e3 * np.finfo(float).eps * E0max
    fit_idx = [i for i, inc in enumerate(increments) if math.isfinite(inc) and inc > floor]
    excluded = [Ns[i] for i, inc in enumerate(increments) if math.isfinite(inc) and inc <= floor]
    exponent = (loglog_slope([Ns[i] for i in fit_idx], [increments[i] for i in fit_idx])
                if len(fit_idx) >= 4 else float("nan"))
    return IncrementReport(Ns, increments, exponent, deltas, s, sigma, excluded, floor, blown)
