"""Picard iteration of the truncated Duhamel formulation.

For data ``(u0, v0)`` and a candidate ``(u, v)`` sampled on ``[0, 2T]`` the map is

    Phi(u, v)(t) = psi_1(t) W(t)(u0, v0) + psi_T(t) int_0^t W(t - t') N(u, v)(t') dt'

where ``W`` is the exact linear group (including the ``theta``/``alpha``
terms) and ``N`` is the dealiased quadratic coupling. Iterate distances use
the sup over mesh times of ``||du||_{L2} + ||dv||_{L2}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson

from .evolve import linear_phases
from .fitting import loglog_slope
from .model import FieldPair, ModelParams, nonlinear_rhs_raw
from .spectral import SpectralGrid

DEFAULT_MESH = 64


@dataclass(frozen=True)
class CutoffSpec:
    T: float = 1.0
    shape: str = "smooth_bump"

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("cutoff scale T must be positive")
        if self.shape != "smooth_bump":
            raise ValueError(f"unknown cutoff shape {self.shape!r}")


def _transition(x):
    """``exp(-1/x)`` for x > 0, else 0 (the C-infinity building block)."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def psi(t):
    """Smooth plateau cutoff: 1 on ``|t| <= 1``, 0 on ``|t| >= 2``.

    ``psi = f(2 - |t|) / (f(2 - |t|) + f(|t| - 1))`` with ``f(x) = exp(-1/x)``;
    the denominator never vanishes, and every derivative of ``psi`` vanishes
    at ``|t| = 1`` and ``|t| = 2``.
    """
    a = np.abs(np.asarray(t, dtype=float))
    up = _transition(2.0 - a)
    down = _transition(a - 1.0)
    return up / (up + down)


def cutoff(t, spec: CutoffSpec):
    """``psi_T(t) = psi(t / T)``."""
    val = psi(np.asarray(t, dtype=float) / spec.T)
    return float(val) if np.ndim(val) == 0 else val


@dataclass
class TimeSampledPair:
    """States ``(u, v)`` as raw coefficient stacks on a uniform time mesh."""

    grid: SpectralGrid
    times: np.ndarray
    u_raw: np.ndarray
    v_raw: np.ndarray

    def state(self, k: int) -> FieldPair:
        return FieldPair.from_raw(self.grid, self.u_raw[k], self.v_raw[k])

    def sup_distance(self, other: "TimeSampledPair", upto: Optional[float] = None) -> float:
        """``max_k ||u_k - u'_k||_{L2} + ||v_k - v'_k||_{L2}`` (optionally ``t_k <= upto``)."""
        f = self.grid.norm_factor ** 2
        du = np.sqrt(np.sum(np.abs(self.u_raw - other.u_raw) ** 2, axis=-1) * f)
        dv = np.sqrt(np.sum(np.abs(self.v_raw - other.v_raw) ** 2, axis=-1) * f)
        d = du + dv
        if upto is not None:
            d = d[self.times <= upto * (1 + 1e-12)]
        return float(np.max(d))


def time_mesh(T: float, intervals: int = DEFAULT_MESH) -> np.ndarray:
    if intervals < 8:
        raise ValueError(f"time mesh too coarse: {intervals} intervals (need >= 8)")
    if intervals % 2:
        raise ValueError("Simpson quadrature needs an even number of intervals")
    return np.linspace(0.0, 2.0 * T, intervals + 1)


def _cumulative_integral(g: np.ndarray, h: float) -> np.ndarray:
    re = cumulative_simpson(g.real, dx=h, axis=0, initial=0.0)
    im = cumulative_simpson(g.imag, dx=h, axis=0, initial=0.0)
    return re + 1j * im


def free_evolution(state0: FieldPair, params: ModelParams, times: np.ndarray,
                   window: bool = True) -> TimeSampledPair:
    """``psi_1(t) W(t)(u0, v0)`` on the mesh (``window=False`` drops ``psi_1``)."""
    pu, pv = linear_phases(state0.grid, params)
    ur, vr = state0.raw()
    t = times[:, None]
    w = psi(times)[:, None] if window else 1.0
    return TimeSampledPair(state0.grid, times,
                           w * np.exp(-1j * t * pu) * ur,
                           w * np.exp(-1j * t * pv) * vr)


def duhamel_map(state0: FieldPair, candidate: TimeSampledPair, params: ModelParams,
                T: float) -> TimeSampledPair:
    times = candidate.times
    if len(times) - 1 < 8:
        raise ValueError(f"time mesh too coarse: {len(times) - 1} intervals (need >= 8)")
    h = times[1] - times[0]
    if not np.allclose(np.diff(times), h, rtol=1e-9, atol=0):
        raise ValueError("candidate must be sampled on a uniform time mesh")
    if times[-1] < 2 * T * (1 - 1e-12):
        raise ValueError("candidate mesh must cover [0, 2T]")
    pu, pv = linear_phases(state0.grid, params)
    t = times[:, None]
    nu, nv = nonlinear_rhs_raw(candidate.u_raw, candidate.v_raw, params)
    # interaction picture: int_0^t W(t-t') N dt' = W(t) int_0^t W(-t') N dt'
    gu = _cumulative_integral(np.exp(1j * t * pu) * nu, h)
    gv = _cumulative_integral(np.exp(1j * t * pv) * nv, h)
    free = free_evolution(state0, params, times)
    wt = psi(times / T)[:, None]
    return TimeSampledPair(state0.grid, times,
                           free.u_raw + wt * np.exp(-1j * t * pu) * gu,
                           free.v_raw + wt * np.exp(-1j * t * pv) * gv)


@dataclass
class PicardReport:
    iterates: int
    successive_distances: List[float]
    contraction_factor: float
    converged: bool
    diverged: bool = False
    T: float = 0.0
    mesh_intervals: int = DEFAULT_MESH
    tolerance: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def contraction_factor(distances: Sequence[float], floor: float = 0.0) -> float:
    """Largest ratio of consecutive distances, ignoring distances at or below ``floor``."""
    ratios = [b / a for a, b in zip(distances[:-1], distances[1:]) if a > floor and b > floor]
    return float(max(ratios)) if ratios else 0.0


def picard_solve(state0: FieldPair, params: ModelParams, T: float, tolerance: float = 1e-12,
                 max_iter: int = 50, mesh_intervals: int = DEFAULT_MESH, seed: str = "linear"):
    """Iterate ``Phi`` from a seed until successive iterates are within ``tolerance``.

    ``seed`` is ``"linear"`` (windowed free evolution) or ``"zero"``.
    Returns ``(solution, report)``. Divergence (three consecutive growing
    distances) ends the iteration and is flagged in the report.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    times = time_mesh(T, mesh_intervals)
    if seed == "linear":
        cand = free_evolution(state0, params, times)
    elif seed == "zero":
        z = np.zeros((len(times), state0.grid.num_points), dtype=complex)
        cand = TimeSampledPair(state0.grid, times, z, z.copy())
    else:
        raise ValueError(f"unknown seed {seed!r}")
    distances: List[float] = []
    converged = diverged = False
    growth = 0
    for _ in range(max_iter):
        new = duhamel_map(state0, cand, params, T)
        d = new.sup_distance(cand)
        distances.append(d)
        cand = new
        if not math.isfinite(d):
            diverged = True
            break
        if d <= tolerance:
            converged = True
            break
        growth = growth + 1 if len(distances) > 1 and d > distances[-2] else 0
        if growth >= 3:
            diverged = True
            break
    scale = max(cand.sup_distance(TimeSampledPair(cand.grid, times, 0 * cand.u_raw, 0 * cand.v_raw)), 1e-300)
    floor = 1e3 * np.finfo(float).eps * scale
    report = PicardReport(len(distances), distances, contraction_factor(distances, floor),
                          converged, diverged, T, mesh_intervals, tolerance)
    return cand, report


def contraction_time_scale(state0: FieldPair, params: ModelParams, mu: float = 1.0,
                           c0: float = 1.0, c1: float = 1.0, c2: float = 1.0) -> float:
    """Existence time from the ball-invariance condition, capped at 1.

    ``T^mu <= 1/2 min{1/(c1(theta + M2)), M2/(c2(alpha M2 + c M1^2))}`` with
    ``M1 = 2 c0 ||u0||``, ``M2 = 2 c0 ||v0||`` (L2 norms) and ``c`` the
    effective coefficient of ``u^2`` in the ``v`` equation. The unknown
    constants default to 1.
    """
    zero = FieldPair.zeros(state0.grid)
    m1 = 2 * c0 * FieldPair(state0.u, zero.v).l2_distance(zero)
    m2 = 2 * c0 * FieldPair(zero.u, state0.v).l2_distance(zero)
    c = abs(params.n2_coefficient) / params.sigma
    terms = []
    if abs(params.theta) + m2 > 0:
        terms.append(1.0 / (c1 * (abs(params.theta) + m2)))
    if m2 > 0 and abs(params.alpha) * m2 + c * m1 ** 2 > 0:
        terms.append(m2 / (c2 * (abs(params.alpha) * m2 + c * m1 ** 2)))
    if not terms:
        return 1.0
    bound = 0.5 * min(terms)
    return float(min(1.0, bound ** (1.0 / mu)))


def measured_contraction(state0: FieldPair, params: ModelParams, T: float,
                         iterations: int = 6, mesh_intervals: int = DEFAULT_MESH) -> float:
    """Contraction factor of the first few Picard iterates at existence time ``T``."""
    _, rep = picard_solve(state0, params, T, tolerance=1e-14, max_iter=iterations,
                          mesh_intervals=mesh_intervals)
    if rep.diverged:
        return max(rep.contraction_factor, 1.0)
    return rep.contraction_factor


def max_contraction_time(state0: FieldPair, params: ModelParams, threshold: float = 0.5,
                         T_start: float = 0.05, T_cap: float = 1.0, rel_tol: float = 1e-3,
                         iterations: int = 6, mesh_intervals: int = DEFAULT_MESH):
    """Largest ``T <= T_cap`` with measured contraction factor ``<= threshold``.

    Geometric bracketing followed by bisection in ``log T``. Returns
    ``(T_max, factor_at_T_max)``; ``T_max`` is NaN when no admissible ``T``
    is found above ``1e-8``.
    """
    def factor(T):
        return measured_contraction(state0, params, T, iterations, mesh_intervals)

    lo, hi = None, None
    T = min(T_start, T_cap)
    f = factor(T)
    if f <= threshold:
        lo = T
        while hi is None:
            if T >= T_cap:
                return T_cap, factor(T_cap)
            T = min(2 * T, T_cap)
            if factor(T) <= threshold:
                lo = T
            else:
                hi = T
    else:
        hi = T
        while lo is None:
            T = T / 2
            if T < 1e-8:
                return float("nan"), f
            if factor(T) <= threshold:
                lo = T
            else:
                hi = T
    while hi / lo > 1 + rel_tol:
        mid = math.sqrt(lo * hi)
        if factor(mid) <= threshold:
            lo = mid
        else:
            hi = mid
    return lo, factor(lo)


@dataclass
class ScalingResult:
    amplitudes: List[float]
    norms: List[float]
    T_max: List[float]
    contraction_factors: List[float]
    slope: float
    failures: List[float] = field(default_factory=list)

    def rows(self):
        return [[a, n, t, c] for a, n, t, c in
                zip(self.amplitudes, self.norms, self.T_max, self.contraction_factors)]


def existence_time_scaling(amplitudes: Sequence[float], params: ModelParams,
                           base_data: FieldPair, **kwargs) -> ScalingResult:
    """Fit ``log T_max`` against ``log(||u0|| + ||v0||)`` over scaled copies of ``base_data``.

    Extra keyword arguments go to :func:`max_contraction_time`.
    """
    amps = [float(a) for a in amplitudes]
    if len(amps) < 4:
        raise ValueError("need at least 4 amplitudes")
    if max(amps) / min(amps) < 10 * (1 - 1e-12):
        raise ValueError("amplitudes must span at least one decade")
    zero = FieldPair.zeros(base_data.grid)
    norms, tmax, facs, failures = [], [], [], []
    for a in amps:
        data = FieldPair(base_data.u * a, base_data.v * a)
        norms.append(data.l2_distance(zero))
        t, f = max_contraction_time(data, params, **kwargs)
        if not math.isfinite(t):
            failures.append(a)
        tmax.append(t)
        facs.append(f)
    ok = [i for i, t in enumerate(tmax) if math.isfinite(t)]
    slope = loglog_slope([norms[i] for i in ok], [tmax[i] for i in ok]) if len(ok) >= 2 else float("nan")
    return ScalingResult(amps, norms, tmax, facs, slope, failures)
