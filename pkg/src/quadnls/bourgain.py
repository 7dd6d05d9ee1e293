"""Discrete space-time Bourgain norms and bilinear-estimate probes.

Space-time fields live on a periodic ``time_length x box_length`` torus,
stored time-major (axis 0 is time, axis 1 is space). Both axes use the
same FFT sign convention, so the free wave ``exp(i(x xi - t phi))`` sits at
``(xi, tau) = (xi, -phi)`` and the dispersive weight is
``<tau + c xi^2>``: ``c = p`` for the first equation, ``c = q/sigma`` for
the second.

The probe draws random fields and records the ratios of the two sides of
the bilinear estimates on successively finer grids. It is exploratory: a
bounded ratio on finite grids is evidence, not proof, and growth outside
the well-posedness region is reported, never asserted.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from .spectral import SpectralGrid, dealiased_product, japanese_bracket, make_grid


@dataclass(frozen=True, eq=False)
class SpaceTimeGrid:
    space: SpectralGrid
    time_length: float
    num_times: int
    tau_frequencies: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        T, nt = self.time_length, self.num_times
        if not np.isfinite(T) or T <= 0:
            raise ValueError(f"time_length must be positive, got {T}")
        if int(nt) != nt or nt % 2 or nt < 4:
            raise ValueError(f"num_times must be an even integer >= 4, got {nt}")
        object.__setattr__(self, "num_times", int(nt))
        object.__setattr__(self, "time_length", float(T))
        tau = 2 * np.pi * np.fft.fftfreq(int(nt), d=T / nt)
        tau.setflags(write=False)
        object.__setattr__(self, "tau_frequencies", tau)

    def __eq__(self, other):
        if not isinstance(other, SpaceTimeGrid):
            return NotImplemented
        return (self.space, self.time_length, self.num_times) == (
            other.space, other.time_length, other.num_times)

    def __hash__(self):
        return hash((self.space, self.time_length, self.num_times))

    @property
    def shape(self):
        return (self.num_times, self.space.num_points)

    @property
    def dt(self) -> float:
        return self.time_length / self.num_times

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.num_times)

    @property
    def norm_factor(self) -> float:
        """Scale turning 2-D raw FFT coefficients into Plancherel-normalised ones."""
        return math.sqrt(self.space.box_length * self.time_length) / (
            self.space.num_points * self.num_times)


def make_spacetime_grid(box_length: float, num_points: int, time_length: float,
                        num_times: int) -> SpaceTimeGrid:
    return SpaceTimeGrid(make_grid(box_length, num_points), time_length, num_times)


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    grid: SpaceTimeGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128)
        if s.shape != self.grid.shape:
            raise ValueError(f"expected samples of shape {self.grid.shape}, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field contains non-finite samples")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid: SpaceTimeGrid, func) -> "SpaceTimeField":
        """Samples ``func(x, t)`` on the mesh (``t`` varies along axis 0)."""
        X, Tm = np.meshgrid(grid.space.x, grid.t)
        return cls(grid, func(X, Tm))

    @classmethod
    def from_raw(cls, grid: SpaceTimeGrid, raw: np.ndarray) -> "SpaceTimeField":
        return cls(grid, np.fft.ifft2(raw))

    def raw(self) -> np.ndarray:
        return np.fft.fft2(self.samples)

    def conj(self) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, np.conj(self.samples))

    def shift(self, dt_steps: int, dx_steps: int) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, np.roll(self.samples, (dt_steps, dx_steps), axis=(0, 1)))

    def __mul__(self, scalar) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.samples * scalar)

    __rmul__ = __mul__


def _xsb_weight(grid: SpaceTimeGrid, s: float, b: float, c: float) -> np.ndarray:
    xi = grid.space.frequencies[None, :]
    tau = grid.tau_frequencies[:, None]
    return japanese_bracket(xi) ** s * japanese_bracket(tau + c * xi * xi) ** b


def _xsb_raw(grid: SpaceTimeGrid, raw: np.ndarray, s: float, b: float, c: float) -> float:
    w = _xsb_weight(grid, s, b, c)
    return float(np.sqrt(np.sum(np.abs(w * raw) ** 2)) * grid.norm_factor)


def xsb_norm(w: SpaceTimeField, s: float, b: float, phase_coefficient: float) -> float:
    """``|| <xi>^s <tau + c xi^2>^b w_hat ||`` on the discrete torus."""
    return _xsb_raw(w.grid, w.raw(), s, b, phase_coefficient)


def spacetime_l2(w: SpaceTimeField) -> float:
    """Quadrature ``sqrt(sum |w|^2 dx dt)``."""
    g = w.grid
    return float(np.sqrt(np.sum(np.abs(w.samples) ** 2) * g.space.dx * g.dt))


def _check_grids(*fields: SpaceTimeField):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("space-time grid mismatch")


def _ratio(num_raw, grid, num_norm, den):
    if den == 0:
        raise ValueError("bilinear ratio undefined for a zero input field")
    return _xsb_raw(grid, num_raw, *num_norm) / den


def bilinear_ratio_n1(u: SpaceTimeField, v: SpaceTimeField, kappa: float, s: float,
                      b: float, d: float, a: float) -> float:
    """``||conj(u) v||_{X^{kappa,-d}} / (||u||_{X^{kappa,b}} ||v||_{X_a^{s,b}})``."""
    _check_grids(u, v)
    ur, vr = u.raw(), v.raw()
    nu = _xsb_raw(u.grid, ur, kappa, b, 1.0)
    nv = _xsb_raw(u.grid, vr, s, b, a)
    if nu == 0:
        raise ValueError("bilinear ratio undefined for a zero input field")
    if nv == 0:
        return 0.0
    prod = dealiased_product(ur, vr, conj_a=True, axes=(0, 1))
    return _ratio(prod, u.grid, (kappa, -d, 1.0), nu * nv)


def bilinear_ratio_n2(u: SpaceTimeField, w: SpaceTimeField, kappa: float, s: float,
                      b: float, d: float, a: float) -> float:
    """``||u w||_{X_a^{s,-d}} / (||u||_{X^{kappa,b}} ||w||_{X^{kappa,b}})``."""
    _check_grids(u, w)
    ur, wr = u.raw(), w.raw()
    nu = _xsb_raw(u.grid, ur, kappa, b, 1.0)
    nw = _xsb_raw(u.grid, wr, kappa, b, 1.0)
    if nu == 0 and nw == 0:
        raise ValueError("bilinear ratio undefined for zero input fields")
    if nu == 0 or nw == 0:
        return 0.0
    prod = dealiased_product(ur, wr, axes=(0, 1))
    return _ratio(prod, u.grid, (s, -d, a), nu * nw)


# -- randomized probe --------------------------------------------------------

PROBE_BOX = 2 * np.pi
PROBE_TIME = 2 * np.pi
SCALE_FRACTIONS = (0.125, 0.25, 0.5)
GROWTH_LIMIT = 2.0


def random_spacetime_field(grid: SpaceTimeGrid, scale: float,
                           rng: np.random.Generator) -> SpaceTimeField:
    """Complex Gaussian spectrum with envelope ``exp(-(xi^2 + tau^2)/scale^2)``.

    Nyquist rows and columns are left empty so conjugation acts cleanly.
    """
    xi = grid.space.frequencies[None, :]
    tau = grid.tau_frequencies[:, None]
    env = np.exp(-(xi ** 2 + tau ** 2) / scale ** 2)
    shape = grid.shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    raw = c * env
    raw[grid.num_times // 2, :] = 0.0
    raw[:, grid.space.num_points // 2] = 0.0
    return SpaceTimeField.from_raw(grid, raw * grid.space.num_points * grid.num_times)


@dataclass
class ProbeResult:
    sigma: float
    kappa: float
    s: float
    b: float
    d: float
    ensemble_size: int
    seed: int
    resolutions: List[int]
    stats: Dict[str, Dict[str, List[float]]]
    growth: Dict[str, List[float]]
    growth_flags: Dict[str, bool]

    @property
    def growth_flag(self) -> bool:
        return any(self.growth_flags.values())

    def rows(self):
        """CSV rows ``resolution, ratio_max, ratio_median, estimate``."""
        out = []
        for est in ("n1", "n2"):
            st = self.stats[est]
            for r, mx, md in zip(self.resolutions, st["max"], st["median"]):
                out.append([r, mx, md, est])
        return out

    def to_json(self) -> str:
        d = asdict(self)
        d["growth_flag"] = self.growth_flag
        return json.dumps(d, sort_keys=True, indent=2)


def probe(sigma: float, kappa: float, s: float, b: float, d: float,
          ensemble_size: int = 16, resolutions: Sequence[int] = (16, 32, 64),
          seed: int = 0) -> ProbeResult:
    """Max and median of both bilinear ratios over a random ensemble, per resolution.

    A resolution ``n`` means an ``n x n`` space-time grid on a
    ``2 pi x 2 pi`` torus (integer frequencies on both axes). Every member
    is drawn at three spectral scales, ``n/2`` times ``SCALE_FRACTIONS``,
    so finer grids probe proportionally higher frequencies. Member ``k`` at
    resolution index ``r`` is seeded by ``(seed, r, k)``. A growth flag is
    raised when the maximum ratio grows by more than ``GROWTH_LIMIT``
    between consecutive resolutions.
    """
    if not 0.5 < b < 0.75:
        raise ValueError(f"b must lie in (1/2, 3/4), got {b}")
    if not 0.25 < d < 0.5:
        raise ValueError(f"d must lie in (1/4, 1/2), got {d}")
    if ensemble_size < 16:
        raise ValueError("ensemble_size must be at least 16")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    resolutions = [int(r) for r in resolutions]
    if len(resolutions) < 1:
        raise ValueError("need at least one resolution")
    a = 1.0 / sigma
    stats = {"n1": {"max": [], "median": []}, "n2": {"max": [], "median": []}}
    for ri, n in enumerate(resolutions):
        grid = make_spacetime_grid(PROBE_BOX, n, PROBE_TIME, n)
        r1, r2 = [], []
        for k in range(ensemble_size):
            rng = np.random.default_rng([seed, ri, k])
            for frac in SCALE_FRACTIONS:
                scale = frac * n / 2
                u, v, w = (random_spacetime_field(grid, scale, rng) for _ in range(3))
                r1.append(bilinear_ratio_n1(u, v, kappa, s, b, d, a))
                r2.append(bilinear_ratio_n2(u, w, kappa, s, b, d, a))
        for key, vals in (("n1", r1), ("n2", r2)):
            stats[key]["max"].append(float(np.max(vals)))
            stats[key]["median"].append(float(np.median(vals)))
    growth = {k: [stats[k]["max"][i + 1] / stats[k]["max"][i] for i in range(len(resolutions) - 1)]
              for k in stats}
    flags = {k: any(g > GROWTH_LIMIT for g in growth[k]) for k in stats}
    return ProbeResult(sigma, kappa, s, b, d, ensemble_size, seed, resolutions, stats, growth, flags)
