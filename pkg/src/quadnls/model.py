"""Parameters, couplings and conserved functionals of the coupled system

    i u_t + p u_xx - theta u + c1 conj(u) v = 0
    i sigma v_t + q v_xx - alpha v + c2 u^2 = 0

with ``c1 = n1_coefficient`` (1 in the physical model) and
``c2 = n2_coefficient`` (``a/2 = 1/(2 sigma)`` by default, ``1/2`` in the
form used for the global theory).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .spectral import (ComplexField, SpectralGrid, _check_same_grid,
                       dealiased_product, from_padded, to_padded)


@dataclass(frozen=True)
class ModelParams:
    p: int = 1
    q: int = 1
    sigma: float = 1.0
    theta: float = 0.0
    alpha: float = 0.0
    n2_coefficient: Optional[float] = None
    n1_coefficient: float = 1.0

    def __post_init__(self):
        if self.p not in (1, -1) or self.q not in (1, -1):
            raise ValueError(f"p and q must be +1 or -1, got p={self.p}, q={self.q}")
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.n2_coefficient is None:
            object.__setattr__(self, "n2_coefficient", 0.5 * self.a)
        object.__setattr__(self, "n2_coefficient", float(self.n2_coefficient))

    @property
    def a(self) -> float:
        return 1.0 / self.sigma

    @property
    def mass_weight(self) -> float:
        """Weight ``w`` such that ``|u|^2 + w |v|^2`` is conserved by the flow.

        Equals ``2 sigma`` for ``n2_coefficient == n1_coefficient / 2``.
        """
        c1, c2 = self.n1_coefficient, self.n2_coefficient
        if c1 == 0 or c2 == 0:
            return 2.0 * self.sigma
        return self.sigma * c1 / c2

    @property
    def hamiltonian_v_weight(self) -> float:
        c1, c2 = self.n1_coefficient, self.n2_coefficient
        if c1 == 0 or c2 == 0:
            return 1.0
        return c1 / (2.0 * c2)

    def replace(self, **changes) -> "ModelParams":
        d = dict(p=self.p, q=self.q, sigma=self.sigma, theta=self.theta, alpha=self.alpha,
                 n2_coefficient=self.n2_coefficient, n1_coefficient=self.n1_coefficient)
        if "sigma" in changes and "n2_coefficient" not in changes:
            raise ValueError("changing sigma requires an explicit n2_coefficient")
        d.update(changes)
        return ModelParams(**d)


@dataclass(frozen=True)
class SobolevPair:
    kappa: float
    s: float

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and np.isfinite(self.s)):
            raise ValueError("Sobolev indices must be finite")


@dataclass(frozen=True)
class FieldPair:
    u: ComplexField
    v: ComplexField

    def __post_init__(self):
        _check_same_grid(self.u.grid, self.v.grid)

    @property
    def grid(self) -> SpectralGrid:
        return self.u.grid

    @classmethod
    def from_raw(cls, grid: SpectralGrid, u_raw, v_raw, blown_up: bool = False) -> "FieldPair":
        return cls(ComplexField(grid, np.fft.ifft(u_raw), blown_up),
                   ComplexField(grid, np.fft.ifft(v_raw), blown_up))

    @classmethod
    def zeros(cls, grid: SpectralGrid) -> "FieldPair":
        z = np.zeros(grid.num_points, dtype=complex)
        return cls(ComplexField(grid, z), ComplexField(grid, z))

    def raw(self):
        return self.u.raw(), self.v.raw()

    def shift(self, k: int) -> "FieldPair":
        return FieldPair(self.u.shift(k), self.v.shift(k))

    def l2_distance(self, other: "FieldPair") -> float:
        """``||u - u'||_{L2} + ||v - v'||_{L2}``."""
        dx = self.grid.dx
        du = np.sum(np.abs(self.u.samples - other.u.samples) ** 2) * dx
        dv = np.sum(np.abs(self.v.samples - other.v.samples) ** 2) * dx
        return float(np.sqrt(du) + np.sqrt(dv))


# -- well-posedness region ---------------------------------------------------

def region_contains(sigma: float, pair: SobolevPair) -> bool:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    k, s = pair.kappa, pair.s
    if sigma < 2:
        return abs(k) - 0.5 <= s < min(k + 0.5, 2 * k + 0.5)
    if sigma == 2:
        return k == s and s >= 0
    return abs(k) - 1 <= s < min(k + 1, 2 * k + 1)


def region_sample(sigma: float, kappa_range, s_range, resolution: int):
    """Membership flags on a uniform ``resolution x resolution`` grid.

    Returns a list of ``(kappa, s, in_region)`` tuples, kappa-major.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    kappas = np.linspace(kappa_range[0], kappa_range[1], resolution)
    ss = np.linspace(s_range[0], s_range[1], resolution)
    return [(float(k), float(s), region_contains(sigma, SobolevPair(float(k), float(s))))
            for k, s in itertools.product(kappas, ss)]


# -- nonlinearity --------------------------------------------------------------

def nonlinear_rhs_raw(u_raw: np.ndarray, v_raw: np.ndarray, params: ModelParams):
    """Raw coefficients of the nonlinear parts of ``(u_t, v_t)``.

    Works on the last axis, so stacks of states are handled in one call.
    """
    n = u_raw.shape[-1]
    up = to_padded(u_raw)
    vp = to_padded(v_raw)
    nu = from_padded(np.conj(up) * vp, (n,))
    nv = from_padded(up * up, (n,))
    return (1j * params.n1_coefficient) * nu, (1j * params.n2_coefficient / params.sigma) * nv


def nonlinear_rhs(state: FieldPair, params: ModelParams) -> FieldPair:
    nu, nv = nonlinear_rhs_raw(state.u.raw(), state.v.raw(), params)
    return FieldPair.from_raw(state.grid, nu, nv)


# -- conserved quantities ----------------------------------------------------

def _sq_norm(raw: np.ndarray, grid: SpectralGrid) -> float:
    return float(np.sum(np.abs(raw) ** 2) * grid.norm_factor ** 2)


def mass(state: FieldPair, sigma: float) -> float:
    """``int |u|^2 + 2 sigma |v|^2 dx``."""
    dx = state.grid.dx
    return float(np.sum(np.abs(state.u.samples) ** 2 + 2 * sigma * np.abs(state.v.samples) ** 2) * dx)


def conserved_mass(state: FieldPair, params: ModelParams) -> float:
    """Mass with the weight that the flow actually conserves (see ``mass_weight``)."""
    dx = state.grid.dx
    w = params.mass_weight
    return float(np.sum(np.abs(state.u.samples) ** 2 + w * np.abs(state.v.samples) ** 2) * dx)


def hamiltonian(state: FieldPair, params: ModelParams) -> float:
    """``p|u_x|^2 + theta|u|^2 + beta(q|v_x|^2 + alpha|v|^2) - Re int u^2 conj(v)``.

    ``beta = n1/(2 n2)`` is 1 for the ``n2 = 1/2`` form of the system, where
    this is exactly the textbook Hamiltonian; other choices of ``n2`` need it
    for conservation.
    """
    grid = state.grid
    xi2 = grid.frequencies ** 2
    ur, vr = state.raw()
    f = grid.norm_factor ** 2
    ux2 = float(np.sum(xi2 * np.abs(ur) ** 2) * f)
    vx2 = float(np.sum(xi2 * np.abs(vr) ** 2) * f)
    u2 = _sq_norm(ur, grid)
    v2 = _sq_norm(vr, grid)
    # dealiased u^2 keeps H an exact invariant of the truncated (Galerkin) flow
    u_sq = dealiased_product(ur, ur)
    coupling = params.n1_coefficient * float(np.real(np.sum(u_sq * np.conj(vr))) * f)
    beta = params.hamiltonian_v_weight
    return (params.p * ux2 + params.theta * u2
            + beta * (params.q * vx2 + params.alpha * v2) - coupling)


# -- resonance functions -----------------------------------------------------

def resonance_n1(xi1, xi2, a):
    """``xi^2 + xi1^2 - a xi2^2`` with ``xi = xi1 + xi2``."""
    xi = xi1 + xi2
    return xi * xi + xi1 * xi1 - a * xi2 * xi2


def resonance_n2(xi1, xi2, a):
    """``a xi^2 - xi1^2 - xi2^2`` with ``xi = xi1 + xi2``."""
    xi = xi1 + xi2
    return a * xi * xi - xi1 * xi1 - xi2 * xi2


def resonance_lines(a: float):
    """Slopes ``(mu_a, 1 - mu_a)`` of the lines where ``2xi^2 - 2xi xi2 + (1-a)xi2^2`` vanishes."""
    if a < 0.5:
        raise ValueError(f"resonance lines are complex for a < 1/2 (a={a})")
    mu = (1.0 - np.sqrt(2.0 * a - 1.0)) / 2.0
    return float(mu), float(1.0 - mu)


# -- exact solutions -----------------------------------------------------------

def stationary_wave(grid: SpectralGrid, params: ModelParams, k: float) -> FieldPair:
    """Time-independent plane-wave pair ``u = A e^{ikx}``, ``v = B e^{2ikx}``.

    Balancing each equation gives ``B = (p k^2 + theta)/n1`` and
    ``A^2 = (4 q k^2 + alpha) B / n2``; for ``p = q = 1``, ``n1 = 1``,
    ``n2 = 1/2`` and ``k = 1`` this is ``(2 sqrt 2 e^{ix}, e^{2ix})``.
    ``k`` must be a lattice frequency of ``grid``.
    """
    j = k / grid.dxi
    if abs(j - round(j)) > 1e-9 or abs(2 * k) >= grid.frequencies.max():
        raise ValueError(f"k={k} is not a resolved lattice frequency of {grid}")
    c1, c2 = params.n1_coefficient, params.n2_coefficient
    if c1 == 0 or c2 == 0:
        raise ValueError("a stationary wave needs both couplings switched on")
    B = (params.p * k * k + params.theta) / c1
    A2 = (4 * params.q * k * k + params.alpha) * B / c2
    if A2 < 0:
        raise ValueError("no real stationary wave for these parameters")
    x = grid.x
    return FieldPair(ComplexField(grid, np.sqrt(A2) * np.exp(1j * k * x)),
                     ComplexField(grid, B * np.exp(2j * k * x)))
