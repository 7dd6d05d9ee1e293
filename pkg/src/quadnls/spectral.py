"""Periodic grids, discrete Fourier transforms and Sobolev norms.

Every module in the package shares the conventions fixed here:

* the lattice of a box of length ``L`` sampled at ``n`` points is
  ``xi_j = 2*pi*j/L`` for ``j`` in ``[-n/2, n/2)``, stored in the usual
  FFT ("wrapped") order;
* "raw" coefficients are the output of :func:`numpy.fft.fft`; the
  continuum-normalised transform is ``raw * sqrt(L)/n`` which makes
  ``sum |u_hat|^2 == sum |u(x_k)|^2 dx`` (discrete Plancherel);
* quadratic products are dealiased by zero padding to ``3n/2`` points,
  which reproduces the exact (non-wrapped) lattice convolution
  restricted to the original ``n`` modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

Symbol = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, float, complex]


def _signed_indices(n: int) -> np.ndarray:
    j = np.arange(n)
    return np.where(j < n // 2, j, j - n)


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Uniform periodic sampling of ``[-L/2, L/2)`` with its frequency lattice."""

    box_length: float
    num_points: int
    dx: float = field(init=False)
    dxi: float = field(init=False)
    frequencies: np.ndarray = field(init=False, repr=False)
    x: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        L, n = self.box_length, self.num_points
        if not np.isfinite(L) or L <= 0:
            raise ValueError(f"box_length must be positive, got {L}")
        if int(n) != n or n % 2 or n < 4:
            raise ValueError(f"num_points must be an even integer >= 4, got {n}")
        n = int(n)
        object.__setattr__(self, "num_points", n)
        object.__setattr__(self, "box_length", float(L))
        object.__setattr__(self, "dx", L / n)
        object.__setattr__(self, "dxi", 2 * np.pi / L)
        xi = self.dxi * _signed_indices(n)
        xi.setflags(write=False)
        object.__setattr__(self, "frequencies", xi)
        x = -L / 2 + self.dx * np.arange(n)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def __eq__(self, other):
        if not isinstance(other, SpectralGrid):
            return NotImplemented
        return (self.box_length, self.num_points) == (other.box_length, other.num_points)

    def __hash__(self):
        return hash((self.box_length, self.num_points))

    @property
    def norm_factor(self) -> float:
        """Scale turning raw FFT coefficients into Plancherel-normalised ones."""
        return np.sqrt(self.box_length) / self.num_points

    @property
    def nyquist_index(self) -> int:
        return self.num_points // 2


def make_grid(box_length: float, num_points: int) -> SpectralGrid:
    return SpectralGrid(box_length, num_points)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Physical-space samples of a complex function on a :class:`SpectralGrid`.

    ``blown_up=True`` marks a field that is allowed to carry NaN/Inf values
    (the tail of a diverged run); all other fields must be finite.
    """

    grid: SpectralGrid
    samples: np.ndarray
    blown_up: bool = False

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128)
        if s.shape != (self.grid.num_points,):
            raise ValueError(
                f"expected {self.grid.num_points} samples, got shape {s.shape}")
        if not self.blown_up and not np.all(np.isfinite(s)):
            raise ValueError("field contains non-finite samples")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid: SpectralGrid, func: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, func(grid.x))

    @classmethod
    def from_raw(cls, grid: SpectralGrid, raw: np.ndarray) -> "ComplexField":
        return cls(grid, np.fft.ifft(raw))

    def raw(self) -> np.ndarray:
        """Unnormalised FFT coefficients (numpy order)."""
        return np.fft.fft(self.samples)

    def hat(self) -> np.ndarray:
        """Plancherel-normalised Fourier coefficients (numpy order)."""
        return self.raw() * self.grid.norm_factor

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, np.conj(self.samples), self.blown_up)

    def shift(self, k: int) -> "ComplexField":
        return ComplexField(self.grid, np.roll(self.samples, k), self.blown_up)

    def __add__(self, other: "ComplexField") -> "ComplexField":
        _check_same_grid(self.grid, other.grid)
        return ComplexField(self.grid, self.samples + other.samples)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        _check_same_grid(self.grid, other.grid)
        return ComplexField(self.grid, self.samples - other.samples)

    def __mul__(self, scalar) -> "ComplexField":
        return ComplexField(self.grid, self.samples * scalar)

    __rmul__ = __mul__


def _check_same_grid(a: SpectralGrid, b: SpectralGrid):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def japanese_bracket(xi):
    """``<xi> = sqrt(1 + xi^2)``; works elementwise on arrays."""
    return np.sqrt(1.0 + np.square(xi))


def _evaluate_symbol(symbol: Symbol, xi: np.ndarray) -> np.ndarray:
    values = symbol(xi) if callable(symbol) else symbol
    values = np.broadcast_to(np.asarray(values), xi.shape)
    if not np.all(np.isfinite(values)):
        bad = xi[~np.isfinite(values)]
        raise ValueError(f"symbol is not finite at frequencies {bad[:5]}")
    return values


def apply_symbol(field: ComplexField, symbol: Symbol) -> ComplexField:
    """Fourier multiplier: ``ifft(symbol(xi) * fft(field))``."""
    values = _evaluate_symbol(symbol, field.grid.frequencies)
    return ComplexField(field.grid, np.fft.ifft(values * field.raw()))


def sobolev_norm(field: ComplexField, s: float) -> float:
    weights = japanese_bracket(field.grid.frequencies) ** (2 * s)
    return float(np.sqrt(np.sum(weights * np.abs(field.hat()) ** 2)))


def l2_norm(field: ComplexField) -> float:
    """Physical-space quadrature ``sqrt(sum |u|^2 dx)``."""
    return float(np.sqrt(np.sum(np.abs(field.samples) ** 2) * field.grid.dx))


# -- dealiased products ------------------------------------------------------

def padded_size(n: int) -> int:
    """Smallest transform length for alias-free quadratic products."""
    return 3 * n // 2


def _pad_index(n: int, m: int) -> np.ndarray:
    return _signed_indices(n) % m


def to_padded(raw: np.ndarray, axes: Sequence[int] = (-1,)) -> np.ndarray:
    """Physical samples on the ``3n/2`` grid(s) of band-limited raw coefficients."""
    out = raw
    for ax in axes:
        n = out.shape[ax]
        m = padded_size(n)
        shape = list(out.shape)
        shape[ax] = m
        padded = np.zeros(shape, dtype=np.complex128)
        idx = [slice(None)] * out.ndim
        idx[ax] = _pad_index(n, m)
        padded[tuple(idx)] = out
        out = np.fft.ifft(padded, axis=ax) * (m / n)
    return out


def from_padded(samples: np.ndarray, shape: Sequence[int], axes: Sequence[int] = (-1,)) -> np.ndarray:
    """Raw coefficients on the original lattice of samples living on padded grid(s)."""
    out = samples
    for ax, n in zip(axes, shape):
        m = out.shape[ax]
        coeffs = np.fft.fft(out, axis=ax)
        idx = [slice(None)] * out.ndim
        idx[ax] = _pad_index(n, m)
        out = coeffs[tuple(idx)] * (n / m)
    return out


def dealiased_product(a_raw: np.ndarray, b_raw: np.ndarray, conj_a: bool = False,
                      axes: Sequence[int] = (-1,)) -> np.ndarray:
    """Raw coefficients of ``a*b`` (or ``conj(a)*b``) without aliasing.

    Inputs are raw coefficient arrays on the same lattice; the result is the
    exact lattice convolution truncated to the input modes.
    """
    shape = [a_raw.shape[ax] for ax in axes]
    ap = to_padded(a_raw, axes)
    bp = ap if b_raw is a_raw else to_padded(b_raw, axes)
    if conj_a:
        ap = np.conj(ap)
    return from_padded(ap * bp, shape, axes)


def zero_nyquist(raw: np.ndarray, axis: int = -1) -> np.ndarray:
    """Copy of ``raw`` with the unpaired Nyquist coefficient set to zero."""
    out = np.array(raw, dtype=np.complex128)
    idx = [slice(None)] * out.ndim
    idx[axis] = out.shape[axis] // 2
    out[tuple(idx)] = 0.0
    return out
