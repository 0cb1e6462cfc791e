"""Periodic-box Fourier calculus.

The box is ``[-L, L)^d`` sampled with ``n`` points per axis.  Wavenumbers are
``k_m = pi m / L`` for ``m = -n/2, ..., n/2 - 1``.  Discrete norms are
Riemann-sum normalized: the cell measure ``(2L/n)^d`` multiplies every
physical-space sum, and spectral sums carry the extra ``1/n^d`` from Parseval,
so refining the grid converges to the continuum norm.

Most helpers come in two flavours: a public one acting on :class:`Field`
values and a private one acting on raw arrays with arbitrary leading batch
axes (used by the time steppers, which hold whole trajectories in one array).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .errors import (
    GridMismatch,
    InvalidDimension,
    InvalidSize,
    NonFiniteValues,
    NonPositiveLength,
    SupportViolation,
)

SOBOLEV_RANGE = (-4.0, 4.0)


@dataclass(frozen=True)
class Grid:
    d: int
    n: int
    half_side: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise InvalidDimension(f"dimension must be 1, 2 or 3, got {self.d}")
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise InvalidSize(f"points per axis must be a power of two >= 8, got {n}")
        if not self.half_side > 0 or not np.isfinite(self.half_side):
            raise NonPositiveLength(f"half side must be positive, got {self.half_side}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_side / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.d

    @property
    def box_volume(self) -> float:
        return (2.0 * self.half_side) ** self.d

    @property
    def axes(self) -> tuple[int, ...]:
        """Trailing array axes holding space (for batched arrays)."""
        return tuple(range(-self.d, 0))

    @cached_property
    def coordinates(self) -> np.ndarray:
        """Per-axis coordinates ``-L + m*dx``."""
        return -self.half_side + self.spacing * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Per-axis wavenumber table in ascending order, ``-n/2 .. n/2-1``."""
        return np.pi * np.arange(-self.n // 2, self.n // 2) / self.half_side

    @cached_property
    def mode_indices(self) -> np.ndarray:
        """Integer mode numbers in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(int)

    @cached_property
    def fft_wavenumbers(self) -> np.ndarray:
        return np.pi * self.mode_indices / self.half_side

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Dense coordinate arrays, one per axis, each of ``shape``."""
        return np.meshgrid(*([self.coordinates] * self.d), indexing="ij")

    def wavevector(self) -> tuple[np.ndarray, ...]:
        """Sparse (broadcastable) wavevector components in FFT order."""
        return tuple(np.meshgrid(*([self.fft_wavenumbers] * self.d), indexing="ij", sparse=True))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x**2 for x in self.mesh()))

    @cached_property
    def k_squared(self) -> np.ndarray:
        return sum(k**2 for k in self.wavevector()) * np.ones(self.shape)

    @cached_property
    def max_mode(self) -> np.ndarray:
        """Largest absolute integer mode number over the axes, per spectral cell."""
        m = np.meshgrid(*([np.abs(self.mode_indices)] * self.d), indexing="ij")
        return np.max(np.stack(m), axis=0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep ``|m| < n/3`` on every axis."""
        return self.max_mode < self.n / 3.0

    def sobolev_weight(self, s: float) -> np.ndarray:
        _check_index(s)
        return (1.0 + self.k_squared) ** s

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.d, self.n * factor, self.half_side)


def make_grid(d: int, n: int, half_side: float) -> Grid:
    return Grid(int(d), int(n), float(half_side))


def _check_index(s):
    lo, hi = SOBOLEV_RANGE
    if not lo <= s <= hi:
        raise ValueError(f"Sobolev index {s} outside [{lo}, {hi}]")


class Field:
    """Complex samples on a grid; immutable once built."""

    __slots__ = ("grid", "values")
    __array_priority__ = 100

    def __init__(self, grid: Grid, values):
        arr = np.array(values, dtype=np.complex128)
        if arr.shape != grid.shape:
            if arr.size != grid.size:
                raise ValueError(f"expected {grid.size} samples, got {arr.size}")
            arr = arr.reshape(grid.shape)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValues("field contains non-finite samples")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def __repr__(self):
        return f"Field(d={self.grid.d}, n={self.grid.n}, L={self.grid.half_side})"

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[..., np.ndarray]) -> "Field":
        return cls(grid, func(*grid.mesh()))

    def _coerce(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridMismatch("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return Field(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Field(self.grid, self.values / scalar)

    def __neg__(self):
        return Field(self.grid, -self.values)

    def conj(self) -> "Field":
        return Field(self.grid, self.values.conj())

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def flat(self) -> np.ndarray:
        """Row-major flat copy (x1 slowest)."""
        return self.values.reshape(-1).copy()

    def is_zero(self) -> bool:
        return not np.any(self.values)


def same_grid(*fields: Field) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatch("fields live on different grids")
    return grid


# -- raw-array kernels -------------------------------------------------------


def fft(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.fftn(values, axes=grid.axes)


def ifft(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.ifftn(values, axes=grid.axes)


def multiply(values: np.ndarray, symbol: np.ndarray, grid: Grid) -> np.ndarray:
    return ifft(symbol * fft(values, grid), grid)


def derivative_symbol(grid: Grid, axis: int) -> np.ndarray:
    """``i k_axis`` with the unpaired Nyquist mode removed (keeps the operator skew)."""
    k = grid.wavevector()[axis].copy()
    k[np.abs(grid.mode_indices.reshape(k.shape)) == grid.n // 2] = 0.0
    return 1j * k


def gradient_values(values: np.ndarray, grid: Grid) -> list[np.ndarray]:
    hat = fft(values, grid)
    return [ifft(derivative_symbol(grid, j) * hat, grid) for j in range(grid.d)]


def gradient_modulus(values: np.ndarray, grid: Grid) -> np.ndarray:
    return np.sqrt(sum(np.abs(g) ** 2 for g in gradient_values(values, grid)))


def spectral_sum(f_hat: np.ndarray, g_hat: np.ndarray, grid: Grid, s: float) -> np.ndarray:
    """``Re sum (1+|k|^2)^s f_hat conj(g_hat)`` times the normalization, batched."""
    w = grid.sobolev_weight(s)
    total = np.sum(w * (f_hat * g_hat.conj()).real, axis=grid.axes)
    return total * grid.cell_volume / grid.size


def sobolev_norms(values: np.ndarray, grid: Grid, s: float) -> np.ndarray:
    hat = fft(values, grid)
    return np.sqrt(spectral_sum(hat, hat, grid, s))


def lp_norms(values: np.ndarray, grid: Grid, r: float) -> np.ndarray:
    """Riemann-sum spatial ``L^r`` norm over the trailing axes."""
    a = np.abs(values)
    if np.isinf(r):
        return np.max(a, axis=grid.axes)
    return (np.sum(a**r, axis=grid.axes) * grid.cell_volume) ** (1.0 / r)


def dealias(values: np.ndarray, grid: Grid) -> np.ndarray:
    return ifft(grid.dealias_mask * fft(values, grid), grid)


# -- public field operations ------------------------------------------------

Symbol = Union[Callable[..., np.ndarray], np.ndarray, complex, float]


def _evaluate_symbol(symbol: Symbol, grid: Grid) -> np.ndarray:
    if callable(symbol):
        sym = symbol(*grid.wavevector())
    else:
        sym = symbol
    sym = np.broadcast_to(np.asarray(sym, dtype=np.complex128), grid.shape)
    if not np.all(np.isfinite(sym)):
        raise NonFiniteValues("multiplier symbol is not finite on the grid")
    return sym


def apply_multiplier(f: Field, symbol: Symbol) -> Field:
    """Apply the Fourier multiplier ``symbol(k)``.

    ``symbol`` is either a callable receiving the wavevector components
    ``k_1, ..., k_d`` as broadcastable arrays in FFT order, or an array of the
    grid shape already in FFT order.
    """
    sym = _evaluate_symbol(symbol, f.grid)
    return Field(f.grid, multiply(f.values, sym, f.grid))


def sobolev_norm(f: Field, s: float) -> float:
    return float(sobolev_norms(f.values, f.grid, s))


def hs_inner(f: Field, g: Field, s: float) -> float:
    grid = same_grid(f, g)
    return float(spectral_sum(fft(f.values, grid), fft(g.values, grid), grid, s))


def lambda_apply(f: Field) -> Field:
    """Riesz map ``H^1 -> H^-1``: the multiplier ``1 + |k|^2``."""
    return Field(f.grid, multiply(f.values, 1.0 + f.grid.k_squared, f.grid))


def lambda_inverse(f: Field) -> Field:
    return Field(f.grid, multiply(f.values, 1.0 / (1.0 + f.grid.k_squared), f.grid))


def l2_norm(f: Field) -> float:
    """Physical-space Riemann sum, independent of the FFT path."""
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.cell_volume))


def partial_derivative(f: Field, axis: int) -> Field:
    return Field(f.grid, multiply(f.values, derivative_symbol(f.grid, axis), f.grid))


def gradient(f: Field) -> tuple[Field, ...]:
    return tuple(Field(f.grid, g) for g in gradient_values(f.values, f.grid))


def coordinate(grid: Grid, axis: int) -> np.ndarray:
    """Sawtooth coordinate ``x_axis`` of the box as an array of the grid shape."""
    shape = [1] * grid.d
    shape[axis] = grid.n
    return np.broadcast_to(grid.coordinates.reshape(shape), grid.shape)


def tail_fraction(f: Field, axis: int) -> float:
    """Fraction of the squared mass with ``|x_axis| > L/2``."""
    mass = np.abs(f.values) ** 2
    total = mass.sum()
    if total == 0:
        return 0.0
    outer = np.abs(coordinate(f.grid, axis)) > f.grid.half_side / 2
    return float(mass[outer].sum() / total)


def apply_coordinate_op(f: Field, axis: int, t: float, tail_threshold: float = 1e-8) -> Field:
    """``(x_j + 2 i t d_j) f`` for a field concentrated away from the box edge."""
    if not 0 <= axis < f.grid.d:
        raise ValueError(f"axis {axis} out of range for d={f.grid.d}")
    tail = tail_fraction(f, axis)
    if tail > tail_threshold:
        raise SupportViolation(
            f"tail mass fraction {tail:.3e} beyond |x|>L/2 exceeds {tail_threshold:.1e}"
        )
    x = coordinate(f.grid, axis)
    out = x * f.values
    if t != 0:
        out = out + 2j * t * multiply(f.values, derivative_symbol(f.grid, axis), f.grid)
    return Field(f.grid, out)


def plane_wave(grid: Grid, modes) -> Field:
    """``exp(i k.x)`` for the integer mode numbers ``modes`` (one per axis)."""
    modes = np.atleast_1d(modes)
    if modes.size != grid.d:
        raise ValueError("need one mode number per axis")
    phase = sum(np.pi * m / grid.half_side * x for m, x in zip(modes, grid.mesh()))
    return Field(grid, np.exp(1j * phase))


def random_band_limited(
    grid: Grid, rng: np.random.Generator, k_max: float, mean_zero: bool = False
) -> Field:
    """Random field with Gaussian Fourier coefficients on ``|k| <= k_max``.

    The coefficients are drawn on the integer modes inside the band only, so
    the same generator state gives the same continuum function on every grid
    that resolves the band.
    """
    m_max = int(np.floor(k_max * grid.half_side / np.pi))
    if m_max >= grid.n // 2:
        raise ValueError("band exceeds the grid's Nyquist mode")
    ms = np.arange(-m_max, m_max + 1)
    band = np.stack(np.meshgrid(*([ms] * grid.d), indexing="ij"), axis=-1).reshape(-1, grid.d)
    band = band[np.pi * np.linalg.norm(band, axis=1) / grid.half_side <= k_max]
    coeffs = rng.standard_normal(len(band)) + 1j * rng.standard_normal(len(band))
    if mean_zero:
        coeffs[np.all(band == 0, axis=1)] = 0.0
    hat = np.zeros(grid.shape, dtype=complex)
    hat[tuple((band % grid.n).T)] = coeffs
    return Field(grid, np.fft.ifftn(hat) * grid.size)


def resample(f: Field, grid: Grid) -> Field:
    """Spectral interpolation (zero padding or truncation) onto ``grid``."""
    if grid.d != f.grid.d or grid.half_side != f.grid.half_side:
        raise GridMismatch("resampling needs the same box and dimension")
    if grid.n == f.grid.n:
        return f
    hat = np.fft.fftshift(fft(f.values, f.grid))
    n_old, n_new = f.grid.n, grid.n
    if n_new > n_old:
        pad = (n_new - n_old) // 2
        hat = np.pad(hat, [(pad, pad)] * grid.d)
    else:
        cut = (n_old - n_new) // 2
        hat = hat[tuple(slice(cut, cut + n_new) for _ in range(grid.d))]
    hat = np.fft.ifftshift(hat) * (grid.size / f.grid.size)
    return Field(grid, np.fft.ifftn(hat))
