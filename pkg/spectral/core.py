"""Fourier pseudo-spectral foundation on the periodic box [-piL, piL)^2.

Coefficients are stored with the "forward" normalization, so the zero mode of
a constant field equals the constant and ||f||_{L2}^2 = area * sum |f_k|^2.
Arrays are indexed [i1, i2] with x1 along axis 0 and x2 along axis 1.
"""
import os
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property, lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.fft

from utils.exceptions import ConfigError, PreconditionError

SPECTRAL = "spectral"
PHYSICAL = "physical"
THREADS_ENV = "MHDLAB_THREADS"

# relative size the zero mode may have before a negative-order multiplier refuses it
ZERO_MODE_TOL = 1e-10


def fft_workers() -> int:
    """FFT worker count from MHDLAB_THREADS (defaults to 1)."""
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def fft_forward(values: np.ndarray) -> np.ndarray:
    return scipy.fft.fft2(values, axes=(-2, -1), norm="forward", workers=fft_workers())


def fft_inverse(coefficients: np.ndarray) -> np.ndarray:
    return scipy.fft.ifft2(coefficients, axes=(-2, -1), norm="forward", workers=fft_workers()).real


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with dealiasing and window parameters.

    Args:
        n                    : points per side, a power of two >= 32.
        box_half_length      : L, the box is [-piL, piL)^2 and wavenumbers are integers / L.
        dealias_fraction     : radius of the dealias mask as a fraction of the Nyquist wavenumber.
        window_core_fraction : core radius as a fraction of piL (coordinates are exact inside).
        window_outer_fraction: radius beyond which the windowed coordinates vanish.
    """

    n: int = 128
    box_half_length: float = 1.0
    dealias_fraction: float = 2.0 / 3.0
    window_core_fraction: float = 0.8
    window_outer_fraction: float = 0.95

    def __post_init__(self):
        problems = []
        if not isinstance(self.n, (int, np.integer)) or self.n < 32 or self.n & (self.n - 1):
            problems.append(f"n={self.n} must be a power of two >= 32")
        if not self.box_half_length > 0:
            problems.append(f"box_half_length={self.box_half_length} must be > 0")
        if not 0 < self.dealias_fraction <= 1:
            problems.append(f"dealias_fraction={self.dealias_fraction} must lie in (0, 1]")
        if not 0 < self.window_core_fraction < 1:
            problems.append(f"window_core_fraction={self.window_core_fraction} must lie in (0, 1)")
        if not self.window_core_fraction < self.window_outer_fraction < 1:
            problems.append(
                f"window_outer_fraction={self.window_outer_fraction} must lie in "
                f"(window_core_fraction, 1)"
            )
        if problems:
            raise ConfigError("invalid grid", problems)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n, self.n)

    @property
    def dx(self) -> float:
        return 2.0 * np.pi * self.box_half_length / self.n

    @property
    def area(self) -> float:
        return (2.0 * np.pi * self.box_half_length) ** 2

    @property
    def core_radius(self) -> float:
        return self.window_core_fraction * np.pi * self.box_half_length

    @property
    def outer_radius(self) -> float:
        return self.window_outer_fraction * np.pi * self.box_half_length

    @property
    def k_max(self) -> float:
        return (self.n // 2) / self.box_half_length

    @property
    def dealias_radius(self) -> float:
        return self.dealias_fraction * self.k_max

    def refined(self, factor: int) -> "Grid":
        return replace(self, n=self.n * factor)

    @cached_property
    def axis(self) -> np.ndarray:
        # symmetric about the origin so that index j and (n - j) mod n mirror exactly
        return (np.arange(self.n) - self.n // 2) * self.dx

    @cached_property
    def x1(self) -> np.ndarray:
        return np.meshgrid(self.axis, self.axis, indexing="ij")[0]

    @cached_property
    def x2(self) -> np.ndarray:
        return np.meshgrid(self.axis, self.axis, indexing="ij")[1]

    @cached_property
    def radius(self) -> np.ndarray:
        return np.hypot(self.x1, self.x2)

    @cached_property
    def core_mask(self) -> np.ndarray:
        return self.radius <= self.core_radius

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, d=1.0 / self.n) / self.box_half_length

    @cached_property
    def k1(self) -> np.ndarray:
        return np.meshgrid(self.wavenumbers, self.wavenumbers, indexing="ij")[0]

    @cached_property
    def k2(self) -> np.ndarray:
        return np.meshgrid(self.wavenumbers, self.wavenumbers, indexing="ij")[1]

    @cached_property
    def k_squared(self) -> np.ndarray:
        return self.k1**2 + self.k2**2

    @cached_property
    def k_abs(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def inverse_k_squared(self) -> np.ndarray:
        safe = np.where(self.k_squared > 0, self.k_squared, 1.0)
        return np.where(self.k_squared > 0, 1.0 / safe, 0.0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        # strict inequality: aliases of quadratic products land at |k| >= radius
        return self.k_abs < self.dealias_radius * (1.0 - 1e-12)


class ParityClass(str, Enum):
    """Reflection symmetry classes of a vector field.

    velocity_like: component 1 odd in x1 / even in x2, component 2 even in x1 / odd in x2.
    magnetic_like: the mirrored assignment.
    """

    VELOCITY_LIKE = "velocity_like"
    MAGNETIC_LIKE = "magnetic_like"

    @property
    def opposite(self) -> "ParityClass":
        if self is ParityClass.VELOCITY_LIKE:
            return ParityClass.MAGNETIC_LIKE
        return ParityClass.VELOCITY_LIKE


@dataclass(frozen=True, eq=False)
class ScalarField:
    data: np.ndarray
    grid: Grid
    space: str = SPECTRAL
    approximate: bool = False

    def __post_init__(self):
        if self.space not in (SPECTRAL, PHYSICAL):
            raise ConfigError(f"unknown space tag {self.space!r}")
        if np.shape(self.data) != self.grid.shape:
            raise ConfigError(
                f"size mismatch: field of shape {np.shape(self.data)} on a grid of shape {self.grid.shape}"
            )

    @classmethod
    def from_values(cls, values: np.ndarray, grid: Grid) -> "ScalarField":
        return cls(np.asarray(values, dtype=float), grid, PHYSICAL)

    @classmethod
    def from_coefficients(cls, coefficients: np.ndarray, grid: Grid, approximate=False) -> "ScalarField":
        return cls(np.asarray(coefficients, dtype=complex), grid, SPECTRAL, approximate)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(np.zeros(grid.shape, dtype=complex), grid, SPECTRAL)

    @property
    def coefficients(self) -> np.ndarray:
        if self.space == SPECTRAL:
            return self.data
        return fft_forward(self.data)

    @property
    def values(self) -> np.ndarray:
        if self.space == PHYSICAL:
            return np.real(self.data)
        return fft_inverse(self.data)

    def with_coefficients(self, coefficients: np.ndarray) -> "ScalarField":
        return ScalarField(coefficients, self.grid, SPECTRAL, self.approximate)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _same_grid(self.grid, other.grid)
        return self.with_coefficients(self.coefficients + other.coefficients)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _same_grid(self.grid, other.grid)
        return self.with_coefficients(self.coefficients - other.coefficients)

    def scaled(self, factor: float) -> "ScalarField":
        return self.with_coefficients(factor * self.coefficients)


@dataclass(frozen=True, eq=False)
class VectorField:
    components: Tuple[ScalarField, ScalarField]
    parity: Optional[ParityClass] = None
    divergence_free: bool = False
    approximate: bool = False

    def __post_init__(self):
        if len(self.components) != 2:
            raise ConfigError("a vector field has exactly two components")
        _same_grid(self.components[0].grid, self.components[1].grid)

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    @classmethod
    def from_coefficients(
        cls,
        grid: Grid,
        coefficients: np.ndarray,
        parity: Optional[ParityClass] = None,
        divergence_free: bool = False,
        approximate: bool = False,
    ) -> "VectorField":
        return cls(
            (
                ScalarField.from_coefficients(coefficients[0], grid),
                ScalarField.from_coefficients(coefficients[1], grid),
            ),
            parity,
            divergence_free,
            approximate,
        )

    @classmethod
    def from_values(cls, grid: Grid, values: np.ndarray, parity=None, divergence_free=False) -> "VectorField":
        return cls(
            (ScalarField.from_values(values[0], grid), ScalarField.from_values(values[1], grid)),
            parity,
            divergence_free,
        )

    @classmethod
    def zeros(cls, grid: Grid, parity: Optional[ParityClass] = None) -> "VectorField":
        return cls.from_coefficients(grid, np.zeros((2,) + grid.shape, dtype=complex), parity, True)

    @property
    def coefficients(self) -> np.ndarray:
        return np.stack([c.coefficients for c in self.components])

    @property
    def values(self) -> np.ndarray:
        if all(c.space == SPECTRAL for c in self.components):
            return fft_inverse(self.coefficients)
        return np.stack([c.values for c in self.components])

    def with_coefficients(self, coefficients: np.ndarray, **tags) -> "VectorField":
        tags.setdefault("parity", self.parity)
        tags.setdefault("divergence_free", self.divergence_free)
        tags.setdefault("approximate", self.approximate)
        return VectorField.from_coefficients(self.grid, coefficients, **tags)

    def _combine(self, other: "VectorField", coefficients: np.ndarray) -> "VectorField":
        return self.with_coefficients(
            coefficients,
            parity=self.parity if self.parity == other.parity else None,
            divergence_free=self.divergence_free and other.divergence_free,
            approximate=self.approximate or other.approximate,
        )

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_grid(self.grid, other.grid)
        return self._combine(other, self.coefficients + other.coefficients)

    def __sub__(self, other: "VectorField") -> "VectorField":
        _same_grid(self.grid, other.grid)
        return self._combine(other, self.coefficients - other.coefficients)

    def __neg__(self) -> "VectorField":
        return self.with_coefficients(-self.coefficients)

    def scaled(self, factor: float) -> "VectorField":
        return self.with_coefficients(factor * self.coefficients)


Field = Union[ScalarField, VectorField]


def _same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise ConfigError(f"grid mismatch: {a} vs {b}")


def _map_coefficients(f: Field, fn: Callable[[np.ndarray], np.ndarray], **tags) -> Field:
    """Applies a coefficient-array transformation to a scalar or to each vector component."""
    if isinstance(f, VectorField):
        return f.with_coefficients(fn(f.coefficients), **tags)
    return f.with_coefficients(fn(f.coefficients))


def forward_transform(f: ScalarField) -> ScalarField:
    """Physical samples -> spectral coefficients."""
    if f.space == SPECTRAL:
        return f
    if np.iscomplexobj(f.data) and np.any(np.imag(f.data) != 0):
        raise PreconditionError("forward_transform expects a real-valued field")
    return ScalarField(fft_forward(np.real(f.data)), f.grid, SPECTRAL, f.approximate)


def inverse_transform(f: ScalarField) -> ScalarField:
    """Spectral coefficients -> physical samples."""
    if f.space == PHYSICAL:
        return f
    return ScalarField(fft_inverse(f.data), f.grid, PHYSICAL, f.approximate)


def derivative_coefficients(coefficients: np.ndarray, grid: Grid, axis: int, order: int = 1) -> np.ndarray:
    k = grid.k1 if axis == 0 else grid.k2
    return (1j * k) ** order * coefficients


def derivative(f: ScalarField, axis: int, order: int = 1) -> ScalarField:
    return f.with_coefficients(derivative_coefficients(f.coefficients, f.grid, axis, order))


def gradient(f: ScalarField) -> VectorField:
    c = f.coefficients
    g = f.grid
    return VectorField.from_coefficients(
        g, np.stack([1j * g.k1 * c, 1j * g.k2 * c]), approximate=f.approximate
    )


def divergence(v: VectorField) -> ScalarField:
    g = v.grid
    c = v.coefficients
    return ScalarField.from_coefficients(1j * g.k1 * c[0] + 1j * g.k2 * c[1], g)


def curl(v: VectorField) -> ScalarField:
    """Scalar vorticity d1 v2 - d2 v1."""
    g = v.grid
    c = v.coefficients
    return ScalarField.from_coefficients(1j * g.k1 * c[1] - 1j * g.k2 * c[0], g)


def laplacian(f: Field) -> Field:
    k2 = f.grid.k_squared
    return _map_coefficients(f, lambda c: -k2 * c)


@lru_cache(maxsize=64)
def power_multiplier(grid: Grid, s: float) -> np.ndarray:
    """|k|^s with the zero mode mapped to zero (identity table for s == 0)."""
    if s == 0:
        return np.ones(grid.shape)
    k = grid.k_abs
    safe = np.where(k > 0, k, 1.0)
    return np.where(k > 0, safe**s, 0.0)


@lru_cache(maxsize=64)
def bessel_multiplier(grid: Grid, s: float) -> np.ndarray:
    """(1 + |k|^2)^(s/2), the inhomogeneous Sobolev weight."""
    return (1.0 + grid.k_squared) ** (s / 2.0)


def zero_mode_vanishes(coefficients: np.ndarray, tol: float = ZERO_MODE_TOL) -> bool:
    c = np.asarray(coefficients)
    total = np.sqrt(np.sum(np.abs(c) ** 2))
    zero = np.sqrt(np.sum(np.abs(c[..., 0, 0]) ** 2))
    return zero <= tol * total or total == 0


def fractional_multiplier(f: Field, s: float) -> Field:
    """Lambda^s: every mode multiplied by |k|^s.

    For s < 0 the zero mode has to vanish already; it is then left at zero.
    """
    if s < 0 and not zero_mode_vanishes(f.coefficients):
        raise PreconditionError(f"Lambda^{s} needs a zero-mean field, the zero mode does not vanish")
    table = power_multiplier(f.grid, float(s))
    return _map_coefficients(f, lambda c: table * c)


def leray_project(v: VectorField) -> VectorField:
    """L2-orthogonal projection onto divergence-free fields (zero mode kept)."""
    return v.with_coefficients(leray_project_coefficients(v.coefficients, v.grid), divergence_free=True)


def leray_project_coefficients(c: np.ndarray, grid: Grid) -> np.ndarray:
    k_dot = (grid.k1 * c[0] + grid.k2 * c[1]) * grid.inverse_k_squared
    return np.stack([c[0] - grid.k1 * k_dot, c[1] - grid.k2 * k_dot])


def dealias(f: Field) -> Field:
    mask = f.grid.dealias_mask
    return _map_coefficients(f, lambda c: np.where(mask, c, 0.0))


def helmholtz_solve(f: Field, alpha: float) -> Field:
    """(I - alpha Laplacian)^-1 f."""
    if alpha < 0:
        raise PreconditionError(f"helmholtz_solve needs alpha >= 0, got {alpha}")
    return _map_coefficients(f, lambda c: helmholtz_coefficients(c, f.grid, alpha))


def helmholtz_coefficients(c: np.ndarray, grid: Grid, alpha: float) -> np.ndarray:
    return c / (1.0 + alpha * grid.k_squared)


def inner_product(a: Field, b: Field) -> float:
    """L2 inner product over the box (sums components for vector fields)."""
    _same_grid(a.grid, b.grid)
    return float(a.grid.area * np.sum(np.real(np.conj(a.coefficients) * b.coefficients)))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(f.grid.area * np.sum(np.abs(f.coefficients) ** 2)))


def reflect(values: np.ndarray, axis: int) -> np.ndarray:
    """Samples of f(-x) along one axis: index j goes to (n - j) mod n."""
    return np.roll(np.flip(values, axis=axis), 1, axis=axis)


def _spectral_index(n: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    h = n // 2
    src = np.concatenate([np.arange(0, h), np.arange(n - h + 1, n)])
    dst = np.concatenate([np.arange(0, h), np.arange(m - h + 1, m)])
    return src, dst


def pad_coefficients(coefficients: np.ndarray, m: int) -> np.ndarray:
    """Zero-pads an n x n spectrum onto an m x m one (m >= n); the Nyquist line is dropped."""
    n = coefficients.shape[-1]
    src, dst = _spectral_index(n, m)
    out = np.zeros(coefficients.shape[:-2] + (m, m), dtype=complex)
    out[..., dst[:, None], dst[None, :]] = coefficients[..., src[:, None], src[None, :]]
    return out


def truncate_coefficients(coefficients: np.ndarray, n: int) -> np.ndarray:
    """Inverse of pad_coefficients: keeps the modes an n x n grid can represent."""
    m = coefficients.shape[-1]
    src, dst = _spectral_index(n, m)
    out = np.zeros(coefficients.shape[:-2] + (n, n), dtype=complex)
    out[..., src[:, None], src[None, :]] = coefficients[..., dst[:, None], dst[None, :]]
    return out


def refine(f: Field, factor: int) -> Field:
    """Spectral interpolation of f onto a grid with factor-times more points per side."""
    fine = f.grid.refined(factor)
    if isinstance(f, VectorField):
        return VectorField.from_coefficients(
            fine, pad_coefficients(f.coefficients, fine.n), f.parity, f.divergence_free, f.approximate
        )
    return ScalarField.from_coefficients(pad_coefficients(f.coefficients, fine.n), fine, f.approximate)
