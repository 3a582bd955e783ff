"""The rotating background field and the windowed angular derivative.

On the box the coordinate functions are replaced by w = x * chi(|x|), where chi
is 1 on the core disc, 0 beyond the outer radius and a C2 polynomial blend in
between. Every operator below is exact wherever chi == 1.
"""
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Union

import numpy as np

from spectral.core import (
    Grid,
    ParityClass,
    ScalarField,
    VectorField,
    fft_forward,
    fft_inverse,
)
from utils.exceptions import TruncationError

# above this leakage the d_theta result is tagged approximate
SOFT_LEAKAGE = 1e-10
# above this leakage the truncated operator is rejected outright
HARD_LEAKAGE = 1e-4


def window_profile(r: np.ndarray, core_radius: float, outer_radius: float) -> np.ndarray:
    t = np.clip((r - core_radius) / (outer_radius - core_radius), 0.0, 1.0)
    return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def window_slope(r: np.ndarray, core_radius: float, outer_radius: float) -> np.ndarray:
    width = outer_radius - core_radius
    t = np.clip((r - core_radius) / width, 0.0, 1.0)
    return -30.0 * t**2 * (1.0 - t) ** 2 / width


@dataclass(frozen=True, eq=False)
class BackgroundField:
    """B0 = (x2, -x1) built from the windowed coordinates."""

    grid: Grid

    @cached_property
    def window(self) -> np.ndarray:
        g = self.grid
        return window_profile(g.radius, g.core_radius, g.outer_radius)

    @cached_property
    def w1(self) -> np.ndarray:
        return self.grid.x1 * self.window

    @cached_property
    def w2(self) -> np.ndarray:
        return self.grid.x2 * self.window

    @cached_property
    def jacobian(self) -> np.ndarray:
        """d_i w_j indexed [i, j]."""
        g = self.grid
        x = (g.x1, g.x2)
        safe_r = np.where(g.radius > 0, g.radius, 1.0)
        radial = window_slope(g.radius, g.core_radius, g.outer_radius) / safe_r
        return np.array(
            [[(i == j) * self.window + x[i] * x[j] * radial for j in range(2)] for i in range(2)]
        )

    @cached_property
    def max_speed(self) -> float:
        return float(np.max(np.hypot(self.w1, self.w2)))

    @cached_property
    def field(self) -> VectorField:
        # (w2, -w1) = chi(r) (x2, -x1) has zero divergence for any radial chi
        return VectorField.from_coefficients(
            self.grid,
            fft_forward(np.stack([self.w2, -self.w1])),
            ParityClass.MAGNETIC_LIKE,
            divergence_free=True,
        )


@lru_cache(maxsize=8)
def background_for(grid: Grid) -> BackgroundField:
    return BackgroundField(grid)


def core_leakage(values: np.ndarray, grid: Grid) -> float:
    """Fraction of the L2 mass of the samples that sits outside the core disc."""
    mass = np.abs(np.asarray(values)) ** 2
    if mass.ndim == 3:
        mass = mass.sum(axis=0)
    total = float(mass.sum())
    if total == 0:
        return 0.0
    return float(mass[~grid.core_mask].sum()) / total


def d_theta_from_gradient(gradient_values: np.ndarray, grid: Grid) -> np.ndarray:
    """w1 d2 f - w2 d1 f from physical samples of (d1 f, d2 f), stacked on axis 0."""
    bg = background_for(grid)
    return bg.w1 * gradient_values[1] - bg.w2 * gradient_values[0]


def d_theta_coefficients(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Windowed angular derivative of a coefficient array (scalar or stacked), dealiased."""
    gradient_values = fft_inverse(np.stack([1j * grid.k1 * c, 1j * grid.k2 * c]))
    return grid.dealias_mask * fft_forward(d_theta_from_gradient(gradient_values, grid))


def d_theta(
    f: Union[ScalarField, VectorField],
    soft_threshold: float = SOFT_LEAKAGE,
    hard_threshold: float = HARD_LEAKAGE,
) -> Union[ScalarField, VectorField]:
    """Angular derivative x1 d2 - x2 d1, applied componentwise to vector fields.

    The reflection classes are swapped: d_theta of a velocity_like field is
    magnetic_like and vice versa.

    Raises:
        TruncationError: the input carries more than hard_threshold of its mass
            outside the core.
    """
    grid = f.grid
    leakage = core_leakage(f.values, grid)
    if leakage > hard_threshold:
        raise TruncationError(leakage, hard_threshold)
    approximate = f.approximate or leakage > soft_threshold
    out = d_theta_coefficients(f.coefficients, grid)
    if isinstance(f, VectorField):
        return VectorField.from_coefficients(
            grid,
            out,
            f.parity.opposite if f.parity is not None else None,
            divergence_free=False,
            approximate=approximate,
        )
    return ScalarField.from_coefficients(out, grid, approximate)


def full_from_perturbation(b: VectorField, bg: BackgroundField) -> VectorField:
    """B = B0 + b."""
    return bg.field + b


def perturbation_from_full(full: VectorField, bg: BackgroundField) -> VectorField:
    """b = B - B0."""
    return full - bg.field


def d_theta_commutator(gradient_coefficients: np.ndarray, grid: Grid) -> np.ndarray:
    """d_theta grad chi - grad d_theta chi, from the coefficients of grad chi.

    Componentwise this is (d_i w2) g1 - (d_i w1) g2, which is the rotated
    gradient (-g2, g1) wherever the window is the identity. Dealiased.
    """
    jac = background_for(grid).jacobian
    g = fft_inverse(gradient_coefficients)
    out = np.stack([jac[i, 1] * g[0] - jac[i, 0] * g[1] for i in range(2)])
    return grid.dealias_mask * fft_forward(out)
