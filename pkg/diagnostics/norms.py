"""Sobolev norms computed from Fourier coefficients.

    homogeneous     ||f||^2 = area * sum |k|^(2s) |f_k|^2
    inhomogeneous   ||f||^2 = area * sum (1 + |k|^2)^s |f_k|^2

Vector fields use the root-sum-square of their components.
"""
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from fields.background import core_leakage
from spectral.core import (
    Grid,
    ScalarField,
    VectorField,
    bessel_multiplier,
    power_multiplier,
    zero_mode_vanishes,
)
from utils.exceptions import PreconditionError

Field = Union[ScalarField, VectorField]

# share of the norm that may sit in the top third of the resolved spectrum
RESOLUTION_TOLERANCE = 0.1


def sobolev_weight(grid: Grid, s: float, homogeneous: bool) -> np.ndarray:
    if homogeneous:
        return power_multiplier(grid, 2.0 * s)
    return bessel_multiplier(grid, 2.0 * s)


def sobolev_squared(c: np.ndarray, grid: Grid, s: float, homogeneous: bool = True) -> float:
    """Squared norm of a coefficient array (scalar or stacked components)."""
    if s < 0 and homogeneous and not zero_mode_vanishes(c):
        raise PreconditionError(f"the homogeneous H^{s} norm needs a zero-mean field")
    weight = sobolev_weight(grid, float(s), homogeneous)
    return float(grid.area * np.sum(weight * np.abs(c) ** 2))


def sobolev_norm(f: Field, s: float, homogeneous: bool = True) -> float:
    """Raises PreconditionError for s < 0 homogeneous when the zero mode does not vanish."""
    return float(np.sqrt(sobolev_squared(f.coefficients, f.grid, s, homogeneous)))


def gradient_squared(c: np.ndarray, grid: Grid, s: float) -> float:
    """||grad f||^2_{H^s} = area * sum |k|^2 (1 + |k|^2)^s |f_k|^2."""
    weight = grid.k_squared * bessel_multiplier(grid, 2.0 * s)
    return float(grid.area * np.sum(weight * np.abs(c) ** 2))


def gradient_sobolev_norm(f: Field, s: float) -> float:
    return float(np.sqrt(gradient_squared(f.coefficients, f.grid, s)))


def linf_norm(f: Field) -> float:
    values = f.values
    if values.ndim == 3:
        return float(np.max(np.sqrt(np.sum(values**2, axis=0))))
    return float(np.max(np.abs(values)))


def resolution_fraction(f: Field, s: float, homogeneous: bool = False) -> float:
    """Share of ||f||^2_{H^s} carried by the top third of the dealiased spectrum."""
    return resolution_fraction_coefficients(f.coefficients, f.grid, s, homogeneous)


def resolution_fraction_coefficients(c: np.ndarray, grid: Grid, s: float, homogeneous: bool = False) -> float:
    weighted = sobolev_weight(grid, float(s), homogeneous) * np.abs(c) ** 2
    if weighted.ndim == 3:
        weighted = weighted.sum(axis=0)
    total = float(weighted.sum())
    if total == 0:
        return 0.0
    top = grid.k_abs >= (2.0 / 3.0) * grid.dealias_radius
    return float(weighted[top].sum()) / total


def under_resolved(f: Field, s: float, homogeneous: bool = False) -> bool:
    return resolution_fraction(f, s, homogeneous) > RESOLUTION_TOLERANCE


def support_leakage(f: Field) -> float:
    """Fraction of the L2 mass outside the core disc."""
    return core_leakage(f.values, f.grid)


OPERANDS = ("field", "d_theta", "time_derivative")


@dataclass(frozen=True)
class NormLabel:
    order: float
    homogeneous: bool = True
    operand: str = "field"

    def __post_init__(self):
        if self.operand not in OPERANDS:
            raise PreconditionError(f"operand must be one of {OPERANDS}, got {self.operand!r}")

    def __str__(self) -> str:
        space = "Hdot" if self.homogeneous else "H"
        return f"{space}^{self.order:g}[{self.operand}]"


@dataclass(frozen=True)
class NormSeries:
    times: np.ndarray
    values: np.ndarray
    label: NormLabel

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.shape != values.shape:
            raise PreconditionError(f"{len(times)} times but {len(values)} values")
        if np.any(np.diff(times) <= 0):
            raise PreconditionError("series times must be strictly increasing")
        if np.any(values < 0):
            raise PreconditionError("norm values must be nonnegative")

    @classmethod
    def from_lists(cls, times: Sequence[float], values: Sequence[float], label: NormLabel) -> "NormSeries":
        return cls(np.asarray(times, dtype=float), np.asarray(values, dtype=float), label)

    def __len__(self) -> int:
        return len(self.times)
