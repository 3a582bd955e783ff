from typing import Iterable, List, Union

import numpy as np

from spectral.core import ScalarField, VectorField
from utils.exceptions import PreconditionError

CIRCLE_POINTS = 256


def _circle_values(c: np.ndarray, grid, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    # trigonometric interpolation; the grid axis starts at -piL
    shift = np.pi * grid.box_half_length
    e1 = np.exp(1j * np.outer(x1 + shift, grid.wavenumbers))
    e2 = np.exp(1j * np.outer(x2 + shift, grid.wavenumbers))
    return np.einsum("pa,ab,pb->p", e1, c, e2).real


def zero_angular_mode(
    v: Union[ScalarField, VectorField],
    radii: Iterable[float],
    points: int = CIRCLE_POINTS,
) -> List[float]:
    """Circle averages (1/2pi) int v dtheta at each radius, max over components.

    Raises:
        PreconditionError: a radius lies outside the core disc.
    """
    grid = v.grid
    radii = [float(r) for r in radii]
    outside = [r for r in radii if not 0 <= r <= grid.core_radius]
    if outside:
        raise PreconditionError(
            f"radii {outside} lie outside the core disc of radius {grid.core_radius:.6g}"
        )
    coefficients = v.coefficients
    if coefficients.ndim == 2:
        coefficients = coefficients[None]
    theta = 2.0 * np.pi * np.arange(points) / points
    result = []
    for r in radii:
        x1 = r * np.cos(theta)
        x2 = r * np.sin(theta)
        means = [abs(_circle_values(c, grid, x1, x2).mean()) for c in coefficients]
        result.append(float(max(means)))
    return result
