"""Registry of interpolation and embedding inequalities used in the energy estimates.

Each preset maps a field to (lhs, rhs) for an inequality lhs <= C rhs. Pure
Hdot interpolations have C = 1 (Holder in Fourier space), with equality for a
single wavenumber shell.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Tuple, Union

import numpy as np

from diagnostics.norms import sobolev_norm
from fields.background import d_theta
from fields.parity import parity_error
from inequality_lab.estimates import CLASS_TOL, safe_ratio
from spectral.core import ScalarField, VectorField, fft_inverse, refine, zero_mode_vanishes
from utils.exceptions import PreconditionError

Field = Union[ScalarField, VectorField]
Sides = Callable[[Field, float], Tuple[float, float]]

SIGMA_DEFAULT = 3.0 / 23.0


def _hdot(f: Field, s: float) -> float:
    return sobolev_norm(f, s, homogeneous=True)


def _magnitude(values: np.ndarray) -> np.ndarray:
    if values.ndim == 3:
        return np.sqrt(np.sum(values**2, axis=0))
    return np.abs(values)


def _fine_values(f: Field) -> np.ndarray:
    return refine(f, 2).values


def _linf(f: Field) -> float:
    return float(np.max(_magnitude(_fine_values(f))))


def _gradient_linf(f: Field) -> float:
    fine = refine(f, 2)
    g = fine.grid
    c = fine.coefficients
    grads = fft_inverse(np.stack([1j * g.k1 * c, 1j * g.k2 * c]))
    return float(np.max(np.sqrt(np.sum(grads.reshape((-1,) + g.shape) ** 2, axis=0))))


def _lp(f: Field, p: float) -> float:
    fine = refine(f, 2)
    return float((np.sum(_magnitude(fine.values) ** p) * fine.grid.dx**2) ** (1.0 / p))


def lebesgue_exponent(sigma: float) -> float:
    """p = 2 / sigma, the Lebesgue index matched to Hdot^(1 - sigma) in two dimensions."""
    return 2.0 / sigma


@dataclass(frozen=True)
class InterpolationPreset:
    name: str
    statement: str
    sides: Sides
    zero_mean: bool = False
    angular: bool = False


def _gradient_linf_sides(f, sigma):
    return _gradient_linf(f), np.sqrt(_hdot(f, 1) * _hdot(f, 3))


def _l2_negative_sides(f, sigma):
    return _hdot(f, 0), _hdot(f, -sigma) ** (1 / (1 + sigma)) * _hdot(f, 1) ** (sigma / (1 + sigma))


def _one_minus_sigma_sides(f, sigma):
    return _hdot(f, 1 - sigma), _hdot(f, -sigma) ** (sigma / (1 + sigma)) * _hdot(f, 1) ** (1 / (1 + sigma))


def _lp_sides(f, sigma):
    p = lebesgue_exponent(sigma)
    a = 2.0 / (p * (1 + sigma))
    return _lp(f, p), _hdot(f, -sigma) ** a * _hdot(f, 1) ** (1 - a)


def _embedding_sides(f, sigma):
    return _lp(f, lebesgue_exponent(sigma)), _hdot(f, 1 - sigma)


def _midpoint(m: int) -> Sides:
    def sides(f, sigma):
        return _hdot(f, 2 * m), np.sqrt(_hdot(f, 2 * m - 1) * _hdot(f, 2 * m + 1))

    return sides


def _h1_sides(f, sigma):
    return _hdot(f, 1), np.sqrt(_hdot(f, 0) * _hdot(f, 2))


def _linf_angular_sides(f, sigma):
    return _linf(f), _hdot(f, 0) ** (2 / 3) * _hdot(d_theta(f), 3) ** (1 / 3)


def _gradient_linf_angular_sides(f, sigma):
    return (
        _gradient_linf(f),
        _hdot(f, 1 - sigma) ** (1 / (2 + sigma)) * _hdot(d_theta(f), 3) ** ((1 + sigma) / (2 + sigma)),
    )


PRESETS: Dict[str, InterpolationPreset] = {
    p.name: p
    for p in (
        InterpolationPreset(
            "gradient_linf",
            "||grad u||_inf <~ ||grad u||_2^(1/2) ||grad^3 u||_2^(1/2)",
            _gradient_linf_sides,
        ),
        InterpolationPreset(
            "l2_negative",
            "||u||_2 <= ||u||_{Hdot^-sigma}^(1/(1+sigma)) ||u||_{Hdot^1}^(sigma/(1+sigma))",
            _l2_negative_sides,
            zero_mean=True,
        ),
        InterpolationPreset(
            "one_minus_sigma",
            "||u||_{Hdot^(1-sigma)} <= ||u||_{Hdot^-sigma}^(sigma/(1+sigma)) ||u||_{Hdot^1}^(1/(1+sigma))",
            _one_minus_sigma_sides,
            zero_mean=True,
        ),
        InterpolationPreset(
            "lp_negative",
            "||u||_p <~ ||u||_{Hdot^-sigma}^(2/(p(1+sigma))) ||u||_{Hdot^1}^(1-2/(p(1+sigma))), p = 2/sigma",
            _lp_sides,
            zero_mean=True,
        ),
        InterpolationPreset(
            "lp_embedding",
            "||u||_p <~ ||u||_{Hdot^(1-sigma)}, p = 2/sigma",
            _embedding_sides,
        ),
        InterpolationPreset(
            "midpoint_h2",
            "||u||_{Hdot^2} <= ||u||_{Hdot^1}^(1/2) ||u||_{Hdot^3}^(1/2)",
            _midpoint(1),
        ),
        InterpolationPreset(
            "midpoint_h4",
            "||u||_{Hdot^4} <= ||u||_{Hdot^3}^(1/2) ||u||_{Hdot^5}^(1/2)",
            _midpoint(2),
        ),
        InterpolationPreset(
            "h1_l2_h2",
            "||u||_{Hdot^1} <= ||u||_2^(1/2) ||u||_{Hdot^2}^(1/2)",
            _h1_sides,
        ),
        InterpolationPreset(
            "linf_angular",
            "||u||_inf <~ ||u||_2^(2/3) ||d_theta u||_{Hdot^3}^(1/3)",
            _linf_angular_sides,
            angular=True,
        ),
        InterpolationPreset(
            "gradient_linf_angular",
            "||grad u||_inf <~ ||u||_{Hdot^(1-sigma)}^(1/(2+sigma)) ||d_theta u||_{Hdot^3}^((1+sigma)/(2+sigma))",
            _gradient_linf_angular_sides,
            angular=True,
        ),
    )
}


def get_preset(name: str) -> InterpolationPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise PreconditionError(f"unknown interpolation preset {name!r}, expected one of {sorted(PRESETS)}")


def interpolation_sides(f: Field, preset: str, sigma: float = SIGMA_DEFAULT) -> Tuple[float, float]:
    entry = get_preset(preset)
    if entry.zero_mean and not zero_mode_vanishes(f.coefficients):
        raise PreconditionError(f"preset {preset!r} needs a zero-mean field")
    if entry.angular:
        # angular control needs a vanishing circle average, which the symmetry classes provide
        if not isinstance(f, VectorField) or f.parity is None:
            raise PreconditionError(f"preset {preset!r} needs a vector field tagged with a symmetry class")
        err = parity_error(f, f.parity)
        if err > CLASS_TOL:
            raise PreconditionError(f"preset {preset!r}: field is not {f.parity.value} (parity error {err:.3e})")
    return entry.sides(f, sigma)


def gn_interpolation_ratio(f: Field, preset: str, sigma: float = SIGMA_DEFAULT) -> float:
    """lhs / rhs of a registry inequality; 0 for the zero field.

    Raises:
        PreconditionError: unknown preset, or the field does not meet its conditions.
    """
    return safe_ratio(*interpolation_sides(f, preset, sigma))
