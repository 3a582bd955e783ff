"""Left- and right-hand sides of the angular Poincare bound and the
product / commutator estimates.

Products are formed on a grid refined twice over, where the product of two
resolved fields is represented without aliasing. Gradients of order k are the
full family of ordered coordinate multi-indices.
"""
from itertools import product
from typing import Iterator, Tuple

import numpy as np

from diagnostics.norms import linf_norm, sobolev_norm
from fields.background import d_theta
from fields.parity import parity_error
from spectral.core import (
    Grid,
    ParityClass,
    ScalarField,
    VectorField,
    derivative_coefficients,
    fft_forward,
    fft_inverse,
    refine,
)
from utils.exceptions import PreconditionError

MAX_ORDER = 4
CLASS_TOL = 1e-8


def safe_ratio(lhs: float, rhs: float) -> float:
    """lhs / rhs with 0/0 -> 0 and x/0 -> inf (a violation)."""
    if rhs > 0:
        return float(lhs / rhs)
    if lhs == 0:
        return 0.0
    return float("inf")


def poincare_ratio(v: VectorField, k: int, parity: ParityClass, check_class: bool = True) -> float:
    """||v||_{H^k} / ||d_theta v||_{H^k}.

    Raises:
        PreconditionError: v is not in the given class (unless check_class is off).
        TruncationError: v is not supported in the core.
    """
    if k < 0:
        raise PreconditionError(f"k must be >= 0, got {k}")
    if check_class:
        err = parity_error(v, parity)
        if err > CLASS_TOL:
            raise PreconditionError(f"field is not {ParityClass(parity).value} (parity error {err:.3e})")
    return safe_ratio(sobolev_norm(v, k, homogeneous=False), sobolev_norm(d_theta(v), k, homogeneous=False))


def multi_indices(k: int) -> Iterator[Tuple[int, ...]]:
    return product((0, 1), repeat=k)


def _iterated(c: np.ndarray, grid: Grid, alpha: Tuple[int, ...]) -> np.ndarray:
    for axis in alpha:
        c = derivative_coefficients(c, grid, axis)
    return c


def _check_order(k: int, lowest: int) -> None:
    if not lowest <= k <= MAX_ORDER:
        raise PreconditionError(f"k must lie in [{lowest}, {MAX_ORDER}], got {k}")


def _refined_pair(f: ScalarField, g: ScalarField) -> Tuple[ScalarField, ScalarField]:
    if f.grid != g.grid:
        raise PreconditionError("f and g live on different grids")
    return refine(f, 2), refine(g, 2)


def _l2(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(np.sum(values**2) * grid.dx**2))


def product_sides(f: ScalarField, g: ScalarField, k: int) -> Tuple[float, float]:
    _check_order(k, 0)
    f2, g2 = _refined_pair(f, g)
    fine = f2.grid
    fg = fft_forward(f2.values * g2.values)
    lhs = np.sqrt(sum(_l2(fft_inverse(_iterated(fg, fine, a)), fine) ** 2 for a in multi_indices(k)))
    rhs = linf_norm(f2) * sobolev_norm(g2, k, False) + sobolev_norm(f2, k, False) * linf_norm(g2)
    return float(lhs), float(rhs)


def product_estimate_ratio(f: ScalarField, g: ScalarField, k: int) -> float:
    """||grad^k (f g)|| / (||f||_inf ||g||_{H^k} + ||f||_{H^k} ||g||_inf), k <= 4."""
    return safe_ratio(*product_sides(f, g, k))


def commutator_sides(f: ScalarField, g: ScalarField, k: int) -> Tuple[float, float]:
    _check_order(k, 1)
    f2, g2 = _refined_pair(f, g)
    fine = f2.grid
    f_values = f2.values
    fg = fft_forward(f_values * g2.values)
    g_hat = g2.coefficients
    total = 0.0
    for alpha in multi_indices(k):
        term = fft_inverse(_iterated(fg, fine, alpha)) - f_values * fft_inverse(_iterated(g_hat, fine, alpha))
        total += _l2(term, fine) ** 2
    grad_f = fft_inverse(np.stack([derivative_coefficients(f2.coefficients, fine, axis) for axis in (0, 1)]))
    grad_linf = float(np.max(np.hypot(grad_f[0], grad_f[1])))
    rhs = grad_linf * sobolev_norm(g2, k - 1, False) + sobolev_norm(f2, k - 1, False) * linf_norm(g2)
    return float(np.sqrt(total)), float(rhs)


def commutator_estimate_ratio(f: ScalarField, g: ScalarField, k: int) -> float:
    """||grad^k (f g) - f grad^k g|| / (||grad f||_inf ||g||_{H^(k-1)} + ||f||_{H^(k-1)} ||g||_inf)."""
    return safe_ratio(*commutator_sides(f, g, k))
