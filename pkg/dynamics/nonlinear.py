"""Quadratic forcings F = b.grad b - u.grad u and G = b.grad u - u.grad b.

Products are taken in physical space and the result is dealiased.
"""
from typing import Tuple

import numpy as np

from spectral.core import Grid, ParityClass, VectorField, fft_forward, fft_inverse


def gradient_values(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Samples of d_j c_i, indexed [j, i, x1, x2]."""
    return fft_inverse(np.stack([1j * grid.k1 * c, 1j * grid.k2 * c]))


def advect(a: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """(a . grad) c from samples of a and of grad c."""
    return a[0] * grad[0] + a[1] * grad[1]


def forcing_values(
    u: np.ndarray, b: np.ndarray, grad_u: np.ndarray, grad_b: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    f = advect(b, grad_b) - advect(u, grad_u)
    g = advect(b, grad_u) - advect(u, grad_b)
    return f, g


def forcing_coefficients(u_c: np.ndarray, b_c: np.ndarray, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    u = fft_inverse(u_c)
    b = fft_inverse(b_c)
    f, g = forcing_values(u, b, gradient_values(u_c, grid), gradient_values(b_c, grid))
    mask = grid.dealias_mask
    return mask * fft_forward(f), mask * fft_forward(g)


def _classes(u: VectorField, b: VectorField):
    if (u.parity, b.parity) == (ParityClass.VELOCITY_LIKE, ParityClass.MAGNETIC_LIKE):
        return ParityClass.VELOCITY_LIKE, ParityClass.MAGNETIC_LIKE
    return None, None


def compute_F(u: VectorField, b: VectorField) -> VectorField:
    f, _ = forcing_coefficients(u.coefficients, b.coefficients, u.grid)
    return VectorField.from_coefficients(u.grid, f, _classes(u, b)[0])


def compute_G(u: VectorField, b: VectorField) -> VectorField:
    _, g = forcing_coefficients(u.coefficients, b.coefficients, u.grid)
    return VectorField.from_coefficients(u.grid, g, _classes(u, b)[1])
