"""Reflection symmetry classes.

A class fixes, for each component, whether it is odd or even under x1 -> -x1
and under x2 -> -x2. Projection averages over the four-element reflection
group with those signs.
"""
from typing import Dict, Tuple

import numpy as np

from spectral.core import ParityClass, VectorField, reflect

# (sign under x1 -> -x1, sign under x2 -> -x2) for component 1 and component 2
SIGNS: Dict[ParityClass, Tuple[Tuple[int, int], Tuple[int, int]]] = {
    ParityClass.VELOCITY_LIKE: ((-1, 1), (1, -1)),
    ParityClass.MAGNETIC_LIKE: ((1, -1), (-1, 1)),
}


def project_component(c: np.ndarray, s1: int, s2: int) -> np.ndarray:
    # index reversal commutes with the DFT, so the samples and the
    # coefficients reflect the same way
    r1 = reflect(c, 0)
    return 0.25 * (c + s1 * r1 + s2 * reflect(c, 1) + s1 * s2 * reflect(r1, 1))


def parity_project_coefficients(c: np.ndarray, parity: ParityClass) -> np.ndarray:
    (a1, a2), (b1, b2) = SIGNS[ParityClass(parity)]
    return np.stack([project_component(c[0], a1, a2), project_component(c[1], b1, b2)])


def parity_project(v: VectorField, parity: ParityClass) -> VectorField:
    """Orthogonal projection of v onto the given class; keeps divergence-freeness."""
    parity = ParityClass(parity)
    return v.with_coefficients(parity_project_coefficients(v.coefficients, parity), parity=parity)


def parity_error_coefficients(c: np.ndarray, parity: ParityClass) -> float:
    total = np.sqrt(np.sum(np.abs(c) ** 2))
    if total == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(c - parity_project_coefficients(c, parity)) ** 2)) / total)


def parity_error(v: VectorField, parity: ParityClass) -> float:
    """||v - P v|| / ||v|| in L2, 0 for the zero field."""
    return parity_error_coefficients(v.coefficients, ParityClass(parity))
