from typing import Optional

import numpy as np

from spectral.core import ParityClass, ScalarField, VectorField, curl


def from_stream(phi: ScalarField, parity: Optional[ParityClass] = None) -> VectorField:
    """Perpendicular gradient (-d2 phi, d1 phi).

    An odd-odd stream gives a velocity_like field, an even-even stream a
    magnetic_like one; pass the class to tag the result.
    """
    g = phi.grid
    c = phi.coefficients
    return VectorField.from_coefficients(
        g,
        np.stack([-1j * g.k2 * c, 1j * g.k1 * c]),
        parity,
        divergence_free=True,
        approximate=phi.approximate,
    )


def to_stream(v: VectorField) -> ScalarField:
    """Zero-mean stream function of the divergence-free part of v (solves Laplacian phi = curl v)."""
    g = v.grid
    return ScalarField.from_coefficients(-curl(v).coefficients * g.inverse_k_squared, g, v.approximate)
