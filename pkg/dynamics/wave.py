"""Second-order-in-time form of the perturbation system.

Eliminating b from the u equation (and u from the b equation) gives damped
wave equations with dissipation -Lap d_t and dispersion -d_theta^2:

    u_tt - Lap u_t - d_theta^2 u - F_t + d_theta G = grad q1
    b_tt - Lap b_t - d_theta^2 b - G_t + Lap G + d_theta F = grad q2

Componentwise d_theta does not commute with gradients: on the core
d_theta grad chi = grad d_theta chi + (-d2 chi, d1 chi). The gradients the
first-order system removes by projection therefore come back through this
commutator, and the residual carries it (with the windowed coordinates, since
those gradients are not confined to the core).
"""
import cmath
from typing import Tuple

import numpy as np

from diagnostics.norms import sobolev_squared
from dynamics.nonlinear import forcing_coefficients
from dynamics.state import Trajectory
from fields.background import d_theta_commutator, d_theta_coefficients
from spectral.core import Grid, leray_project_coefficients
from utils.exceptions import PreconditionError

COMPONENTS = ("u", "b")
SPACING_TOL = 1e-9


def gradient_part(c: np.ndarray, grid: Grid) -> np.ndarray:
    return c - leray_project_coefficients(c, grid)


def _forcings(traj: Trajectory, index: int):
    state = traj.samples[index]
    grid = state.grid
    if traj.linear:
        zero = np.zeros((2,) + grid.shape, dtype=complex)
        return zero, zero
    return forcing_coefficients(state.u.coefficients, state.b.coefficients, grid)


def wave_residual(traj: Trajectory, index: int, component: str = "u") -> float:
    """||residual||_{L2} / ||u||_{H2} at an interior sample.

    Second time derivatives are centered differences of the right-hand sides
    stored with the neighbouring samples.

    Raises:
        PreconditionError: index without two neighbours, or non-uniform spacing.
    """
    if component not in COMPONENTS:
        raise PreconditionError(f"component must be one of {COMPONENTS}, got {component!r}")
    if not 1 <= index <= len(traj) - 2:
        raise PreconditionError(f"sample {index} needs neighbours on both sides (have {len(traj)} samples)")
    times = traj.times[index - 1 : index + 2]
    before, after = np.diff(times)
    if abs(after - before) > SPACING_TOL * max(before, after):
        raise PreconditionError(f"non-uniform sample spacing around sample {index}: {before} vs {after}")
    h = 0.5 * (before + after)

    state = traj.samples[index]
    grid = state.grid
    k2 = grid.k_squared
    u = state.u.coefficients
    b = state.b.coefficients
    u_t, b_t = (v.coefficients for v in traj.derived[index])
    f_prev, g_prev = _forcings(traj, index - 1)
    f_next, g_next = _forcings(traj, index + 1)
    f, g = _forcings(traj, index)

    if component == "u":
        prev_t, next_t = traj.derived[index - 1][0], traj.derived[index + 1][0]
        acceleration = (next_t.coefficients - prev_t.coefficients) / (2.0 * h)
        forcing_rate = (f_next - f_prev) / (2.0 * h)
        core = (
            acceleration
            + k2 * u_t
            - d_theta_coefficients(d_theta_coefficients(u, grid), grid)
            - forcing_rate
            + d_theta_coefficients(g, grid)
        )
        eliminated = gradient_part(g - d_theta_coefficients(u, grid), grid)
    else:
        prev_t, next_t = traj.derived[index - 1][1], traj.derived[index + 1][1]
        acceleration = (next_t.coefficients - prev_t.coefficients) / (2.0 * h)
        forcing_rate = (g_next - g_prev) / (2.0 * h)
        core = (
            acceleration
            + k2 * b_t
            - d_theta_coefficients(d_theta_coefficients(b, grid), grid)
            - forcing_rate
            - k2 * g
            + d_theta_coefficients(f, grid)
        )
        eliminated = gradient_part(f - d_theta_coefficients(b, grid), grid)

    residual = leray_project_coefficients(core - d_theta_commutator(eliminated, grid), grid)
    scale = sobolev_squared(u, grid, 2, homogeneous=False)
    size = sobolev_squared(residual, grid, 0)
    if scale == 0:
        return 0.0 if size == 0 else np.inf
    return float(np.sqrt(size / scale))


def dispersion_roots(k2: float, n: int) -> Tuple[complex, complex]:
    """Roots of lambda^2 + k2 lambda + n^2 = 0.

    A scalar model of the linear wave operator where Lap -> -k2 and
    d_theta^2 -> -n^2 for angular mode n. Returned as (lambda_plus, lambda_minus).
    """
    k2 = float(k2)
    c = float(n) ** 2
    disc = k2 * k2 - 4.0 * c
    if disc >= 0:
        # the larger-magnitude root first, then the other from the product
        minus = -0.5 * (k2 + np.sqrt(disc))
        plus = c / minus if minus != 0 else 0.0
        return complex(plus), complex(minus)
    root = cmath.sqrt(disc)
    return (-k2 + root) / 2.0, (-k2 - root) / 2.0
