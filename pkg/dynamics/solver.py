"""Time integration of the perturbation system

    u_t = P[Lap u + F - d_theta b]
    b_t = P[G - d_theta u]

with the implicit midpoint rule. P is the Leray projection, which absorbs the
pressure gradients.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from diagnostics.norms import gradient_squared, sobolev_squared
from dynamics.nonlinear import forcing_values, gradient_values
from dynamics.state import SolverConfig, State, Trajectory
from fields.background import HARD_LEAKAGE, background_for, core_leakage, d_theta_from_gradient
from fields.parity import parity_error, parity_project_coefficients
from spectral.core import (
    Grid,
    ParityClass,
    VectorField,
    fft_forward,
    fft_inverse,
    helmholtz_coefficients,
    leray_project_coefficients,
)
from utils.console import print_substep, track
from utils.exceptions import CFLError, DivergenceError, NumericalValidityError, PreconditionError, TruncationError

Observer = Callable[[Trajectory], None]

MIDPOINT_TOL = 1e-12
MIDPOINT_ITERATIONS = 50


@dataclass(frozen=True)
class ExplicitTerms:
    """Projected, dealiased explicit parts of both equations at one state."""

    u: np.ndarray
    b: np.ndarray
    speed: float
    leakage: float


def explicit_terms(
    u_c: np.ndarray,
    b_c: np.ndarray,
    grid: Grid,
    linear: bool = False,
    background_coupling: bool = True,
    leakage_threshold: float = HARD_LEAKAGE,
) -> ExplicitTerms:
    u = fft_inverse(u_c)
    b = fft_inverse(b_c)
    leakage = max(core_leakage(u, grid), core_leakage(b, grid))
    n_u = np.zeros_like(u)
    n_b = np.zeros_like(b)
    if background_coupling or not linear:
        grad_u = gradient_values(u_c, grid)
        grad_b = gradient_values(b_c, grid)
        if background_coupling:
            if leakage > leakage_threshold:
                raise TruncationError(leakage, leakage_threshold)
            n_u -= d_theta_from_gradient(grad_b, grid)
            n_b -= d_theta_from_gradient(grad_u, grid)
        if not linear:
            f, g = forcing_values(u, b, grad_u, grad_b)
            n_u += f
            n_b += g
    coefficients = grid.dealias_mask * fft_forward(np.stack([n_u, n_b]))
    return ExplicitTerms(
        leray_project_coefficients(coefficients[0], grid),
        leray_project_coefficients(coefficients[1], grid),
        float(np.max(np.hypot(u[0], u[1]))),
        leakage,
    )


def _time_derivatives(state: State, terms: ExplicitTerms) -> Tuple[VectorField, VectorField]:
    g = state.grid
    diffusion = leray_project_coefficients(-g.k_squared * state.u.coefficients, g)
    u_t = VectorField.from_coefficients(g, diffusion + terms.u, ParityClass.VELOCITY_LIKE, True)
    b_t = VectorField.from_coefficients(g, terms.b, ParityClass.MAGNETIC_LIKE, True)
    return u_t, b_t


def rhs(state: State, leakage_threshold: float = HARD_LEAKAGE) -> Tuple[VectorField, VectorField]:
    """(u_t, b_t) of the full system.

    Raises:
        TruncationError: u or b leaks more than leakage_threshold of its mass out of the core.
    """
    terms = explicit_terms(
        state.u.coefficients, state.b.coefficients, state.grid, leakage_threshold=leakage_threshold
    )
    return _time_derivatives(state, terms)


def linearized_rhs(state: State, leakage_threshold: float = HARD_LEAKAGE) -> Tuple[VectorField, VectorField]:
    """(u_t, b_t) = (P[Lap u - d_theta b], P[-d_theta u])."""
    terms = explicit_terms(
        state.u.coefficients,
        state.b.coefficients,
        state.grid,
        linear=True,
        leakage_threshold=leakage_threshold,
    )
    return _time_derivatives(state, terms)


def cfl_limit(grid: Grid, speed: float, cfg: SolverConfig) -> float:
    """Largest dt the advective bound allows for a flow of the given peak speed."""
    transport = speed + (background_for(grid).max_speed if cfg.background_coupling else 0.0)
    if transport == 0:
        return np.inf
    return cfg.cfl_safety * grid.dx / transport


def check_cfl(state: State, cfg: SolverConfig, speed: Optional[float] = None) -> None:
    if speed is None:
        values = state.u.values
        speed = float(np.max(np.hypot(values[0], values[1])))
    limit = cfl_limit(state.grid, speed, cfg)
    if cfg.dt > limit:
        raise CFLError(cfg.dt, limit)


def step(state: State, cfg: SolverConfig) -> State:
    """One implicit midpoint step.

    Every term is evaluated at the average of the old and new states, so the
    coupling and the quadratic terms exchange energy exactly and the diffusion
    removes exactly 2 dt ||grad u_mid||^2. Diffusion is solved directly, the rest
    by fixed-point iteration from an explicit guess.

    Raises:
        CFLError: dt exceeds the advective bound.
        TruncationError: a stage leaks out of the core.
        DivergenceError: the iteration does not settle or the update is not finite.
    """
    g = state.grid
    dt = cfg.dt
    k2 = g.k_squared
    options = dict(
        linear=cfg.linear,
        background_coupling=cfg.background_coupling,
        leakage_threshold=cfg.leakage_abort_threshold,
    )
    u0 = state.u.coefficients
    b0 = state.b.coefficients
    explicit_u = u0 - 0.5 * dt * k2 * u0

    terms = explicit_terms(u0, b0, g, **options)
    check_cfl(state, cfg, terms.speed)
    u1 = helmholtz_coefficients(explicit_u + dt * terms.u, g, 0.5 * dt)
    b1 = b0 + dt * terms.b
    for _ in range(MIDPOINT_ITERATIONS):
        terms = explicit_terms(0.5 * (u0 + u1), 0.5 * (b0 + b1), g, **options)
        u_next = helmholtz_coefficients(explicit_u + dt * terms.u, g, 0.5 * dt)
        b_next = b0 + dt * terms.b
        change = np.sqrt(np.sum(np.abs(u_next - u1) ** 2) + np.sum(np.abs(b_next - b1) ** 2))
        size = np.sqrt(np.sum(np.abs(u_next) ** 2) + np.sum(np.abs(b_next) ** 2))
        u1, b1 = u_next, b_next
        if not np.isfinite(change) or change <= MIDPOINT_TOL * size:
            break
    else:
        raise DivergenceError(
            f"the midpoint iteration did not settle in {MIDPOINT_ITERATIONS} sweeps at t={state.t:.6g}"
        )

    if cfg.parity_enforcement:
        u1 = parity_project_coefficients(u1, ParityClass.VELOCITY_LIKE)
        b1 = parity_project_coefficients(b1, ParityClass.MAGNETIC_LIKE)
    if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(b1))):
        raise DivergenceError(f"non-finite values after the step to t={state.t + dt:.6g}")
    return State(
        VectorField.from_coefficients(g, u1, ParityClass.VELOCITY_LIKE, True),
        VectorField.from_coefficients(g, b1, ParityClass.MAGNETIC_LIKE, True),
        state.t + dt,
    )


def _record(traj: Trajectory, state: State, cfg: SolverConfig, dissipation: float) -> None:
    terms = explicit_terms(
        state.u.coefficients,
        state.b.coefficients,
        state.grid,
        linear=cfg.linear,
        background_coupling=cfg.background_coupling,
        leakage_threshold=cfg.leakage_abort_threshold,
    )
    traj.append(
        state,
        _time_derivatives(state, terms),
        dissipation,
        terms.leakage,
        (
            parity_error(state.u, ParityClass.VELOCITY_LIKE),
            parity_error(state.b, ParityClass.MAGNETIC_LIKE),
        ),
    )


def simulate(
    initial: State,
    cfg: SolverConfig,
    observer: Optional[Observer] = None,
    description: str = "Integrating...",
) -> Trajectory:
    """Integrates from initial.t to cfg.t_end, sampling every cfg.sample_stride steps.

    A NumericalValidityError ends the run early: the reason goes to
    metadata["abort_reason"] and the samples gathered so far are returned.
    """
    steps = int(round((cfg.t_end - initial.t) / cfg.dt))
    if steps < 0:
        raise PreconditionError(f"t_end={cfg.t_end} lies before the initial time {initial.t}")
    g = initial.grid
    traj = Trajectory(
        metadata={
            "linear": cfg.linear,
            "dt": cfg.dt,
            "sample_stride": cfg.sample_stride,
            "steps": 0,
            "abort_reason": None,
        }
    )
    state = initial
    dissipation = 0.0
    reference = np.sqrt(sobolev_squared(state.u.coefficients, g, 2, homogeneous=False))
    try:
        _record(traj, state, cfg, dissipation)
        if observer is not None:
            observer(traj)
        for i in track(range(1, steps + 1), description=description, total=steps):
            previous = state.u.coefficients
            state = step(state, cfg).at(initial.t + i * cfg.dt)
            traj.metadata["steps"] = i
            # midpoint value of ||grad u||^2, which balances the diffusion of the step exactly
            dissipation += cfg.dt * gradient_squared(0.5 * (previous + state.u.coefficients), g, 0)
            size = np.sqrt(sobolev_squared(state.u.coefficients, g, 2, homogeneous=False))
            if reference > 0 and size > cfg.blowup_factor * reference:
                raise DivergenceError(
                    f"||u||_H2 grew to {size:.3e}, more than {cfg.blowup_factor:g} times its initial value"
                )
            if i % cfg.sample_stride == 0 or i == steps:
                _record(traj, state, cfg, dissipation)
                if observer is not None:
                    observer(traj)
    except NumericalValidityError as err:
        traj.metadata["abort_reason"] = str(err)
        print_substep(f"Run stopped at t={state.t:.6g}: {err}", style="bold red")
    return traj


def energy_law_drift(traj: Trajectory) -> np.ndarray:
    """|E(t) - E(0)| / E(0) with E = ||u||^2 + ||b||^2 + 2 int ||grad u||^2 (0 when E(0) == 0)."""
    if not len(traj):
        return np.zeros(0)
    g = traj.grid
    energy = np.array(
        [
            sobolev_squared(s.u.coefficients, g, 0) + sobolev_squared(s.b.coefficients, g, 0) + 2.0 * d
            for s, d in zip(traj.samples, traj.integrals["dissipation"])
        ]
    )
    if energy[0] == 0:
        return np.zeros_like(energy)
    return np.abs(energy - energy[0]) / energy[0]
