from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diagnostics.norms import gradient_squared, sobolev_norm
from dynamics import solver
from dynamics.nonlinear import compute_F, compute_G
from dynamics.solver import energy_law_drift, linearized_rhs, rhs, simulate, step
from dynamics.state import SolverConfig, State, Trajectory
from dynamics.wave import dispersion_roots, wave_residual
from fields.background import d_theta
from fields.generators import Envelope, random_symmetric_field
from fields.parity import parity_error
from fields.stream import from_stream
from spectral.core import (
    Grid,
    ParityClass,
    ScalarField,
    VectorField,
    fft_forward,
    fft_inverse,
    inner_product,
    leray_project,
    refine,
    truncate_coefficients,
)
from utils.exceptions import CFLError, ConfigError, DivergenceError, PreconditionError


def single_mode(grid):
    phi = ScalarField.from_values(np.sin(grid.x1) * np.sin(grid.x2), grid)
    return from_stream(phi, ParityClass.VELOCITY_LIKE)


def wide_state(grid):
    # a velocity_like field with most of its mass outside the core
    g = np.exp(-0.5 * grid.radius**2 / 1.5**2)
    phi = ScalarField.from_values(grid.x1 * grid.x2 * g, grid)
    return State(from_stream(phi, ParityClass.VELOCITY_LIKE), VectorField.zeros(grid, ParityClass.MAGNETIC_LIKE))


def linear_energy_rate(state, derived):
    u_t, b_t = derived
    return 2.0 * inner_product(state.u, u_t) + 2.0 * inner_product(state.b, b_t)


class TestForcing:
    def test_self_interaction_vanishes(self, velocity):
        assert not np.any(compute_F(velocity, velocity).coefficients)
        assert not np.any(compute_G(velocity, velocity).coefficients)

    def test_g_is_antisymmetric(self, velocity, magnetic):
        assert np.array_equal(compute_G(magnetic, velocity).coefficients, -compute_G(velocity, magnetic).coefficients)

    def test_classes_of_the_forcings(self, velocity, magnetic):
        f = compute_F(velocity, magnetic)
        g = compute_G(velocity, magnetic)
        assert f.parity is ParityClass.VELOCITY_LIKE
        assert g.parity is ParityClass.MAGNETIC_LIKE
        assert parity_error(f, ParityClass.VELOCITY_LIKE) < 1e-12
        assert parity_error(g, ParityClass.MAGNETIC_LIKE) < 1e-12

    def test_matches_an_alias_free_evaluation(self, grid, velocity):
        fine = refine(velocity, 2)
        g = fine.grid
        c = fine.coefficients
        u = fine.values
        grad = [fft_inverse(1j * k * c) for k in (g.k1, g.k2)]
        advection = u[0] * grad[0] + u[1] * grad[1]
        expected = grid.dealias_mask * truncate_coefficients(-fft_forward(advection), grid.n)
        f = compute_F(velocity, VectorField.zeros(grid, ParityClass.MAGNETIC_LIKE))
        assert np.allclose(f.coefficients, expected, atol=1e-14 * np.max(np.abs(expected)))


class TestRhs:
    def test_equilibrium(self, grid):
        for derivative in rhs(State.zeros(grid)):
            assert not np.any(derivative.coefficients)
        for derivative in linearized_rhs(State.zeros(grid)):
            assert not np.any(derivative.coefficients)

    def test_b_rate_without_b(self, grid, velocity):
        state = State(velocity, VectorField.zeros(grid, ParityClass.MAGNETIC_LIKE))
        _, b_t = rhs(state)
        expected = leray_project(-d_theta(velocity))
        assert np.allclose(b_t.coefficients, expected.coefficients, atol=1e-18)

    def test_nonlinear_part_is_the_projected_forcing(self, state):
        full = rhs(state)
        linear = linearized_rhs(state)
        f = leray_project(compute_F(state.u, state.b))
        g = leray_project(compute_G(state.u, state.b))
        assert np.allclose(full[0].coefficients - linear[0].coefficients, f.coefficients, atol=1e-17)
        assert np.allclose(full[1].coefficients - linear[1].coefficients, g.coefficients, atol=1e-17)

    def test_outputs_stay_in_their_classes(self, state):
        u_t, b_t = rhs(state)
        assert parity_error(u_t, ParityClass.VELOCITY_LIKE) < 1e-12
        assert parity_error(b_t, ParityClass.MAGNETIC_LIKE) < 1e-12
        assert u_t.divergence_free and b_t.divergence_free

    @pytest.mark.parametrize("evaluate", [linearized_rhs, rhs])
    def test_energy_identity(self, state, evaluate):
        # coupling and quadratic terms exchange energy without creating any
        dissipation = 2.0 * gradient_squared(state.u.coefficients, state.grid, 0)
        rate = linear_energy_rate(state, evaluate(state))
        assert abs(rate + dissipation) < 1e-8 * dissipation


class TestStep:
    def test_zero_state_stays_zero(self, grid):
        out = step(State.zeros(grid), SolverConfig())
        assert out.t == pytest.approx(1e-3)
        assert not np.any(out.u.coefficients)
        assert not np.any(out.b.coefficients)

    def test_pure_diffusion_of_a_single_mode(self, grid):
        u = single_mode(grid)
        cfg = SolverConfig(dt=0.05, linear=True, background_coupling=False)
        out = step(State(u, VectorField.zeros(grid, ParityClass.MAGNETIC_LIKE)), cfg)
        # |k|^2 = 2 for sin(x1) sin(x2)
        factor = (1.0 - 0.05) / (1.0 + 0.05)
        assert np.allclose(out.u.coefficients, factor * u.coefficients, atol=1e-15)
        assert not np.any(out.b.coefficients)

    def test_cfl_violation_suggests_a_step(self, state):
        with pytest.raises(CFLError) as info:
            step(state, SolverConfig(dt=0.5))
        assert 0 < info.value.suggested_dt < 0.5

    def test_midpoint_iteration_must_settle(self, state, monkeypatch):
        monkeypatch.setattr(solver, "MIDPOINT_ITERATIONS", 1)
        with pytest.raises(DivergenceError):
            step(state, SolverConfig())

    def test_second_order_in_time(self, state):
        def final(dt):
            return simulate(state, SolverConfig(dt=dt, t_end=0.02, sample_stride=1000)).samples[-1]

        reference = final(2.5e-4)

        def error(dt):
            s = final(dt)
            return np.sqrt(
                sobolev_norm(s.u - reference.u, 0) ** 2 + sobolev_norm(s.b - reference.b, 0) ** 2
            )

        ratio = error(2e-3) / error(1e-3)
        assert 3.2 < ratio < 4.8


class TestSimulate:
    def test_zero_duration(self, state):
        traj = simulate(state, SolverConfig(t_end=0.0))
        assert len(traj) == 1
        assert traj.samples[0] is state
        assert traj.metadata["steps"] == 0
        assert traj.abort_reason is None

    def test_sampling(self, state):
        traj = simulate(state, SolverConfig(dt=1e-3, t_end=0.012, sample_stride=5))
        assert np.array_equal(traj.times, np.array([0, 5, 10, 12]) * 1e-3)
        assert len(traj.derived) == len(traj.integrals["dissipation"]) == len(traj.leakage) == 4
        assert traj.integrals["dissipation"][0] == 0.0
        assert np.all(np.diff(traj.integrals["dissipation"]) > 0)

    def test_parity_persists_without_enforcement(self, state):
        traj = simulate(state, SolverConfig(t_end=0.05, sample_stride=10, parity_enforcement=False))
        assert traj.metadata["steps"] == 50
        for err_u, err_b in traj.parity_drift:
            assert err_u < 1e-10 and err_b < 1e-10

    def test_restart_matches_a_direct_run(self, state):
        cfg = SolverConfig(t_end=0.01, sample_stride=5)
        first = simulate(state, cfg)
        resumed = simulate(first.samples[-1], replace(cfg, t_end=0.02))
        direct = simulate(state, replace(cfg, t_end=0.02))
        a, b = resumed.samples[-1], direct.samples[-1]
        assert a.t == pytest.approx(b.t)
        scale = np.max(np.abs(b.u.coefficients))
        assert np.allclose(a.u.coefficients, b.u.coefficients, atol=1e-10 * scale)
        assert np.allclose(a.b.coefficients, b.b.coefficients, atol=1e-10 * scale)

    def test_leakage_aborts_the_run(self, grid):
        traj = simulate(wide_state(grid), SolverConfig(t_end=0.01))
        assert len(traj) == 0
        assert "leakage" in traj.abort_reason

    def test_observer_sees_every_sample(self, state):
        seen = []
        simulate(state, SolverConfig(t_end=0.01, sample_stride=2), observer=lambda traj: seen.append(len(traj)))
        assert seen == [1, 2, 3, 4, 5, 6]

    @pytest.mark.parametrize("dt", [2e-3, 1e-3])
    def test_energy_law_holds_to_round_off(self, state, dt):
        traj = simulate(state, SolverConfig(dt=dt, t_end=0.02, sample_stride=5))
        assert traj.abort_reason is None
        assert np.max(energy_law_drift(traj)) < 1e-10

    def test_linear_energy_identity_along_a_run(self, state):
        traj = simulate(state, SolverConfig(t_end=0.02, sample_stride=5, linear=True))
        for sample, derived in zip(traj.samples, traj.derived):
            dissipation = 2.0 * gradient_squared(sample.u.coefficients, sample.grid, 0)
            assert abs(linear_energy_rate(sample, derived) + dissipation) < 1e-8 * dissipation


class TestStateAndConfig:
    def test_state_validation(self, velocity, magnetic):
        State(velocity, magnetic).validate()
        with pytest.raises(PreconditionError):
            State(magnetic, velocity).validate()

    def test_solver_config_lists_every_problem(self):
        with pytest.raises(ConfigError) as info:
            SolverConfig(dt=0.0, cfl_safety=2.0, sample_stride=0)
        assert len(info.value.violations) == 3

    def test_trajectory_times_must_increase(self, state):
        traj = Trajectory()
        traj.append(state, (state.u, state.b))
        with pytest.raises(PreconditionError):
            traj.append(state, (state.u, state.b))

    def test_prefix(self, state):
        traj = simulate(state, SolverConfig(t_end=0.01, sample_stride=2))
        head = traj.prefix(3)
        assert len(head) == 3
        assert np.array_equal(head.times, traj.times[:3])
        assert head.integrals["dissipation"] == traj.integrals["dissipation"][:3]


class TestWaveResidual:
    def test_zero_trajectory(self, grid):
        traj = simulate(State.zeros(grid), SolverConfig(t_end=3e-3, sample_stride=1))
        assert wave_residual(traj, 1) == 0.0
        assert wave_residual(traj, 2, component="b") == 0.0

    def test_needs_two_neighbours(self, state):
        traj = simulate(state, SolverConfig(t_end=2e-3, sample_stride=1))
        with pytest.raises(PreconditionError):
            wave_residual(traj, 0)
        with pytest.raises(PreconditionError):
            wave_residual(traj, 1, component="q")

    def test_converges_at_second_order_in_the_spacing(self, state):
        cfg = SolverConfig(dt=5e-4, t_end=4e-3, linear=True)
        wide = simulate(state, replace(cfg, sample_stride=4))
        narrow = simulate(state, replace(cfg, sample_stride=2))
        # both evaluated at t = 2e-3
        assert wide.times[1] == pytest.approx(narrow.times[2])
        ratio = wave_residual(wide, 1) / wave_residual(narrow, 2)
        assert 2.5 < ratio < 5.5
        assert wave_residual(wide, 1, "b") > wave_residual(narrow, 2, "b")

    def test_small_data_residual_on_the_default_box(self):
        grid = Grid(n=128, box_half_length=12.0)
        envelope = Envelope(width=0.25)
        state = State(
            random_symmetric_field(21, envelope, ParityClass.VELOCITY_LIKE, 1e-2, grid),
            random_symmetric_field(22, envelope, ParityClass.MAGNETIC_LIKE, 1e-2, grid),
        )
        traj = simulate(state, SolverConfig(dt=5e-4, t_end=2e-3, sample_stride=1))
        assert not traj.linear
        for index in (1, 2, 3):
            assert wave_residual(traj, index, "u") < 1e-4
            assert wave_residual(traj, index, "b") < 1e-4


class TestDispersion:
    def test_double_root(self):
        assert dispersion_roots(2.0, 1) == (complex(-1.0), complex(-1.0))

    def test_zero_angular_mode_does_not_decay(self):
        plus, minus = dispersion_roots(3.0, 0)
        assert plus == 0
        assert minus == pytest.approx(-3.0)

    @given(k2=st.floats(min_value=0.0, max_value=1e3), n=st.integers(min_value=0, max_value=60))
    @settings(max_examples=200, deadline=None)
    def test_vieta(self, k2, n):
        plus, minus = dispersion_roots(k2, n)
        assert plus + minus == pytest.approx(-k2, rel=1e-14, abs=1e-14)
        assert plus * minus == pytest.approx(n * n, rel=1e-13, abs=1e-14)
        for root in (plus, minus):
            if root.imag == 0:
                assert root.real <= 0
                if n != 0 and k2 > 0:
                    assert root.real < 0
