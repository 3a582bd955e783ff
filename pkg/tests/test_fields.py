import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gaussian
from diagnostics.norms import sobolev_norm
from dynamics.state import relative_divergence
from fields.angular import zero_angular_mode
from fields.background import (
    background_for,
    core_leakage,
    d_theta,
    full_from_perturbation,
    perturbation_from_full,
    window_profile,
    window_slope,
)
from fields.generators import Envelope, random_symmetric_field, smallness_norm, smooth_cutoff
from fields.parity import parity_error, parity_project
from fields.stream import from_stream, to_stream
from spectral.core import (
    Grid,
    ParityClass,
    ScalarField,
    VectorField,
    dealias,
    fractional_multiplier,
    inner_product,
    l2_norm,
    laplacian,
)
from utils.exceptions import PreconditionError, TruncationError


def random_vector(grid, seed):
    values = np.random.default_rng(seed).standard_normal((2,) + grid.shape)
    return dealias(VectorField.from_values(grid, values))


class TestStream:
    def test_product_of_sines(self, grid):
        phi = ScalarField.from_values(np.sin(grid.x1) * np.sin(grid.x2), grid)
        v = from_stream(phi, ParityClass.VELOCITY_LIKE)
        expected = np.stack([-np.sin(grid.x1) * np.cos(grid.x2), np.cos(grid.x1) * np.sin(grid.x2)])
        assert np.allclose(v.values, expected, atol=1e-13)
        assert v.divergence_free
        assert parity_error(v, ParityClass.VELOCITY_LIKE) < 1e-14

    def test_zero_stream(self, grid):
        v = from_stream(ScalarField.zeros(grid))
        assert not np.any(v.coefficients)

    def test_stream_is_recovered(self, grid):
        phi = dealias(gaussian(grid, width=0.4, center=(0.3, -0.2)))
        c = phi.coefficients.copy()
        c[0, 0] = 0.0
        phi = phi.with_coefficients(c)
        assert np.allclose(to_stream(from_stream(phi)).coefficients, c, atol=1e-15)


class TestParity:
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1), parity=st.sampled_from(list(ParityClass)))
    @settings(max_examples=20, deadline=None)
    def test_projection_is_an_orthogonal_projection(self, seed, parity):
        g = Grid(n=32)
        v = random_vector(g, seed)
        p = parity_project(v, parity)
        assert p.parity is parity
        assert np.allclose(parity_project(p, parity).coefficients, p.coefficients, atol=1e-15)
        assert l2_norm(p) <= l2_norm(v) * (1 + 1e-12)
        # the two classes are orthogonal
        q = parity_project(v, parity.opposite)
        assert abs(np.sum(np.conj(p.coefficients) * q.coefficients)) < 1e-12 * np.sum(np.abs(v.coefficients) ** 2)

    def test_opposite_class_projects_to_zero(self, velocity):
        p = parity_project(velocity, ParityClass.MAGNETIC_LIKE)
        assert l2_norm(p) < 1e-14 * l2_norm(velocity)
        assert parity_error(velocity, ParityClass.MAGNETIC_LIKE) == pytest.approx(1.0)

    def test_zero_field_has_no_parity_error(self, grid):
        assert parity_error(VectorField.zeros(grid), ParityClass.VELOCITY_LIKE) == 0.0


class TestWindow:
    def test_profile_is_a_c2_blend(self):
        r = np.array([0.0, 1.0, 2.0])
        assert np.allclose(window_profile(r, 1.0, 2.0), [1.0, 1.0, 0.0])
        assert np.allclose(window_slope(r, 1.0, 2.0), 0.0)
        assert window_profile(np.array([1.5]), 1.0, 2.0)[0] == pytest.approx(0.5)

    def test_background_is_exact_on_the_core(self, grid):
        bg = background_for(grid)
        core = grid.core_mask
        values = bg.field.values
        assert np.allclose(values[0][core], grid.x2[core], atol=1e-12)
        assert np.allclose(values[1][core], -grid.x1[core], atol=1e-12)
        assert np.max(np.hypot(values[0], values[1])[grid.radius > grid.outer_radius]) < 1e-12

    def test_background_is_a_rigid_rotation_on_the_core(self, grid):
        jac = background_for(grid).jacobian
        core = grid.core_mask
        # vorticity of (w2, -w1) is -(d1 w1 + d2 w2) and its divergence d1 w2 - d2 w1
        assert np.allclose(-(jac[0, 0] + jac[1, 1])[core], -2.0)
        assert np.array_equal(jac[0, 1], jac[1, 0])

    def test_full_and_perturbation_fields(self, grid, magnetic):
        bg = background_for(grid)
        full = full_from_perturbation(magnetic, bg)
        assert full.parity is ParityClass.MAGNETIC_LIKE
        assert np.allclose(perturbation_from_full(full, bg).coefficients, magnetic.coefficients, atol=1e-14)


class TestAngularDerivative:
    def test_radial_functions_are_annihilated(self, grid):
        assert np.max(np.abs(d_theta(gaussian(grid, width=0.4)).values)) < 1e-10

    def test_rotates_x1_into_minus_x2(self, grid):
        g = gaussian(grid, width=0.4).values
        f = ScalarField.from_values(grid.x1 * g, grid)
        core = grid.core_mask
        assert np.allclose(d_theta(f).values[core], (-grid.x2 * g)[core], atol=1e-9)

    def test_swaps_the_symmetry_classes(self, velocity, magnetic):
        du = d_theta(velocity)
        db = d_theta(magnetic)
        assert du.parity is ParityClass.MAGNETIC_LIKE
        assert db.parity is ParityClass.VELOCITY_LIKE
        assert parity_error(du, ParityClass.MAGNETIC_LIKE) < 1e-12
        assert parity_error(db, ParityClass.VELOCITY_LIKE) < 1e-12

    def test_commutes_with_the_laplacian(self, fine_grid):
        g = gaussian(fine_grid, width=0.35).values
        f = ScalarField.from_values((fine_grid.x1 + 2.0 * fine_grid.x2**2) * g, fine_grid)
        difference = laplacian(d_theta(f)) - d_theta(laplacian(f))
        assert l2_norm(difference) < 1e-8 * sobolev_norm(f, 3, homogeneous=False)

    @pytest.mark.parametrize("sigma", [0.0, 3.0 / 23.0])
    def test_coupling_is_skew_at_negative_order(self, velocity, magnetic, sigma):
        def lam(v):
            c = v.coefficients.copy()
            c[:, 0, 0] = 0.0
            return fractional_multiplier(v.with_coefficients(c), -sigma)

        forward = inner_product(lam(velocity), lam(d_theta(magnetic)))
        backward = inner_product(lam(magnetic), lam(d_theta(velocity)))
        scale = l2_norm(lam(velocity)) * l2_norm(lam(d_theta(magnetic)))
        assert abs(forward + backward) < 1e-3 * scale

    def test_rejects_fields_outside_the_core(self, grid):
        constant = ScalarField.from_values(np.ones(grid.shape), grid)
        assert core_leakage(constant.values, grid) > 0.4
        with pytest.raises(TruncationError):
            d_theta(constant)

    def test_marks_mild_leakage_as_approximate(self, grid):
        f = gaussian(grid, width=0.4, center=(1.2, 0.0))
        assert 1e-10 < core_leakage(f.values, grid) < 1e-4
        assert d_theta(f).approximate
        assert not d_theta(gaussian(grid, width=0.4)).approximate


class TestZeroAngularMode:
    def test_constant_field(self, grid):
        f = ScalarField.from_values(np.full(grid.shape, 2.0), grid)
        assert np.allclose(zero_angular_mode(f, [0.5, 1.0, 2.0]), 2.0, atol=1e-12)

    def test_symmetric_fields_have_no_circle_average(self, grid, velocity, magnetic):
        radii = [0.3, 0.9, 1.5]
        for v in (velocity, magnetic):
            scale = np.max(np.abs(v.values))
            assert max(zero_angular_mode(v, radii)) < 1e-12 * scale

    def test_radius_outside_the_core(self, grid, velocity):
        with pytest.raises(PreconditionError):
            zero_angular_mode(velocity, [grid.core_radius * 1.01])


class TestGenerators:
    def test_same_seed_same_field(self, grid, envelope):
        a = random_symmetric_field(5, envelope, ParityClass.VELOCITY_LIKE, 1e-2, grid)
        b = random_symmetric_field(5, envelope, ParityClass.VELOCITY_LIKE, 1e-2, grid)
        c = random_symmetric_field(6, envelope, ParityClass.VELOCITY_LIKE, 1e-2, grid)
        assert np.array_equal(a.coefficients, b.coefficients)
        assert not np.array_equal(a.coefficients, c.coefficients)

    @pytest.mark.parametrize("parity", list(ParityClass))
    def test_generated_fields_meet_every_condition(self, grid, envelope, parity):
        v = random_symmetric_field(9, envelope, parity, 3e-3, grid)
        assert v.parity is parity
        assert v.divergence_free
        assert parity_error(v, parity) < 1e-14
        assert relative_divergence(v) < 1e-12
        assert core_leakage(v.values, grid) < 1e-8
        assert smallness_norm(v) == pytest.approx(3e-3, rel=1e-12)

    @pytest.mark.parametrize("parity", list(ParityClass))
    @pytest.mark.parametrize("max_mode", [1, 2])
    def test_generated_fields_carry_no_rigid_swirl(self, grid, parity, max_mode):
        v = random_symmetric_field(4, Envelope(width=0.35, max_mode=max_mode), parity, 1e-2, grid)
        b1, b2 = v.values
        swirl = ScalarField.from_values(grid.x1 * b2 - grid.x2 * b1, grid)
        scale = np.max(np.abs(swirl.values))
        assert scale > 0
        assert max(zero_angular_mode(swirl, [0.2, 0.5, 0.8, 1.2])) < 1e-8 * scale

    def test_amplitude_must_be_positive(self, grid, envelope):
        with pytest.raises(PreconditionError):
            random_symmetric_field(0, envelope, ParityClass.VELOCITY_LIKE, 0.0, grid)

    def test_envelope_checks(self):
        with pytest.raises(PreconditionError):
            Envelope(width=0.0)
        with pytest.raises(PreconditionError):
            Envelope(max_mode=0)

    def test_smooth_cutoff(self):
        t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
        assert np.allclose(smooth_cutoff(t), [1.0, 1.0, 0.5, 0.0, 0.0])
