import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gaussian
from fields.stream import from_stream
from spectral.core import (
    PHYSICAL,
    SPECTRAL,
    Grid,
    ScalarField,
    VectorField,
    curl,
    dealias,
    derivative,
    divergence,
    forward_transform,
    fractional_multiplier,
    gradient,
    helmholtz_solve,
    inner_product,
    inverse_transform,
    l2_norm,
    laplacian,
    leray_project,
    leray_project_coefficients,
    pad_coefficients,
    refine,
    truncate_coefficients,
)
from utils.exceptions import ConfigError, PreconditionError


def random_field(grid, seed=0, zero_mean=True):
    values = np.random.default_rng(seed).standard_normal(grid.shape)
    f = dealias(ScalarField.from_values(values, grid))
    if zero_mean:
        c = f.coefficients.copy()
        c[0, 0] = 0.0
        f = f.with_coefficients(c)
    return f


def random_vector(grid, seed=0):
    rng = np.random.default_rng(seed)
    v = VectorField.from_values(grid, rng.standard_normal((2,) + grid.shape))
    return dealias(v)


class TestGrid:
    def test_every_problem_is_reported(self):
        with pytest.raises(ConfigError) as info:
            Grid(n=48, dealias_fraction=0.0)
        assert len(info.value.violations) == 2

    def test_window_radii_must_be_ordered(self):
        with pytest.raises(ConfigError):
            Grid(n=32, window_core_fraction=0.9, window_outer_fraction=0.85)

    def test_axis_is_symmetric(self, grid):
        assert grid.axis[0] == pytest.approx(-np.pi)
        assert np.array_equal(grid.axis[1:], -grid.axis[:0:-1])

    def test_dealias_mask_is_strict(self, grid):
        mask = grid.dealias_mask
        assert np.all(grid.k_abs[mask] < grid.dealias_radius)
        assert not mask[grid.n // 2, 0]
        assert mask[0, 0]

    def test_refined_keeps_the_box(self, grid):
        fine = grid.refined(2)
        assert fine.n == 2 * grid.n
        assert fine.box_half_length == grid.box_half_length
        assert fine.dx == pytest.approx(grid.dx / 2)


class TestTransforms:
    def test_constant_lands_in_the_zero_mode(self, grid):
        f = ScalarField.from_values(np.full(grid.shape, 3.5), grid)
        c = f.coefficients
        assert c[0, 0] == pytest.approx(3.5)
        c[0, 0] = 0.0
        assert np.max(np.abs(c)) < 1e-14

    def test_transforms_switch_the_representation(self, grid):
        f = gaussian(grid)
        spectral = forward_transform(f)
        assert spectral.space == SPECTRAL
        assert forward_transform(spectral) is spectral
        physical = inverse_transform(spectral)
        assert physical.space == PHYSICAL
        assert np.allclose(physical.values, f.values, atol=1e-14)

    def test_forward_transform_needs_real_samples(self, grid):
        with pytest.raises(PreconditionError):
            forward_transform(ScalarField(np.full(grid.shape, 1j), grid, PHYSICAL))

    @given(L=st.floats(min_value=0.5, max_value=2.0), m=st.integers(min_value=1, max_value=8))
    @settings(max_examples=20, deadline=None)
    def test_derivative_of_a_sine(self, L, m):
        g = Grid(n=32, box_half_length=L)
        f = ScalarField.from_values(np.sin(m * g.x1 / L), g)
        assert np.allclose(derivative(f, 0).values, m * np.cos(m * g.x1 / L) / L, atol=1e-11)
        assert np.allclose(derivative(f, 1).values, 0.0, atol=1e-11)

    def test_parseval(self, grid):
        f = ScalarField.from_values(np.sin(grid.x1), grid)
        assert l2_norm(f) == pytest.approx(2.0 * np.pi / np.sqrt(2.0), rel=1e-12)
        values = random_field(grid, seed=3).values
        assert l2_norm(random_field(grid, seed=3)) == pytest.approx(
            np.sqrt(np.sum(values**2) * grid.dx**2), rel=1e-12
        )

    def test_laplacian_of_a_product_mode(self, grid):
        f = ScalarField.from_values(np.sin(2 * grid.x1) * np.sin(3 * grid.x2), grid)
        assert np.allclose(laplacian(f).values, -13.0 * f.values, atol=1e-11)

    def test_fields_on_different_grids_do_not_mix(self, grid):
        other = Grid(n=32)
        with pytest.raises(ConfigError):
            inner_product(random_field(grid), random_field(other))


class TestMultipliers:
    @given(s=st.floats(min_value=-2.0, max_value=2.0))
    @settings(max_examples=25, deadline=None)
    def test_opposite_orders_cancel(self, s):
        g = Grid(n=32)
        f = random_field(g, seed=1)
        back = fractional_multiplier(fractional_multiplier(f, s), -s)
        assert np.allclose(back.coefficients, f.coefficients, atol=1e-13)

    def test_negative_order_needs_zero_mean(self, grid):
        f = random_field(grid, zero_mean=False)
        with pytest.raises(PreconditionError):
            fractional_multiplier(f, -0.5)

    def test_helmholtz_inverts_its_operator(self, grid):
        f = random_field(grid, seed=2, zero_mean=False)
        u = helmholtz_solve(f, 0.3)
        assert np.allclose((u - laplacian(u).scaled(0.3)).coefficients, f.coefficients, atol=1e-14)
        with pytest.raises(PreconditionError):
            helmholtz_solve(f, -1.0)


class TestLeray:
    def test_projection_is_idempotent_and_solenoidal(self, grid):
        v = random_vector(grid, seed=4)
        p = leray_project(v)
        assert p.divergence_free
        assert np.allclose(leray_project(p).coefficients, p.coefficients, atol=1e-15)
        assert np.max(np.abs(divergence(p).coefficients)) < 1e-12

    def test_field_and_coefficient_forms_agree(self, grid):
        v = random_vector(grid, seed=9)
        assert np.array_equal(leray_project(v).coefficients, leray_project_coefficients(v.coefficients, grid))

    def test_gradients_are_removed(self, grid):
        p = leray_project(gradient(gaussian(grid)))
        assert np.max(np.abs(p.coefficients)) < 1e-14

    def test_stream_fields_pass_through(self, grid):
        v = from_stream(random_field(grid, seed=5))
        assert np.allclose(leray_project(v).coefficients, v.coefficients, atol=1e-15)

    def test_curl_of_a_stream_field_is_its_laplacian(self, grid):
        phi = random_field(grid, seed=8)
        assert np.allclose(curl(from_stream(phi)).coefficients, laplacian(phi).coefficients, atol=1e-12)


class TestRefine:
    def test_coarse_points_are_interpolated_exactly(self, grid):
        f = random_field(grid, seed=6, zero_mean=False)
        fine = refine(f, 2)
        assert fine.grid.n == 2 * grid.n
        assert np.allclose(fine.values[::2, ::2], f.values, atol=1e-12)

    def test_truncation_undoes_padding(self, grid):
        c = random_field(grid, seed=7).coefficients
        assert np.array_equal(truncate_coefficients(pad_coefficients(c, 4 * grid.n), grid.n), c)
