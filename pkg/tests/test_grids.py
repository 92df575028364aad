import numpy as np
import pytest
import scipy.integrate
from hypothesis import given
from hypothesis import strategies as st

from relblur import (
    InvalidParameterError,
    RadialGrid,
    make_quadrature_vector,
    make_radial_grid,
    make_sigma_grid,
    required_patch_side,
)


class TestRadialGrid:
    def test_midpoints_n100(self):
        grid = make_radial_grid(100)
        # independent oracle: accumulate midpoints one by one
        expected = [(k + 0.5) * (5.0 / 100) for k in range(100)]
        np.testing.assert_allclose(grid.points, expected, rtol=0, atol=1e-15)
        assert grid.points[0] == pytest.approx(0.025)
        assert grid.points[-1] == pytest.approx(4.975)
        assert np.allclose(np.diff(grid.points), 0.05, atol=1e-12)

    def test_two_points(self):
        grid = make_radial_grid(2)
        np.testing.assert_allclose(grid.points, [1.25, 3.75])

    def test_bound_and_spacing_n100(self):
        grid = make_radial_grid(100)
        assert grid.points[-1] <= 5.0
        assert np.all(np.abs(np.diff(grid.points) - 0.05) < 1e-12)

    @pytest.mark.parametrize("n", [1, 0, -3])
    def test_rejects_small_n(self, n):
        with pytest.raises(InvalidParameterError):
            make_radial_grid(n)

    @given(st.integers(min_value=2, max_value=2000))
    def test_invariants(self, n):
        grid = make_radial_grid(n)
        assert len(grid.points) == n
        assert np.all(grid.points > 0)
        assert np.all(grid.points <= grid.r_max)
        spacing = np.diff(grid.points)
        assert np.all(spacing > 0)
        assert np.ptp(spacing) <= 1e-12 * spacing[0]


class TestSigmaGrid:
    def test_default_range(self):
        grid = make_sigma_grid(50, 0.1, 5.0)
        assert grid.sigmas[0] == pytest.approx(0.1)
        assert grid.sigmas[-1] == pytest.approx(5.0)
        assert grid.spacing == pytest.approx(0.1)

    def test_endpoints_only(self):
        grid = make_sigma_grid(2, 1.0, 2.0)
        np.testing.assert_allclose(grid.sigmas, [1.0, 2.0])

    def test_rejects_zero_floor(self):
        with pytest.raises(InvalidParameterError):
            make_sigma_grid(11, 0.0, 1.0)

    @pytest.mark.parametrize("args", [(1, 0.1, 5.0), (5, 2.0, 1.0), (5, -1.0, 1.0)])
    def test_rejects_bad_params(self, args):
        with pytest.raises(InvalidParameterError):
            make_sigma_grid(*args)

    @given(
        st.integers(min_value=2, max_value=500),
        st.floats(min_value=1e-3, max_value=10.0),
        st.floats(min_value=1e-3, max_value=10.0),
    )
    def test_invariants(self, m, lo, span):
        hi = lo + span
        grid = make_sigma_grid(m, lo, hi)
        assert grid.m == m
        assert grid.sigmas[0] > 0
        spacing = np.diff(grid.sigmas)
        assert np.all(spacing > 0)
        # uniform up to the float granularity of the sigma values
        slack = max(1e-12 * spacing[0], 8 * np.finfo(float).eps * hi)
        assert np.ptp(spacing) <= slack


class TestQuadrature:
    def test_formula_per_point(self):
        grid = make_radial_grid(100)
        quad = make_quadrature_vector(grid)
        # direct scalar evaluation at the abscissa closest to 2.975
        n = int(np.argmin(np.abs(grid.points - 2.975)))
        assert grid.points[n] == pytest.approx(2.975)
        expected = 5.0 * 2.975 * np.exp(-(2.975**2) / 2.0) / 100
        assert quad.values[n] == pytest.approx(expected, rel=1e-12)

    def test_sum_matches_adaptive_integration(self):
        quad = make_quadrature_vector(make_radial_grid(100))
        target, _ = scipy.integrate.quad(lambda r: r * np.exp(-r * r / 2.0), 0.0, 5.0)
        assert abs(quad.total - target) < 1e-3

    def test_nonnegative_and_peak_near_one(self):
        for n in (10, 57, 100, 333):
            quad = make_quadrature_vector(make_radial_grid(n))
            assert np.all(quad.values >= 0)
            peak_r = quad.grid.points[np.argmax(quad.values)]
            # integrand r*exp(-r^2/2) peaks at r=1
            assert abs(peak_r - 1.0) <= quad.grid.spacing

    @given(st.integers(min_value=50, max_value=1000))
    def test_total_near_unit_mass(self, n):
        # the midpoint rule overshoots the unit mass by O(1/N^2)
        quad = make_quadrature_vector(make_radial_grid(n))
        assert 0.95 <= quad.total <= 1.0 + 2e-3


class TestRequiredPatchSide:
    def test_default_grids(self):
        side = required_patch_side(make_sigma_grid(50, 0.1, 5.0), make_radial_grid(100))
        assert side == 51

    def test_small_sigma(self):
        side = required_patch_side(make_sigma_grid(2, 0.1, 0.5), make_radial_grid(10))
        assert side == 7

    def test_custom_radial_bound(self):
        grid = RadialGrid(points=np.array([0.125, 0.375]), r_max=0.5, n=2)
        side = required_patch_side(make_sigma_grid(2, 0.5, 1.0), grid)
        assert side == 3

    @given(st.integers(min_value=2, max_value=40), st.floats(min_value=0.2, max_value=6.0))
    def test_always_odd_and_covering(self, m, sigma_max):
        sg = make_sigma_grid(m, 0.1, 0.1 + sigma_max)
        rg = make_radial_grid(10)
        side = required_patch_side(sg, rg)
        assert side % 2 == 1
        assert side >= 2 * sg.sigma_max * rg.r_max
