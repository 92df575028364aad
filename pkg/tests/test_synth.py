import numpy as np
import pytest

from relblur import (
    InvalidParameterError,
    ShapeError,
    apply_sigma_field,
    linear_sigma_field,
    synthetic_accuracy_run,
    varying_gaussian_blur,
)
from tests.test_reconstruct import global_blur_reference


class TestLinearSigmaField:
    def test_vertical_ramp(self):
        field = linear_sigma_field(32, 21, 1.0, 2.0, axis="vertical")
        assert field.values.shape == (21, 32)
        np.testing.assert_allclose(field.values[0], 1.0)
        np.testing.assert_allclose(field.values[-1], 2.0)
        np.testing.assert_allclose(field.values[10], 1.5)

    def test_horizontal_ramp(self):
        field = linear_sigma_field(21, 8, 1.0, 2.0, axis="horizontal")
        np.testing.assert_allclose(field.values[:, 0], 1.0)
        np.testing.assert_allclose(field.values[:, -1], 2.0)

    def test_constant_field(self):
        field = linear_sigma_field(10, 10, 1.3, 1.3)
        np.testing.assert_allclose(field.values, 1.3)

    @pytest.mark.parametrize(
        "args",
        [
            (0, 10, 1.0, 2.0, "vertical"),
            (10, 10, 0.0, 2.0, "vertical"),
            (10, 10, 1.0, -2.0, "vertical"),
            (10, 10, 1.0, 2.0, "diagonal"),
        ],
    )
    def test_rejects_bad_params(self, args):
        with pytest.raises(InvalidParameterError):
            linear_sigma_field(*args)

    def test_deterministic(self):
        a = linear_sigma_field(64, 48, 1.0, 2.0, axis="horizontal")
        b = linear_sigma_field(64, 48, 1.0, 2.0, axis="horizontal")
        np.testing.assert_array_equal(a.values, b.values)


class TestApplySigmaField:
    def test_constant_field_equals_global_convolution(self, moon):
        image = moon[:80, :80]
        field = linear_sigma_field(80, 80, 1.5, 1.5)
        out = apply_sigma_field(image, field)
        np.testing.assert_allclose(out, global_blur_reference(image, 1.5), atol=1e-9)

    def test_constant_image_unchanged(self):
        field = linear_sigma_field(40, 40, 1.0, 2.0)
        out = apply_sigma_field(np.full((40, 40), 0.35), field)
        np.testing.assert_allclose(out, 0.35, atol=1e-6)

    def test_shares_engine_with_reconstruction(self, moon):
        image = moon[:48, :48]
        field = linear_sigma_field(48, 48, 0.8, 1.9, axis="vertical")
        np.testing.assert_array_equal(
            apply_sigma_field(image, field),
            varying_gaussian_blur(image, field.values),
        )

    def test_shape_mismatch(self):
        field = linear_sigma_field(8, 8, 1.0, 2.0)
        with pytest.raises(ShapeError):
            apply_sigma_field(np.zeros((9, 9)), field)


class TestSyntheticAccuracyRun:
    def test_small_image_sanity(self, small_framework, moon):
        sg, _, weights, quadrature = small_framework
        image = moon[64:192, 64:192]
        field = linear_sigma_field(128, 128, 0.8, 1.8, axis="vertical")
        report = synthetic_accuracy_run(image, field, weights, quadrature)
        assert report.coverage > 0.95
        assert report.sigma_mae_percent < 6.0
        assert report.recon_mae < 1e-3
        assert set(report.to_dict()) == {"sigma_mae_percent", "recon_mae", "coverage"}
