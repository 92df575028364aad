import numpy as np
import pytest
from scipy.signal import fftconvolve

from relblur import (
    EmptyDomainError,
    ShapeError,
    estimate_blur_map,
    gaussian_kernel,
    image_mae,
    reconstruction_report,
    spatially_varying_convolve,
    varying_gaussian_blur,
)
from relblur.estimation import BlurMap
from relblur.grids import make_sigma_grid


def make_blur_map(sigma, valid):
    grid = make_sigma_grid(50, 0.1, 5.0)
    return BlurMap(
        sigma=np.where(valid, sigma, np.nan),
        valid=valid,
        residual=np.zeros_like(sigma),
        floored=np.zeros_like(valid),
        sigma_grid=grid,
    )


def global_blur_reference(image, sigma):
    """Independent route: pad + FFT convolution with one sampled kernel."""
    kernel = gaussian_kernel(sigma)
    reach = kernel.shape[0] // 2
    padded = np.pad(image, reach, mode="edge")
    full = fftconvolve(padded, kernel, mode="same")
    return full[reach : reach + image.shape[0], reach : reach + image.shape[1]]


class TestSpatiallyVaryingConvolve:
    def test_all_invalid_copies_input(self, moon):
        image = moon[:64, :64]
        blur = make_blur_map(np.full(image.shape, np.nan), np.zeros(image.shape, dtype=bool))
        out = spatially_varying_convolve(image, blur)
        np.testing.assert_array_equal(out, image)

    def test_constant_sigma_equals_global_convolution(self, moon):
        image = moon[:96, :96]
        blur = make_blur_map(np.full(image.shape, 2.0), np.ones(image.shape, dtype=bool))
        out = spatially_varying_convolve(image, blur)
        ref = global_blur_reference(image, 2.0)
        np.testing.assert_allclose(out, ref, atol=1e-9)

    def test_constant_image_fixed_point(self):
        image = np.full((48, 48), 0.61)
        sigma = np.linspace(0.5, 3.0, 48)[:, None] * np.ones((1, 48))
        blur = make_blur_map(sigma, np.ones(image.shape, dtype=bool))
        out = spatially_varying_convolve(image, blur)
        np.testing.assert_allclose(out, 0.61, atol=1e-6)

    def test_invalid_region_untouched(self, moon):
        image = moon[:64, :64]
        valid = np.zeros(image.shape, dtype=bool)
        valid[:32] = True
        blur = make_blur_map(np.full(image.shape, 1.5), valid)
        out = spatially_varying_convolve(image, blur)
        np.testing.assert_array_equal(out[32:], image[32:])
        assert not np.array_equal(out[:32], image[:32])

    def test_output_clamped(self):
        image = np.ones((32, 32))
        blur = make_blur_map(np.full(image.shape, 1.0), np.ones(image.shape, dtype=bool))
        out = spatially_varying_convolve(image, blur)
        assert out.max() <= 1.0 and out.min() >= 0.0

    def test_shape_mismatch(self):
        blur = make_blur_map(np.full((8, 8), 1.0), np.ones((8, 8), dtype=bool))
        with pytest.raises(ShapeError):
            spatially_varying_convolve(np.zeros((9, 9)), blur)

    def test_engine_rejects_bad_sigma(self):
        with pytest.raises(ShapeError):
            varying_gaussian_blur(np.zeros((8, 8)), np.zeros((8, 8)))


class TestImageMae:
    def test_identical(self):
        a = np.random.default_rng(0).uniform(size=(16, 16))
        assert image_mae(a, a) == 0.0

    def test_constant_offset(self):
        a = np.random.default_rng(1).uniform(0.2, 0.8, size=(16, 16))
        assert image_mae(a, a + 0.01) == pytest.approx(0.01, abs=1e-12)

    def test_masked(self):
        a = np.zeros((4, 4))
        b = np.ones((4, 4))
        mask = np.zeros((4, 4), dtype=bool)
        mask[0, 0] = True
        assert image_mae(a, b, mask) == 1.0

    def test_empty_mask(self):
        with pytest.raises(EmptyDomainError):
            image_mae(np.zeros((4, 4)), np.zeros((4, 4)), np.zeros((4, 4), dtype=bool))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            image_mae(np.zeros((4, 4)), np.zeros((5, 4)))


class TestReconstructionReport:
    def test_round_trip_on_grid(self, small_framework, moon):
        sg, _, weights, quadrature = small_framework
        left = moon[32:128, 32:128]
        true_sigma = sg.sigmas[4]
        right = varying_gaussian_blur(left, np.full(left.shape, true_sigma))
        blur = estimate_blur_map(left, right, weights, quadrature)
        report = reconstruction_report(left, right, blur)
        assert report.mae <= report.max_abs
        assert 0 < report.evaluated_fraction <= 1
        assert report.mae <= 2e-4
        assert set(report.to_dict()) == {"mae", "max_abs", "evaluated_fraction"}

    def test_no_valid_pixels(self):
        image = np.full((8, 8), 0.5)
        blur = make_blur_map(np.full((8, 8), np.nan), np.zeros((8, 8), dtype=bool))
        with pytest.raises(EmptyDomainError):
            reconstruction_report(image, image, blur)
