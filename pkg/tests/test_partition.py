import csv

import numpy as np
import pytest

from relblur import (
    ShapeError,
    evaluate_pair,
    local_sharpness,
    partition_pair,
    varying_gaussian_blur,
)
from relblur.partition import fusion_view, write_evaluation_csv


def nine_sample_std(image):
    """Independent oracle: per-pixel std of the replicate-padded 3x3 window."""
    padded = np.pad(image, 1, mode="edge")
    out = np.empty_like(image, dtype=np.float64)
    h, w = image.shape
    for r in range(h):
        for c in range(w):
            out[r, c] = np.std(padded[r : r + 3, c : c + 3])
    return out


class TestLocalSharpness:
    def test_constant_is_zero(self):
        np.testing.assert_array_equal(local_sharpness(np.full((8, 8), 0.4)), 0.0)

    def test_checkerboard_against_nine_sample_oracle(self):
        y, x = np.mgrid[0:10, 0:10]
        board = ((x + y) % 2).astype(np.float64)
        expected = nine_sample_std(board)
        np.testing.assert_allclose(local_sharpness(board), expected, atol=1e-12)
        # interior windows hold five of one value and four of the other
        assert expected[5, 5] == pytest.approx(np.sqrt(180.0 / 729.0))

    def test_random_image_against_oracle(self):
        rng = np.random.default_rng(11)
        image = rng.uniform(size=(12, 15))
        np.testing.assert_allclose(local_sharpness(image), nine_sample_std(image), atol=1e-12)

    def test_blur_reduces_sharpness_at_edges(self):
        image = np.zeros((32, 32))
        image[:, 16:] = 1.0
        blurred = varying_gaussian_blur(image, np.full(image.shape, 2.0))
        sharp = local_sharpness(image)
        soft = local_sharpness(blurred)
        edge = sharp > 0.01
        assert np.mean(soft[edge] <= sharp[edge]) > 0.5

    def test_too_small_image(self):
        with pytest.raises(ShapeError):
            local_sharpness(np.zeros((2, 5)))


class TestPartitionPair:
    def test_identical_images_all_equal(self):
        rng = np.random.default_rng(12)
        image = rng.uniform(size=(24, 24))
        part = partition_pair(image, image)
        assert part.equal.all()

    def test_blurred_side_less_sharp(self):
        rng = np.random.default_rng(13)
        img_b = rng.uniform(size=(48, 48))
        img_f = varying_gaussian_blur(img_b, np.full(img_b.shape, 2.0))
        part = partition_pair(img_b, img_f)
        assert part.b_sharper.mean() > 0.8

    def test_labels_partition_every_pixel(self):
        rng = np.random.default_rng(14)
        img_b = rng.uniform(size=(20, 20))
        img_f = rng.uniform(size=(20, 20))
        part = partition_pair(img_b, img_f)
        total = part.b_sharper.sum() + part.f_sharper.sum() + part.equal.sum()
        assert total == img_b.size

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            partition_pair(np.zeros((8, 8)), np.zeros((8, 9)))


@pytest.fixture(scope="module")
def half_blur_pair(moon):
    base = moon[:128, :128]
    blurred = varying_gaussian_blur(base, np.full(base.shape, 1.5))
    img_b = base.copy()
    img_b[:, 64:] = blurred[:, 64:]
    return img_b, base.copy()


class TestEvaluatePair:
    def test_identical_pair_not_applicable(self, small_framework):
        _, _, weights, quadrature = small_framework
        image = np.random.default_rng(15).uniform(size=(32, 32))
        pe = evaluate_pair(image, image, weights, quadrature)
        assert pe.e_b is None and pe.e_f is None
        assert pe.pct_equal == 100.0

    def test_half_blur_pair(self, small_framework, half_blur_pair):
        _, _, weights, quadrature = small_framework
        img_b, img_f = half_blur_pair
        pe = evaluate_pair(img_b, img_f, weights, quadrature)
        assert pe.pct_b_sharper + pe.pct_f_sharper + pe.pct_equal == pytest.approx(100.0, abs=0.1)
        assert pe.e_b is not None and pe.e_b <= 0.02
        assert pe.resolution == (128, 128)

    def test_swap_symmetry_exact(self, small_framework, half_blur_pair):
        _, _, weights, quadrature = small_framework
        img_b, img_f = half_blur_pair
        ab = evaluate_pair(img_b, img_f, weights, quadrature)
        ba = evaluate_pair(img_f, img_b, weights, quadrature)
        assert ab.e_b == ba.e_f and ab.e_f == ba.e_b
        assert ab.pct_b_sharper == ba.pct_f_sharper
        assert ab.pct_f_sharper == ba.pct_b_sharper
        assert ab.pct_equal == ba.pct_equal
        assert ab.n_contributing_b == ba.n_contributing_f

    def test_exclusion_accounting(self, small_framework, half_blur_pair):
        _, _, weights, quadrature = small_framework
        img_b, img_f = half_blur_pair
        pe = evaluate_pair(img_b, img_f, weights, quadrature)
        non_equal = pe.partition.b_sharper.sum() + pe.partition.f_sharper.sum()
        assert pe.n_contributing_b + pe.n_contributing_f == non_equal


class TestFusionAndCsv:
    def test_fusion_regions(self):
        img_b = np.zeros((8, 8))
        img_f = np.ones((8, 8))
        part = partition_pair(np.pad(np.ones((4, 4)), 2), np.zeros((8, 8)))
        view = fusion_view(img_b, img_f, part)
        assert view[part.b_sharper].tolist() == [1.0] * int(part.b_sharper.sum())
        assert view[part.f_sharper].tolist() == [0.0] * int(part.f_sharper.sum())
        assert np.all(view[part.equal] == 0.5)

    def test_csv_output(self, small_framework, half_blur_pair, tmp_path):
        _, _, weights, quadrature = small_framework
        img_b, img_f = half_blur_pair
        pe = evaluate_pair(img_b, img_f, weights, quadrature)
        path = tmp_path / "rows.csv"
        write_evaluation_csv([("demo", pe)], path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["dataset_id", "resolution", "pct_b_sharper", "pct_f_sharper", "e_b", "e_f"]
        assert rows[1][0] == "demo"
        assert rows[1][1] == "128x128"
