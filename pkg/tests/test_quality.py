import math

import numpy as np
import pytest

from batchlens.quality import gaussian_window, psnr, quality_report, ssim

from oracles import ssim_oracle


class TestPsnr:
    def test_identical_images_are_infinite(self):
        x = np.random.default_rng(0).random((8, 8))
        assert psnr(x, x) == math.inf

    def test_uniform_difference_of_point_one(self):
        a = np.zeros((8, 8))
        b = np.full((8, 8), 0.1)
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)

    def test_strictly_decreasing_in_mse(self):
        a = np.zeros((8, 8))
        values = [psnr(a, np.full((8, 8), d)) for d in (0.05, 0.1, 0.2, 0.4)]
        assert all(x > y for x, y in zip(values, values[1:]))

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        a, b = rng.random((8, 8)), rng.random((8, 8))
        assert psnr(a, b) == psnr(b, a)

    def test_nonnegative_for_unit_range(self):
        assert psnr(np.zeros((4, 4)), np.ones((4, 4))) == pytest.approx(0.0, abs=1e-12)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            psnr(np.zeros((4, 4)), np.zeros((4, 5)))


class TestSsim:
    def test_identity_is_exactly_one(self):
        x = np.random.default_rng(2).random((16, 16))
        assert ssim(x, x) == 1.0

    def test_inversion_scores_below_identity(self):
        x = 0.25 + 0.5 * np.random.default_rng(3).random((16, 16))
        assert ssim(x, 1.0 - x) < ssim(x, x)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        a, b = rng.random((16, 16)), rng.random((16, 16))
        assert ssim(a, b) == pytest.approx(ssim(b, a), rel=1e-12)

    def test_range(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a, b = rng.random((12, 12)), rng.random((12, 12))
            assert -1.0 <= ssim(a, b) <= 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_window_oracle(self, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.random((16, 16)), rng.random((16, 16))
        assert ssim(a, b) == pytest.approx(ssim_oracle(a, b), abs=1e-7)

    def test_channel_averaging(self):
        rng = np.random.default_rng(6)
        a = rng.random((16, 16, 3))
        b = rng.random((16, 16, 3))
        per_channel = [ssim(a[:, :, c], b[:, :, c]) for c in range(3)]
        assert ssim(a, b) == pytest.approx(np.mean(per_channel), rel=1e-12)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError, match="small"):
            ssim(np.zeros((8, 8)), np.zeros((8, 8)))

    def test_window_normalized(self):
        assert gaussian_window().sum() == pytest.approx(1.0, rel=1e-12)


class TestQualityReport:
    def test_fields(self):
        rng = np.random.default_rng(7)
        a, b = rng.random((16, 16)), rng.random((16, 16))
        report = quality_report(a, b)
        assert report.psnr == psnr(a, b)
        assert report.ssim == ssim(a, b)
