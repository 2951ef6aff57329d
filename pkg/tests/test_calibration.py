import numpy as np
import pytest

from batchlens.calibration import NOISE, dbscan_1d, estimate_pivot

from oracles import dbscan_oracle, partition_of


def random_fixture(seed):
    """Values drawn from a random mixture of tight clumps and loose spread."""
    rng = np.random.default_rng(seed)
    n_clumps = rng.integers(1, 4)
    points = []
    for _ in range(n_clumps):
        center = rng.uniform(0.0, 1.0)
        width = rng.uniform(0.002, 0.08)
        count = rng.integers(2, 25)
        points.extend(rng.uniform(center - width, center + width, count))
    points.extend(rng.uniform(0.0, 1.0, rng.integers(0, 12)))
    eps = float(rng.uniform(0.01, 0.15))
    min_pts = int(rng.integers(1, 6))
    return np.clip(points, 0.0, 1.0), eps, min_pts


class TestDbscan1d:
    def test_bimodal_fixture(self):
        labels = dbscan_1d([0.10, 0.11, 0.12, 0.90], eps=0.05, min_pts=2)
        assert labels[0] == labels[1] == labels[2] == 0
        assert labels[3] == NOISE

    def test_identical_points_form_one_cluster(self):
        labels = dbscan_1d([0.4] * 6, eps=0.01, min_pts=3)
        assert set(labels.tolist()) == {0}

    def test_all_noise_when_eps_below_every_gap(self):
        labels = dbscan_1d([0.0, 0.2, 0.4, 0.6], eps=0.05, min_pts=2)
        assert set(labels.tolist()) == {NOISE}

    def test_min_pts_one_makes_every_point_core(self):
        labels = dbscan_1d([0.0, 0.5, 1.0], eps=0.01, min_pts=1)
        assert labels.tolist() == [0, 1, 2]

    def test_permutation_invariant_partition(self):
        values, eps, min_pts = random_fixture(42)
        base = partition_of(dbscan_1d(values, eps, min_pts))
        for seed in range(5):
            perm = np.random.default_rng(seed).permutation(len(values))
            labels = dbscan_1d(np.asarray(values)[perm], eps, min_pts)
            # map back to original indexing before comparing partitions
            unshuffled = np.empty(len(values), dtype=int)
            unshuffled[perm] = labels
            assert partition_of(unshuffled) == base

    def test_cluster_ids_ascend_with_value(self):
        labels = dbscan_1d([0.9, 0.91, 0.1, 0.11, 0.5, 0.51], eps=0.02, min_pts=2)
        assert labels.tolist() == [2, 2, 0, 0, 1, 1]

    @pytest.mark.parametrize("seed", range(50))
    def test_matches_expansion_oracle(self, seed):
        values, eps, min_pts = random_fixture(seed)
        got = partition_of(dbscan_1d(values, eps, min_pts))
        want = partition_of(dbscan_oracle(list(values), eps, min_pts))
        assert got == want

    def test_input_validation(self):
        with pytest.raises(ValueError):
            dbscan_1d([], 0.1, 2)
        with pytest.raises(ValueError):
            dbscan_1d([0.1], -1.0, 2)
        with pytest.raises(ValueError):
            dbscan_1d([0.1], 0.1, 0)


class TestEstimatePivot:
    def test_bimodal_fixture_with_defaults(self):
        result = estimate_pivot([0.10, 0.11, 0.12, 0.90])
        assert result.pivot == 0.10
        assert result.largest_cluster == 0
        assert result.labels.tolist() == [0, 0, 0, NOISE]

    def test_single_cluster_returns_min(self):
        values = np.linspace(0.3, 0.4, 20)
        assert estimate_pivot(values).pivot == 0.3

    def test_pivot_is_not_the_mean_on_asymmetric_fixture(self):
        values = [0.10, 0.11, 0.12, 0.90]
        result = estimate_pivot(values)
        assert result.pivot != pytest.approx(np.mean(values))

    def test_all_noise_falls_back_to_median(self):
        values = [0.0, 0.3, 0.6, 0.9]
        result = estimate_pivot(values, eps=0.01, min_pts=2)
        assert result.largest_cluster == NOISE
        assert result.pivot == float(np.median(values))

    def test_tie_broken_by_smaller_minimum(self):
        # two clusters of equal size; the lower one must supply the pivot
        values = [0.1, 0.11, 0.12, 0.7, 0.71, 0.72]
        result = estimate_pivot(values, eps=0.05, min_pts=2)
        assert result.pivot == 0.1

    @pytest.mark.parametrize("seed", range(20))
    def test_pivot_bounded_by_population(self, seed):
        values, eps, min_pts = random_fixture(seed)
        result = estimate_pivot(values, eps=eps, min_pts=min_pts)
        assert min(values) <= result.pivot <= max(values)

    def test_params_recorded(self):
        result = estimate_pivot([0.1, 0.2, 0.3], eps=0.07, min_pts=2)
        assert result.params == (0.07, 2)

    def test_default_min_pts_scales_with_population(self):
        result = estimate_pivot(np.linspace(0, 1, 1000))
        assert result.params[1] == 10
