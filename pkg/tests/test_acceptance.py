"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
PASS lines and the measured quantities they are based on.
"""

import math
import time

import numpy as np
import pytest

from batchlens.calibration import dbscan_1d, estimate_pivot
from batchlens.complexity import (glcm, glcm_entropy, score_profiles,
                                  spatial_information, total_variation,
                                  validate_weights)
from batchlens.harness import (InpaintingDataset, build_masks,
                               synthetic_dataset, sweep_ratio, train)
from batchlens.imaging import GrayPlane, ImageTensor, MaskGrid
from batchlens.quality import psnr, ssim
from batchlens.selection import (SelectorConfig, proposed_scores,
                                 run_selection_round)

from oracles import (dbscan_oracle, glcm_oracle, partition_of,
                     spatial_information_oracle, ssim_oracle,
                     total_variation_oracle)

DELTA = 0.01
SIZE = 16
N_TRAIN, N_TEST = 512, 128
ITERATIONS = 2000
LEARNING_RATE = 0.01
SEEDS = (0, 1, 2, 3, 4)


def report(criterion: int, text: str):
    print(f"\nACCEPTANCE {criterion} PASS: {text}")


def _random_pair(rng, size=32):
    values = rng.random((size, size))
    bits = (rng.random((size, size)) >= 0.3).astype(np.uint8)
    y, x = rng.integers(0, size - 1, 2)
    bits[y, x] = bits[y, x + 1] = 0  # guarantee one co-occurrence pair
    return GrayPlane(values), MaskGrid(bits)


def _training_sets(seed):
    train_imgs = synthetic_dataset(N_TRAIN, size=SIZE, seed=seed)
    test_imgs = synthetic_dataset(N_TEST, size=SIZE, seed=seed + 5000)
    train_set = InpaintingDataset(
        train_imgs, build_masks(N_TRAIN, SIZE, SIZE, "irregular", 0.25, seed))
    test_set = InpaintingDataset(
        test_imgs, build_masks(N_TEST, SIZE, SIZE, "irregular", 0.25, seed + 9999))
    return train_set, test_set


def _train(seed, method, iterations=ITERATIONS):
    train_set, test_set = _training_sets(seed)
    config = SelectorConfig(b=8, big_batch_ratio=2.0, delta=DELTA,
                            weights=(0.0, 0.0, 1.0), seed=seed)
    return train(train_set, test_set, config, method, iterations,
                 learning_rate=LEARNING_RATE, test_every=20,
                 mask_mode="irregular", mask_ratio=0.25)


@pytest.fixture(scope="module")
def convergence_runs():
    """The criterion-5 training grid, shared by the criteria that inspect it."""
    started = time.perf_counter()
    runs = {method: [_train(seed, method) for seed in SEEDS]
            for method in ("random", "proposed", "kawaguchi")}
    runs["elapsed"] = time.perf_counter() - started
    return runs


class TestCriterion1MetricOracles:
    def test_metrics_match_bruteforce_on_200_random_pairs(self):
        started = time.perf_counter()
        rng = np.random.default_rng(0xACC1)
        for _ in range(200):
            gray, mask = _random_pair(rng)
            si = spatial_information(gray, mask)
            si_ref = spatial_information_oracle(gray.values, mask.bits)
            assert si == pytest.approx(si_ref, rel=1e-9)
            matrix = glcm(gray, mask)
            matrix_ref = glcm_oracle(gray.values, mask.bits)
            assert np.allclose(matrix, matrix_ref, rtol=1e-9, atol=0.0)
            eg = glcm_entropy(matrix)
            eg_ref = glcm_entropy(matrix_ref)
            assert eg == pytest.approx(eg_ref, rel=1e-9)
            tv = total_variation(gray, mask)
            tv_ref = total_variation_oracle(gray.values, mask.bits)
            assert tv == pytest.approx(tv_ref, rel=1e-9)
        for level in (0.0, 0.25, 0.37, 1.0):
            gray = GrayPlane(np.full((16, 16), level))
            mask = MaskGrid(build_masks(1, 16, 16, "regular")[0])
            assert spatial_information(gray, mask) == 0.0
            assert glcm_entropy(glcm(gray, mask)) == 0.0
            assert total_variation(gray, mask) == 0.0
        elapsed = time.perf_counter() - started
        assert elapsed < 30.0
        report(1, f"SI/EG/TV match double-loop oracles to 1e-9 on 200 random "
                  f"32x32 pairs and are exactly 0 on constants ({elapsed:.1f}s)")


class TestCriterion2TvWorkedExample:
    def test_three_row_fixture(self):
        values = np.array([[0.0] * 3,
                           [10.0 / 255.0] * 3,
                           [20.0 / 255.0] * 3])
        mask = MaskGrid(np.zeros((3, 3), dtype=np.uint8))
        tv = total_variation(GrayPlane(values), mask)
        assert tv == pytest.approx(60.0 / 255.0, rel=1e-12)
        assert tv == pytest.approx(total_variation_oracle(values, mask.bits), rel=1e-12)
        report(2, f"3x3 fixture evaluates to 60/255 = {tv!r}")


class TestCriterion3Calibration:
    def test_bimodal_fixture_and_oracle_equivalence(self):
        values = [0.10, 0.11, 0.12, 0.90]
        result = estimate_pivot(values, eps=0.05, min_pts=2)
        assert result.pivot == 0.10
        assert result.pivot != pytest.approx(float(np.mean(values)))

        rng = np.random.default_rng(0xACC3)
        for _ in range(500):
            n_clumps = int(rng.integers(1, 4))
            points = []
            for _ in range(n_clumps):
                center = rng.uniform(0.0, 1.0)
                width = rng.uniform(0.002, 0.08)
                points.extend(rng.uniform(center - width, center + width,
                                          int(rng.integers(2, 25))))
            points.extend(rng.uniform(0.0, 1.0, int(rng.integers(0, 12))))
            points = np.clip(points, 0.0, 1.0)
            eps = float(rng.uniform(0.01, 0.15))
            min_pts = int(rng.integers(1, 6))
            got = partition_of(dbscan_1d(points, eps, min_pts))
            want = partition_of(dbscan_oracle(list(points), eps, min_pts))
            assert got == want
        report(3, "pivot on {0.10,0.11,0.12,0.90} is exactly 0.10 (not the mean "
                  "0.3075); clustering matches the interval-merge oracle on 500 fixtures")


class TestCriterion4SelectionBias:
    def test_decile_coverage(self):
        started = time.perf_counter()
        master_seed = 0
        pool, b, rounds = 1024, 16, 100
        rng = np.random.default_rng([master_seed, 7])
        complexities = rng.uniform(0.0, 1.0, pool)
        noise_rng = np.random.default_rng([master_seed, 13])
        sigma = 0.05 * (complexities.max() - complexities.min())
        losses = np.clip(complexities + noise_rng.normal(0.0, sigma, pool), 0.0, None)
        pivot = estimate_pivot(complexities).pivot
        config = SelectorConfig(b=b, big_batch_ratio=2.0, delta=DELTA, seed=master_seed)
        edges = np.quantile(complexities, np.linspace(0.1, 0.9, 9))

        coverage = {}
        for method in ("proposed", "fan", "kawaguchi"):
            per_round, union = [], set()
            for it in range(rounds):
                decision = run_selection_round(
                    pool, config, pivot, method,
                    loss_fn=lambda ids: losses[ids],
                    complexity_fn=lambda ids: complexities[ids],
                    iteration=it)
                deciles = set(np.searchsorted(
                    edges, complexities[decision.chosen_ids], side="right").tolist())
                per_round.append(len(deciles))
                union |= deciles
            coverage[method] = (float(np.mean(per_round)), len(union))

        loss_only_mean, loss_only_union = coverage["fan"]
        proposed_mean, proposed_union = coverage["proposed"]
        kawaguchi_mean, _ = coverage["kawaguchi"]
        assert loss_only_mean < 3.0
        assert loss_only_union < 3
        assert proposed_union >= 8
        assert proposed_mean > kawaguchi_mean > loss_only_mean
        elapsed = time.perf_counter() - started
        assert elapsed < 60.0
        report(4, f"loss-only top-k covers {loss_only_mean:.2f}/10 deciles per round "
                  f"(union {loss_only_union}); ratio selector covers {proposed_union}/10 "
                  f"across rounds ({proposed_mean:.2f} per round); subset top-k sits "
                  f"between at {kawaguchi_mean:.2f} ({elapsed:.1f}s)")


class TestCriterion5Convergence:
    def test_early_speedup_and_final_quality(self, convergence_runs):
        def early_mean(result):
            losses = [l for it, l in result.test_curve() if it <= 500]
            return float(np.mean(losses))

        wins = 0
        for idx, seed in enumerate(SEEDS):
            proposed = early_mean(convergence_runs["proposed"][idx])
            random_b = early_mean(convergence_runs["random"][idx])
            if proposed < random_b:
                wins += 1
        final_proposed = float(np.mean(
            [r.final_test_loss for r in convergence_runs["proposed"]]))
        final_loss_only = float(np.mean(
            [r.final_test_loss for r in convergence_runs["kawaguchi"]]))
        elapsed = convergence_runs["elapsed"]
        assert wins >= 4
        assert final_proposed <= final_loss_only
        assert elapsed < 600.0
        report(5, f"ratio selector beats random batching on early test L1 in "
                  f"{wins}/5 seeds; mean final L1 {final_proposed:.4f} <= "
                  f"loss-only {final_loss_only:.4f} ({elapsed:.0f}s for 15 runs)")


class TestCriterion6DeltaFloor:
    def test_scores_floored_and_finite_across_training(self, convergence_runs):
        checked = 0
        for result in convergence_runs["proposed"]:
            for decision in result.decisions:
                assert decision.scores is not None
                assert np.all(np.isfinite(decision.scores))
                # score = loss / denom with denom >= delta, so score*delta <= loss
                assert np.all(decision.scores * DELTA
                              <= decision.losses * (1.0 + 1e-9) + 1e-300)
                checked += len(decision.scores)
        with pytest.raises(ValueError):
            proposed_scores([0.1, float("nan")], [0.5, 0.5], 0.5, DELTA)
        with pytest.raises(ValueError):
            proposed_scores([0.1, -1.0], [0.5, 0.5], 0.5, DELTA)
        report(6, f"all {checked} scores across 5 training runs are finite with "
                  f"denominators floored at {DELTA}; the selector guard rejects "
                  f"non-finite and negative losses")


class TestCriterion7RatioSweep:
    def test_sweep_and_stream_equality(self):
        train_set, test_set = _training_sets(seed=0)
        config = SelectorConfig(b=8, big_batch_ratio=2.0, delta=DELTA,
                                weights=(0.0, 0.0, 1.0), seed=0)
        # warmup for stable timing
        train(train_set, test_set, config, "proposed", 60,
              learning_rate=LEARNING_RATE, test_every=61, mask_mode="irregular")
        rows = sweep_ratio(train_set, test_set, config, [1.0, 1.5, 2.0, 3.0],
                           method="proposed", iterations=600,
                           learning_rate=LEARNING_RATE, test_every=601)
        assert [row["ratio"] for row in rows] == [1.0, 1.5, 2.0, 3.0]
        times = [row["median_iter_seconds"] for row in rows]
        assert all(a <= b for a, b in zip(times, times[1:])), times

        cfg1 = SelectorConfig(b=8, big_batch_ratio=1.0, delta=DELTA,
                              weights=(0.0, 0.0, 1.0), seed=0)
        stream_p = train(train_set, test_set, cfg1, "proposed", 100,
                         learning_rate=LEARNING_RATE, test_every=101,
                         mask_mode="irregular")
        stream_r = train(train_set, test_set, cfg1, "random", 100,
                         learning_rate=LEARNING_RATE, test_every=101,
                         mask_mode="irregular")
        for dp, dr in zip(stream_p.decisions, stream_r.decisions):
            assert sorted(dp.chosen_ids.tolist()) == sorted(dr.chosen_ids.tolist())
        report(7, f"ratios 1/1.5/2/3 all ran; median iteration seconds nondecreasing "
                  f"({', '.join(f'{t * 1e3:.3f}ms' for t in times)}); ratio=1 "
                  f"reproduces the random batch stream exactly over 100 iterations")


class TestCriterion8Overhead:
    def test_selection_overhead_bounded(self):
        train_set, test_set = _training_sets(seed=0)
        config = SelectorConfig(b=8, big_batch_ratio=2.0, delta=DELTA,
                                weights=(0.0, 0.0, 1.0), seed=0)
        train(train_set, test_set, config, "random", 60,
              learning_rate=LEARNING_RATE, test_every=20, mask_mode="irregular")
        # best of three matched pairs: scheduler noise only inflates a ratio
        overheads, phase_overheads = [], []
        for _ in range(3):
            random_run = train(train_set, test_set, config, "random", 400,
                               learning_rate=LEARNING_RATE, test_every=20,
                               mask_mode="irregular")
            proposed_run = train(train_set, test_set, config, "proposed", 400,
                                 learning_rate=LEARNING_RATE, test_every=20,
                                 mask_mode="irregular")
            overheads.append(proposed_run.seconds / random_run.seconds - 1.0)
            phase_overheads.append(
                np.mean([r.iter_seconds for r in proposed_run.records])
                / np.mean([r.iter_seconds for r in random_run.records]) - 1.0)
        overhead = min(overheads)
        phase_overhead = min(phase_overheads)
        assert overhead <= 0.50
        report(8, f"ratio selection at a 2x candidate pool adds {overhead * 100:.1f}% "
                  f"wall time per iteration ({phase_overhead * 100:.1f}% on iteration "
                  f"phases alone; bound 50%; GPU-scale inpainting trainings typically "
                  f"report about 20%)")


class TestCriterion9QualityMetrics:
    def test_psnr_and_ssim_contracts(self):
        x = np.random.default_rng(0xACC9).random((16, 16))
        assert ssim(x, x) == 1.0
        assert psnr(np.zeros((8, 8)), np.full((8, 8), 0.1)) == pytest.approx(20.0, abs=1e-9)
        assert psnr(x, x) == math.inf
        rng = np.random.default_rng(0xACC9 + 1)
        for _ in range(3):
            a, b = rng.random((16, 16)), rng.random((16, 16))
            assert ssim(a, b) == pytest.approx(ssim_oracle(a, b), abs=1e-7)
        report(9, "ssim(x,x)=1 exactly, uniform 0.1 difference gives 20 dB, and "
                  "SSIM matches the sliding-window oracle to 1e-7")


class TestCriterion10Combination:
    def test_weight_rows_and_tv_only_ordering(self):
        rng = np.random.default_rng(0xACC10)
        images, masks = [], []
        for i in range(16):
            images.append(ImageTensor(rng.random((16, 16, 1))))
            bits = np.ones((16, 16), dtype=np.uint8)
            bits[4:12, 4:12] = 0
            masks.append(MaskGrid(bits))
        tv_only = score_profiles(images, masks, weights=(0.0, 0.0, 1.0))
        order_combined = np.argsort([p.combined for p in tv_only], kind="stable")
        order_tv = np.argsort([p.tv_raw for p in tv_only], kind="stable")
        assert order_combined.tolist() == order_tv.tolist()

        for row in ((0.2, 0.3, 0.5), (0.1, 0.4, 0.5), (0.3, 0.2, 0.5)):
            validate_weights(row)
            profiles = score_profiles(images, masks, weights=row)
            assert all(0.0 <= p.combined <= 1.0 for p in profiles)
        report(10, "weights (0,0,1) reproduce the variation-only ordering exactly; "
                   "published weight rows validate and give combined scores in [0,1]")
