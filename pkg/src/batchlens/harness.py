"""Desk-scale inpainting trainer and the selection-method study experiments.

The model is deliberately tiny: a single linear convolution stencil plus a
scalar bias, predicting pixels from the observed context of a masked image.
It trains in seconds on a CPU, has closed-form gradients, and is sensitive
enough to batch composition for selection effects to show up in its test
curves.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .calibration import estimate_pivot
from .complexity import (glcm, glcm_entropy, normalize_values,
                         spatial_information, total_variation)
from .imaging import (LUMA_WEIGHTS, GrayPlane, MaskGrid, irregular_mask,
                      regular_mask)
from .selection import (SelectionDecision, SelectorConfig, draw_subset,
                        run_selection_round)


class TrainingDiverged(RuntimeError):
    """Raised when the train loss blows past ten times its starting value."""


@dataclass
class TrainRecord:
    iteration: int
    train_loss: float
    test_loss: float | None
    method: str
    score_seconds: float
    select_seconds: float
    update_seconds: float
    iter_seconds: float = 0.0


@dataclass
class TrainResult:
    records: list[TrainRecord]
    decisions: list[SelectionDecision]
    model: "ToyInpainter"
    seconds: float
    final_test_loss: float

    def test_curve(self) -> list[tuple[int, float]]:
        return [(r.iteration, r.test_loss) for r in self.records if r.test_loss is not None]


@dataclass
class InpaintingDataset:
    """A stack of ground-truth images with one binary mask per image."""

    images: np.ndarray  # (N, H, W, C) float64 in [0, 1]
    masks: np.ndarray   # (N, H, W) uint8, 1 = observed

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.masks = np.asarray(self.masks, dtype=np.uint8)
        if self.images.ndim != 4:
            raise ValueError("images must be (N, H, W, C)")
        if self.masks.shape != self.images.shape[:3]:
            raise ValueError(f"masks {self.masks.shape} do not match images {self.images.shape[:3]}")

    @property
    def size(self) -> int:
        return self.images.shape[0]

    def masked_images(self) -> np.ndarray:
        return self.images * self.masks[:, :, :, np.newaxis]


def masked_l1_loss(pred, truth, mask) -> float:
    """Mean absolute error over missing pixels, averaged across channels."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    bits = mask.bits if isinstance(mask, MaskGrid) else np.asarray(mask)
    if p.ndim == 2:
        p = p[:, :, np.newaxis]
    if t.ndim == 2:
        t = t[:, :, np.newaxis]
    if p.shape != t.shape or bits.shape != p.shape[:2]:
        raise ValueError("prediction, truth and mask shapes do not agree")
    missing = bits == 0
    n = int(missing.sum())
    if n == 0:
        raise ValueError("mask has no missing pixels")
    channels = p.shape[2]
    return float(np.abs(p - t)[missing].sum() / (n * channels))


def _batch_masked_l1(preds: np.ndarray, truths: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Per-sample masked L1 for (N, H, W, C) stacks."""
    gate = (masks == 0)[:, :, :, np.newaxis]
    per = np.abs(preds - truths) * gate
    n_missing = gate.sum(axis=(1, 2, 3))  # already counts channels
    return per.sum(axis=(1, 2, 3)) / n_missing


class ToyInpainter:
    """Linear convolution predictor: k x k x C stencil weights plus a bias.

    The stencil maps the observed context (masked image, holes zeroed) to a
    per-pixel prediction. Predictions are clamped to [0, 1] only when
    evaluating; the gradient path sees the raw linear output.
    """

    def __init__(self, kernel_size: int = 5, channels: int = 1, learning_rate: float = 0.1):
        if kernel_size % 2 == 0:
            raise ValueError("kernel size must be odd")
        self.kernel_size = kernel_size
        self.channels = channels
        self.learning_rate = learning_rate
        self.weights = np.zeros((kernel_size, kernel_size, channels))
        self.bias = 0.5
        self.step = 0

    def _padded(self, masked_batch: np.ndarray) -> np.ndarray:
        half = self.kernel_size // 2
        return np.pad(masked_batch, ((0, 0), (half, half), (half, half), (0, 0)))

    def predict(self, masked_batch: np.ndarray) -> np.ndarray:
        """Raw linear predictions for a (N, H, W, C) stack of masked images."""
        n, h, w, c = masked_batch.shape
        padded = self._padded(masked_batch)
        out = np.full((n, h, w, c), self.bias)
        k = self.kernel_size
        for u in range(k):
            for v in range(k):
                wk = self.weights[u, v]
                if np.any(wk != 0.0):
                    out += padded[:, u:u + h, v:v + w, :] * wk
        return out

    def gradient(self, masked_batch: np.ndarray, truths: np.ndarray, masks: np.ndarray,
                 preds: np.ndarray | None = None):
        """Analytic gradient of the mean masked L1 over a batch.

        Returns (grad_weights, grad_bias, per_sample_losses). Predictions may
        be passed in when they were already computed at the current
        parameters.
        """
        if preds is None:
            preds = self.predict(masked_batch)
        n, h, w, _ = masked_batch.shape
        gate = (masks == 0)[:, :, :, np.newaxis].astype(np.float64)
        n_missing = gate.sum(axis=(1, 2, 3))
        residual = preds - truths
        losses = (np.abs(residual) * gate).sum(axis=(1, 2, 3)) / n_missing
        scale = (gate / n_missing[:, np.newaxis, np.newaxis, np.newaxis]) / n
        signed = np.sign(residual) * scale
        padded = self._padded(masked_batch)
        k = self.kernel_size
        grad_w = np.zeros_like(self.weights)
        for u in range(k):
            for v in range(k):
                grad_w[u, v] = np.einsum("nhwc,nhwc->c", signed,
                                         padded[:, u:u + h, v:v + w, :])
        grad_b = float(signed.sum())
        return grad_w, grad_b, losses

    def update(self, grad_w: np.ndarray, grad_b: float):
        self.weights -= self.learning_rate * grad_w
        self.bias -= self.learning_rate * grad_b
        self.step += 1

    def evaluate(self, dataset: InpaintingDataset) -> float:
        """Mean masked L1 over a dataset with predictions clamped to [0, 1]."""
        preds = np.clip(self.predict(dataset.masked_images()), 0.0, 1.0)
        losses = _batch_masked_l1(preds, dataset.images, dataset.masks)
        return float(losses.mean())


def synthetic_dataset(n: int, size: int = 16, channels: int = 1,
                      noisy_fraction: float = 0.4,
                      noise_range: tuple[float, float] = (0.4, 0.7),
                      slope_range: tuple[float, float] = (0.4, 0.9),
                      texture_amp: tuple[float, float] = (0.06, 0.12),
                      seed: int = 0) -> np.ndarray:
    """Generate a mixture of smooth gradient images and noise-field images.

    Smooth samples are ramps with slopes bounded away from zero (so every
    sample carries learnable structure) plus a gentle sinusoidal texture.
    A `noisy_fraction` share is overlaid with a strong uniform noise field,
    which makes those missing regions irreducibly lossy and high in every
    complexity metric. Returns an (N, size, size, channels) stack in [0, 1].
    """
    rng = np.random.default_rng([seed, 0xDA7A])
    ys, xs = np.mgrid[0:size, 0:size] / size
    n_noisy = int(round(noisy_fraction * n))
    noisy = np.zeros(n, dtype=bool)
    noisy[rng.permutation(n)[:n_noisy]] = True
    images = np.empty((n, size, size, channels))
    for i in range(n):
        slope_y = rng.uniform(*slope_range) * rng.choice([-1.0, 1.0])
        slope_x = rng.uniform(*slope_range) * rng.choice([-1.0, 1.0])
        freq_y, freq_x = rng.uniform(0.4, 1.0, 2)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.uniform(*texture_amp)
        base = (0.5 + slope_y * (ys - 0.5) + slope_x * (xs - 0.5)
                + amp * np.sin(2.0 * np.pi * (freq_y * ys + freq_x * xs) + phase))
        if noisy[i]:
            scale = rng.uniform(*noise_range)
            base = base + rng.uniform(-scale, scale, (size, size))
        plane = np.clip(base, 0.0, 1.0)
        for c in range(channels):
            images[i, :, :, c] = plane
    return images


def build_masks(n: int, height: int, width: int, mode: str = "regular",
                ratio: float = 0.25, seed: int = 0, epoch: int = 0) -> np.ndarray:
    """One mask per sample: a shared centered hole, or per-sample random holes."""
    if mode == "regular":
        mask = regular_mask(height, width).bits
        return np.repeat(mask[np.newaxis], n, axis=0)
    if mode == "irregular":
        out = np.empty((n, height, width), dtype=np.uint8)
        for i in range(n):
            child = int(np.random.default_rng([seed, epoch, i]).integers(0, 2 ** 31))
            out[i] = irregular_mask(height, width, ratio, child).bits
        return out
    raise ValueError(f"unknown mask mode {mode!r}")


def _gray_batch(images: np.ndarray) -> np.ndarray:
    if images.shape[3] == 1:
        return images[:, :, :, 0]
    return images @ np.asarray(LUMA_WEIGHTS)


def _raw_metric_arrays(dataset: InpaintingDataset, weights) -> dict[str, np.ndarray]:
    """Raw complexity values per sample, only for metrics with nonzero weight."""
    grays = _gray_batch(dataset.images)
    out = {}
    w_si, w_eg, w_tv = weights
    n = dataset.size
    if w_si > 0.0:
        out["si"] = np.array([spatial_information(GrayPlane(grays[i]), MaskGrid(dataset.masks[i]))
                              for i in range(n)])
    if w_eg > 0.0:
        out["eg"] = np.array([glcm_entropy(glcm(GrayPlane(grays[i]), MaskGrid(dataset.masks[i])))
                              for i in range(n)])
    if w_tv > 0.0:
        out["tv"] = np.array([total_variation(GrayPlane(grays[i]), MaskGrid(dataset.masks[i]))
                              for i in range(n)])
    return out


def _combined_complexity(raws: dict[str, np.ndarray], ids: np.ndarray, weights,
                         scope: str) -> np.ndarray:
    """Weighted normalized complexity for the given sample ids."""
    combined = np.zeros(ids.size)
    for key, w in zip(("si", "eg", "tv"), weights):
        if w == 0.0:
            continue
        raw = raws[key]
        if scope == "batch":
            combined += w * normalize_values(raw[ids])
        else:
            combined += w * normalize_values(raw)[ids]
    return combined


def train(train_set: InpaintingDataset, test_set: InpaintingDataset,
          config: SelectorConfig, method: str, iterations: int,
          learning_rate: float = 0.1, kernel_size: int = 5,
          test_every: int = 20, mask_mode: str = "regular",
          mask_ratio: float = 0.25, norm_scope: str = "batch") -> TrainResult:
    """Train the toy inpainter with one selection method.

    Each iteration draws a candidate pool, scores it with the chosen method,
    takes a gradient step on the selected mini-batch, and logs losses and
    per-phase wall time. The test split is evaluated every `test_every`
    iterations and is never scored for selection or used in updates.

    The pivot is recalibrated once per epoch from that epoch's first
    candidate draw. Irregular masks are regenerated at epoch boundaries;
    regular masks stay fixed.
    """
    if norm_scope not in ("batch", "dataset"):
        raise ValueError(f"norm_scope must be 'batch' or 'dataset', got {norm_scope}")
    pool = train_set.size
    if pool < config.big_batch_size:
        raise ValueError(f"dataset of {pool} is smaller than the candidate draw "
                         f"{config.big_batch_size}")
    model = ToyInpainter(kernel_size=kernel_size, channels=train_set.images.shape[3],
                         learning_rate=learning_rate)
    epoch_len = max(1, pool // config.b)
    needs_complexity = method == "proposed"
    masks = train_set.masks
    masked = train_set.masked_images()
    raws = _raw_metric_arrays(train_set, config.weights) if needs_complexity else {}

    pivot = 0.0
    records: list[TrainRecord] = []
    decisions: list[SelectionDecision] = []
    initial_loss = None
    start = time.perf_counter()

    round_cache: dict[int, np.ndarray] = {}

    def loss_fn(ids):
        preds = model.predict(masked[ids])
        for j, sample in enumerate(ids):
            round_cache[int(sample)] = preds[j]
        return _batch_masked_l1(preds, train_set.images[ids], masks[ids])

    def complexity_fn(ids):
        return _combined_complexity(raws, ids, config.weights, norm_scope)

    for it in range(iterations):
        iter_start = time.perf_counter()
        epoch = it // epoch_len
        if it % epoch_len == 0:
            if mask_mode == "irregular" and it > 0:
                masks = build_masks(pool, train_set.images.shape[1],
                                    train_set.images.shape[2], "irregular",
                                    mask_ratio, config.seed, epoch)
                masked = train_set.images * masks[:, :, :, np.newaxis]
                if needs_complexity:
                    refreshed = InpaintingDataset(train_set.images, masks)
                    raws.update(_raw_metric_arrays(refreshed, config.weights))
            if needs_complexity:
                first_draw = draw_subset(pool, config, it, method)
                pivot = estimate_pivot(complexity_fn(first_draw)).pivot

        round_cache.clear()
        phases: dict[str, float] = {}
        decision = run_selection_round(
            pool, config, pivot, method, loss_fn, complexity_fn,
            iteration=it, populate_metrics=False, phase_seconds=phases)

        chosen = decision.chosen_ids
        t_update = time.perf_counter()
        batch_masked = masked[chosen]
        cached = [round_cache.get(int(s)) for s in chosen]
        preds = np.stack(cached) if all(p is not None for p in cached) else None
        grad_w, grad_b, losses = model.gradient(
            batch_masked, train_set.images[chosen], masks[chosen], preds=preds)
        model.update(grad_w, grad_b)
        update_seconds = time.perf_counter() - t_update

        train_loss = float(losses.mean())
        if initial_loss is None:
            initial_loss = train_loss
        elif train_loss > 10.0 * initial_loss:
            raise TrainingDiverged(
                f"train loss {train_loss:.4f} exceeded 10x its initial value "
                f"{initial_loss:.4f} at iteration {it}")

        iter_seconds = time.perf_counter() - iter_start
        test_loss = model.evaluate(test_set) if (it % test_every == 0 or it == iterations - 1) else None
        records.append(TrainRecord(
            iteration=it, train_loss=train_loss, test_loss=test_loss,
            method=method, score_seconds=phases.get("score", 0.0),
            select_seconds=phases.get("select", 0.0),
            update_seconds=update_seconds, iter_seconds=iter_seconds))
        decisions.append(decision)

    total = time.perf_counter() - start
    final = records[-1].test_loss if records and records[-1].test_loss is not None \
        else model.evaluate(test_set)
    return TrainResult(records=records, decisions=decisions, model=model,
                       seconds=total, final_test_loss=float(final))


def correlation_study(dataset: InpaintingDataset, model: ToyInpainter):
    """Per-sample (loss, variation complexity) pairs plus their Pearson r.

    Returns (pairs, r) where pairs is a list of dicts and r is None when
    either quantity has zero variance.
    """
    preds = np.clip(model.predict(dataset.masked_images()), 0.0, 1.0)
    losses = _batch_masked_l1(preds, dataset.images, dataset.masks)
    grays = _gray_batch(dataset.images)
    tv = np.array([total_variation(GrayPlane(grays[i]), MaskGrid(dataset.masks[i]))
                   for i in range(dataset.size)])
    pairs = [{"sample": i, "loss": float(losses[i]), "tv": float(tv[i])}
             for i in range(dataset.size)]
    r = pearson(losses, tv)
    return pairs, r


def pearson(x, y) -> float | None:
    """Pearson correlation, or None when a variance degenerates."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.std() == 0.0 or y.std() == 0.0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


def sweep_ratio(train_set: InpaintingDataset, test_set: InpaintingDataset,
                base_config: SelectorConfig, ratios, method: str = "proposed",
                iterations: int = 200, learning_rate: float = 0.1,
                test_every: int = 20) -> list[dict]:
    """Train once per candidate-pool ratio and tabulate outcome and cost."""
    rows = []
    for ratio in ratios:
        config = SelectorConfig(b=base_config.b, big_batch_ratio=float(ratio),
                                delta=base_config.delta, beta=base_config.beta,
                                weights=base_config.weights, seed=base_config.seed)
        result = train(train_set, test_set, config, method, iterations,
                       learning_rate=learning_rate, test_every=test_every)
        iter_times = [r.iter_seconds for r in result.records]
        rows.append({
            "ratio": float(ratio),
            "big_batch": config.big_batch_size,
            "final_test_l1": result.final_test_loss,
            "mean_iter_seconds": float(np.mean(iter_times)),
            "median_iter_seconds": float(np.median(iter_times)),
            "mean_score_seconds": float(np.mean([r.score_seconds for r in result.records])),
            "total_seconds": result.seconds,
        })
    return rows


def timing_study(train_set: InpaintingDataset, test_set: InpaintingDataset,
                 config: SelectorConfig, methods, iterations: int = 60,
                 warmup: int = 10, learning_rate: float = 0.1) -> dict[str, dict]:
    """Median per-phase seconds per method, measured after a warmup run."""
    if iterations < 50:
        raise ValueError("timing needs at least 50 measured iterations")
    train(train_set, test_set, config, "random", warmup,
          learning_rate=learning_rate, test_every=warmup + 1)
    out = {}
    for method in methods:
        result = train(train_set, test_set, config, method, iterations,
                       learning_rate=learning_rate, test_every=iterations + 1)
        recs = result.records
        out[method] = {
            "score_seconds": float(np.median([r.score_seconds for r in recs])),
            "select_seconds": float(np.median([r.select_seconds for r in recs])),
            "update_seconds": float(np.median([r.update_seconds for r in recs])),
            "iter_seconds": float(np.median([r.iter_seconds for r in recs])),
            "total_seconds": result.seconds,
        }
    return out
