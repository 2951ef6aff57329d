"""Batch selection criteria and the big-batch selection round.

The headline criterion ranks candidates by forward loss divided by the
deviation of their missingness complexity from a calibrated pivot, with a
floor on the denominator. Loss-only baselines (dataset-scope top-k,
subset-scope top-k, CDF-probability keep) and plain random batching share
the same round machinery for side-by-side studies.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .complexity import validate_weights

METHODS = ("proposed", "fan", "kawaguchi", "jiang", "random")


@dataclass(frozen=True)
class SelectorConfig:
    """Knobs for a selection round.

    b is the mini-batch size; the candidate pool drawn each round has
    ceil(big_batch_ratio * b) samples.
    """

    b: int
    big_batch_ratio: float = 2.0
    delta: float = 0.01
    beta: float = 1.0
    weights: tuple[float, float, float] = (0.0, 0.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.b < 1:
            raise ValueError(f"b must be at least 1, got {self.b}")
        if self.big_batch_ratio < 1.0:
            raise ValueError(f"big_batch_ratio must be >= 1, got {self.big_batch_ratio}")
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        validate_weights(self.weights)

    @property
    def big_batch_size(self) -> int:
        return math.ceil(self.big_batch_ratio * self.b)


@dataclass
class SelectionDecision:
    """Everything one selection round looked at and what it picked."""

    iteration: int
    subset_ids: np.ndarray
    losses: np.ndarray | None
    complexities: np.ndarray | None
    scores: np.ndarray | None
    chosen_ids: np.ndarray
    method: str


def score_proposed(loss: float, complexity: float, pivot: float, delta: float = 0.01) -> float:
    """Ratio of loss to the floored complexity deviation |C - pivot|."""
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if loss < 0.0:
        raise ValueError(f"loss must be nonnegative, got {loss}")
    return loss / max(abs(complexity - pivot), delta)


def proposed_scores(losses, complexities, pivot: float, delta: float = 0.01) -> np.ndarray:
    """Vectorized ratio scores with the denominator-floor guard.

    Every denominator is at least delta and every score finite; a violation
    (NaN loss, infinite complexity) raises instead of propagating.
    """
    l = np.asarray(losses, dtype=np.float64)
    c = np.asarray(complexities, dtype=np.float64)
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if np.any(l < 0.0) or not np.all(np.isfinite(l)):
        raise ValueError("losses must be finite and nonnegative")
    denom = np.maximum(np.abs(c - pivot), delta)
    scores = l / denom
    if np.any(denom < delta) or not np.all(np.isfinite(scores)):
        raise AssertionError("selection score guard tripped: "
                             "denominator below floor or non-finite score")
    return scores


def select_topk(scores, b: int) -> np.ndarray:
    """Indices of the b largest scores; ties broken by lower index."""
    s = np.asarray(scores, dtype=np.float64)
    if b > s.size:
        raise ValueError(f"cannot select {b} from a population of {s.size}")
    order = np.argsort(-s, kind="stable")
    return order[:b]


def empirical_cdf(scores) -> np.ndarray:
    """Empirical CDF value of each score: rank / N with max rank for ties."""
    s = np.asarray(scores, dtype=np.float64)
    sorted_s = np.sort(s)
    ranks = np.searchsorted(sorted_s, s, side="right")
    return ranks / s.size


def select_jiang(scores, beta: float, rng) -> np.ndarray:
    """Keep-flags drawn with probability CDF(score)^beta per sample.

    `rng` may be a numpy Generator or an integer seed.
    """
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    probs = empirical_cdf(scores) ** beta
    return rng.random(probs.size) < probs


def _jiang_chosen(scores, b: int, beta: float, rng) -> np.ndarray:
    """Batch-sized pick from keep-flags: kept first, backfilled by keep-prob."""
    keep = select_jiang(scores, beta, rng)
    probs = empirical_cdf(scores) ** beta
    order = np.lexsort((np.arange(len(probs)), -probs, ~keep))
    return order[:b]


def draw_subset(pool_size: int, config: SelectorConfig, iteration: int,
                method: str = "proposed") -> np.ndarray:
    """The candidate ids a round will score.

    The draw depends only on (seed, iteration), never on the method, so
    different selectors see identical candidate streams. The dataset-scope
    method scores the whole pool.
    """
    if method == "fan":
        return np.arange(pool_size)
    rng = np.random.default_rng([config.seed, iteration, 0x5EED])
    return rng.choice(pool_size, size=config.big_batch_size, replace=False)


def run_selection_round(pool_size: int, config: SelectorConfig, pivot: float,
                        method: str, loss_fn, complexity_fn,
                        iteration: int = 0, populate_metrics: bool = True,
                        phase_seconds: dict | None = None) -> SelectionDecision:
    """Draw candidates, score them, and pick a mini-batch.

    Args:
        pool_size: number of samples available; ids are 0..pool_size-1.
        config: selection knobs; the candidate draw has config.big_batch_size
            samples (except the dataset-scope method, which scores the whole
            pool).
        pivot: calibrated pivot for the ratio criterion.
        method: one of METHODS.
        loss_fn: callback mapping an id array to per-sample losses.
        complexity_fn: callback mapping an id array to per-sample normalized
            complexities in [0, 1].
        iteration: round counter; combined with config.seed it fixes the draw,
            so different methods see identical candidate streams.
        populate_metrics: when False, the random baseline skips loss and
            complexity evaluation entirely (its decision carries None there).
        phase_seconds: optional dict that receives "score" and "select"
            wall times.

    Returns:
        SelectionDecision with exactly config.b chosen ids.
    """
    if method not in METHODS:
        raise ValueError(f"unknown selection method {method!r}")
    if pool_size < config.big_batch_size:
        raise ValueError(f"pool of {pool_size} is smaller than the candidate draw "
                         f"{config.big_batch_size}")

    subset = draw_subset(pool_size, config, iteration, method)

    losses = complexities = scores = None
    score_seconds = 0.0
    t0 = time.perf_counter()
    if method == "proposed":
        losses = np.asarray(loss_fn(subset), dtype=np.float64)
        complexities = np.asarray(complexity_fn(subset), dtype=np.float64)
        scores = proposed_scores(losses, complexities, pivot, config.delta)
    elif method in ("fan", "kawaguchi", "jiang"):
        losses = np.asarray(loss_fn(subset), dtype=np.float64)
        scores = losses
    elif populate_metrics:
        losses = np.asarray(loss_fn(subset), dtype=np.float64)
        complexities = np.asarray(complexity_fn(subset), dtype=np.float64)
        scores = proposed_scores(losses, complexities, pivot, config.delta)
    if scores is not None:
        score_seconds = time.perf_counter() - t0
    t1 = time.perf_counter()

    if method == "random":
        chosen_local = np.arange(config.b)
    elif method == "jiang":
        jiang_rng = np.random.default_rng([config.seed, iteration, 0xcdf])
        chosen_local = _jiang_chosen(scores, config.b, config.beta, jiang_rng)
    else:
        chosen_local = select_topk(scores, config.b)
    t2 = time.perf_counter()

    if phase_seconds is not None:
        phase_seconds["score"] = score_seconds
        phase_seconds["select"] = t2 - t1

    return SelectionDecision(
        iteration=iteration,
        subset_ids=subset,
        losses=losses,
        complexities=complexities,
        scores=scores,
        chosen_ids=subset[chosen_local],
        method=method,
    )
