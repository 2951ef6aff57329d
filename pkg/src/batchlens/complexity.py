"""Missingness-complexity metrics for masked images.

Three classical measures are computed over the missing region of a
ground-truth image: RMS Sobel gradient magnitude (spatial information),
co-occurrence texture entropy, and total variation. Raw values are
min-max normalized over a population and combined with a weight triple.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .imaging import GrayPlane, ImageTensor, MaskGrid

SOBEL_X = np.array([[-1.0, 0.0, 1.0],
                    [-2.0, 0.0, 2.0],
                    [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T

GLCM_LEVELS = 256


@dataclass
class ComplexityProfile:
    """Raw and normalized metric values for one sample."""

    si_raw: float
    eg_raw: float
    tv_raw: float
    si_norm: float = float("nan")
    eg_norm: float = float("nan")
    tv_norm: float = float("nan")
    combined: float = float("nan")
    weights: tuple[float, float, float] = (0.0, 0.0, 1.0)


def sobel_magnitude(values: np.ndarray) -> np.ndarray:
    """Per-pixel gradient magnitude sqrt(sx^2 + sy^2) from Sobel filters.

    Separable form: a [1, 2, 1] smoothing pass followed by a central
    difference. Differencing two identically computed smoothed sums makes
    the response of a constant image exactly zero. Borders are
    replicate-padded.
    """
    h, w = values.shape
    padded = np.pad(values, 1, mode="edge")
    col_smooth = padded[:-2, :] + 2.0 * padded[1:-1, :] + padded[2:, :]   # (h, w+2)
    sx = col_smooth[:, 2:] - col_smooth[:, :-2]
    row_smooth = padded[:, :-2] + 2.0 * padded[:, 1:-1] + padded[:, 2:]   # (h+2, w)
    sy = row_smooth[2:, :] - row_smooth[:-2, :]
    return np.sqrt(sx * sx + sy * sy)


def spatial_information(gray: GrayPlane, mask: MaskGrid) -> float:
    """RMS of Sobel gradient magnitudes over the missing pixels.

    The filter runs on the full plane (edges at the hole boundary count);
    only missing-pixel responses enter the root mean square.
    """
    missing = mask.missing()
    n = int(missing.sum())
    if n == 0:
        raise ValueError("mask has no missing pixels")
    mag = sobel_magnitude(gray.values)
    return float(np.sqrt(np.sum(mag[missing] ** 2) / n))


def glcm(gray: GrayPlane, mask: MaskGrid) -> np.ndarray:
    """Normalized gray-level co-occurrence matrix of the missing region.

    Counts ordered level pairs at offset (0, +1) where both pixels are
    missing; falls back to offset (+1, 0) when the region has no horizontal
    pairs. Entries sum to 1.

    Returns:
        (256, 256) float array.
    """
    levels = gray.levels
    missing = mask.missing()
    counts = _pair_counts(levels, missing, 0, 1)
    if counts.sum() == 0:
        counts = _pair_counts(levels, missing, 1, 0)
    total = counts.sum()
    if total == 0:
        raise ValueError("missing region has no adjacent pixel pairs")
    return counts / total


def _pair_counts(levels: np.ndarray, missing: np.ndarray, dy: int, dx: int) -> np.ndarray:
    h, w = levels.shape
    a = levels[:h - dy, :w - dx]
    b = levels[dy:, dx:]
    valid = missing[:h - dy, :w - dx] & missing[dy:, dx:]
    idx = a[valid].astype(np.int64) * GLCM_LEVELS + b[valid].astype(np.int64)
    flat = np.bincount(idx, minlength=GLCM_LEVELS * GLCM_LEVELS)
    return flat.reshape(GLCM_LEVELS, GLCM_LEVELS).astype(np.float64)


def glcm_entropy(matrix: np.ndarray) -> float:
    """Shannon entropy -sum(G ln G) with the 0 ln 0 = 0 convention."""
    g = np.asarray(matrix, dtype=np.float64)
    nz = g[g > 0.0]
    return float(-np.sum(nz * np.log(nz)) + 0.0)


def total_variation(gray: GrayPlane, mask: MaskGrid) -> float:
    """Sum of absolute neighbour differences anchored at missing pixels.

    A horizontal pair (i, j)-(i, j+1) and a vertical pair (i, j)-(i+1, j)
    each contribute |difference| when the anchor pixel (i, j) is missing.
    Computed on [0, 1] gray values.
    """
    g = gray.values
    gate = 1.0 - mask.bits.astype(np.float64)
    horiz = np.abs(g[:, 1:] - g[:, :-1]) * gate[:, :-1]
    vert = np.abs(g[1:, :] - g[:-1, :]) * gate[:-1, :]
    return float(horiz.sum() + vert.sum())


def normalize_values(raw) -> np.ndarray:
    """Min-max normalize a population of raw values to [0, 1].

    A degenerate population (max == min) maps to all zeros.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot normalize an empty population")
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def validate_weights(weights) -> tuple[float, float, float]:
    w = tuple(float(x) for x in weights)
    if len(w) != 3:
        raise ValueError(f"expected 3 metric weights, got {len(w)}")
    if any(x < 0.0 for x in w):
        raise ValueError(f"metric weights must be nonnegative, got {w}")
    if abs(sum(w) - 1.0) > 1e-9:
        raise ValueError(f"metric weights must sum to 1, got sum {sum(w)!r}")
    return w


def combine(profile: ComplexityProfile, weights) -> float:
    """Weighted sum of the normalized metrics of one profile."""
    w = validate_weights(weights)
    return w[0] * profile.si_norm + w[1] * profile.eg_norm + w[2] * profile.tv_norm


def raw_metrics(image: ImageTensor, mask: MaskGrid) -> tuple[float, float, float]:
    """(spatial information, texture entropy, total variation) of one sample."""
    gray = image.gray
    si = spatial_information(gray, mask)
    eg = glcm_entropy(glcm(gray, mask))
    tv = total_variation(gray, mask)
    return si, eg, tv


def score_profiles(images, masks, weights=(0.0, 0.0, 1.0), jobs: int = 1) -> list[ComplexityProfile]:
    """Score a population of (image, mask) pairs.

    Raw metrics are computed per sample (optionally in parallel), then
    normalized over the whole population and combined. Parallel scoring is
    guaranteed to match sequential scoring exactly.
    """
    weights = validate_weights(weights)
    pairs = list(zip(images, masks))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raws = list(pool.map(lambda p: raw_metrics(p[0], p[1]), pairs))
    else:
        raws = [raw_metrics(img, m) for img, m in pairs]
    si = normalize_values([r[0] for r in raws])
    eg = normalize_values([r[1] for r in raws])
    tv = normalize_values([r[2] for r in raws])
    profiles = []
    for i, (si_raw, eg_raw, tv_raw) in enumerate(raws):
        p = ComplexityProfile(si_raw, eg_raw, tv_raw,
                              si_norm=float(si[i]), eg_norm=float(eg[i]),
                              tv_norm=float(tv[i]), weights=weights)
        p.combined = combine(p, weights)
        profiles.append(p)
    return profiles
