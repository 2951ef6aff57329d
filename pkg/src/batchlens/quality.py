"""Reference image quality metrics: PSNR and SSIM on [0, 1] images."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .imaging import ImageTensor

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass
class QualityReport:
    psnr: float
    ssim: float


def _as_array(img) -> np.ndarray:
    if isinstance(img, ImageTensor):
        return img.data
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    return arr


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB for unit dynamic range.

    Identical images return +inf.
    """
    x, y = _as_array(a), _as_array(b)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """1-D Gaussian taps normalized to sum 1."""
    offsets = np.arange(size) - (size - 1) / 2.0
    taps = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    return taps / taps.sum()


def _window_means(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Gaussian-weighted window means at every fully interior position."""
    half = taps.size // 2
    out = correlate1d(plane, taps, axis=0, mode="constant")
    out = correlate1d(out, taps, axis=1, mode="constant")
    return out[half:plane.shape[0] - half, half:plane.shape[1] - half]


def ssim(a, b) -> float:
    """Mean local structural similarity with an 11x11 Gaussian window.

    Uses sigma 1.5, stability constants K1=0.01 / K2=0.03, dynamic range 1.
    Channels are averaged. Windows must fit: both dimensions need at least
    11 pixels.
    """
    x, y = _as_array(a), _as_array(b)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    h, w, channels = x.shape
    if min(h, w) < SSIM_WINDOW:
        raise ValueError(f"image too small for an {SSIM_WINDOW}x{SSIM_WINDOW} window: {h}x{w}")
    taps = gaussian_window()
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    per_channel = []
    for ch in range(channels):
        xc, yc = x[:, :, ch], y[:, :, ch]
        mu_x = _window_means(xc, taps)
        mu_y = _window_means(yc, taps)
        sigma_x = _window_means(xc * xc, taps) - mu_x * mu_x
        sigma_y = _window_means(yc * yc, taps) - mu_y * mu_y
        sigma_xy = _window_means(xc * yc, taps) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * sigma_xy + c2)
        den = (mu_x * mu_x + mu_y * mu_y + c1) * (sigma_x + sigma_y + c2)
        per_channel.append(np.mean(num / den))
    return float(np.mean(per_channel))


def quality_report(prediction, truth) -> QualityReport:
    return QualityReport(psnr=psnr(prediction, truth), ssim=ssim(prediction, truth))
