"""Drop-in scoring, calibration, and selection for external training loops.

A BridgeHandle owns the selection knobs and the calibrated pivot; the
module functions take plain numpy batches, validate them at the boundary,
and delegate every computation to the batchlens core, so results are
bit-identical to the library and CLI paths.

The handle is not thread-safe: create one handle per data-loader worker.
Arrays are used zero-copy when they arrive contiguous in float64 layout
and are copied otherwise.
"""

from __future__ import annotations

import numpy as np

from batchlens.calibration import estimate_pivot
from batchlens.complexity import score_profiles, validate_weights
from batchlens.imaging import ImageTensor, MaskGrid
from batchlens.selection import SelectorConfig, proposed_scores, select_topk

__all__ = ["BridgeHandle", "bridge_score", "bridge_select", "bridge_calibrate"]
__version__ = "0.1.0"


class BridgeHandle:
    """Session state: a selector configuration plus the calibrated pivot."""

    def __init__(self, b: int = 1, big_batch_ratio: float = 2.0,
                 delta: float = 0.01, beta: float = 1.0,
                 weights=(0.0, 0.0, 1.0), seed: int = 0,
                 pivot: float | None = None):
        self.config = SelectorConfig(b=b, big_batch_ratio=big_batch_ratio,
                                     delta=delta, beta=beta,
                                     weights=validate_weights(weights),
                                     seed=seed)
        self.pivot = pivot

    def __repr__(self) -> str:
        return (f"BridgeHandle(b={self.config.b}, delta={self.config.delta}, "
                f"weights={self.config.weights}, pivot={self.pivot})")


def _as_float_batch(arr, name: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.size == 0:
        raise ValueError(f"{name} is empty")
    return out


def _image_batch(images) -> list[ImageTensor]:
    arr = _as_float_batch(images, "images")
    if arr.ndim == 3:
        arr = arr[:, :, :, np.newaxis]
    if arr.ndim != 4:
        raise ValueError(f"images must be (N, H, W) or (N, H, W, C), got shape {arr.shape}")
    if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
        raise ValueError("image values must lie in [0, 1]")
    return [ImageTensor(arr[i]) for i in range(arr.shape[0])]


def _mask_batch(masks, n: int, height: int, width: int) -> list[MaskGrid]:
    arr = np.ascontiguousarray(masks)
    if arr.ndim != 3:
        raise ValueError(f"masks must be (N, H, W), got shape {arr.shape}")
    if arr.shape != (n, height, width):
        raise ValueError(f"masks shape {arr.shape} does not match images "
                         f"({n}, {height}, {width})")
    return [MaskGrid(arr[i]) for i in range(n)]


def bridge_score(handle: BridgeHandle, images, masks, losses) -> np.ndarray:
    """Per-sample ratio scores for a batch of images, masks, and losses.

    Complexity is computed by the core metrics, normalized over this batch,
    combined with the handle's weights, and divided into the losses around
    the handle's pivot. The pivot must be set, either at construction or by
    bridge_calibrate.
    """
    if handle.pivot is None:
        raise ValueError("handle has no pivot; call bridge_calibrate first "
                         "or construct the handle with pivot=...")
    tensors = _image_batch(images)
    grids = _mask_batch(masks, len(tensors), tensors[0].height, tensors[0].width)
    loss_arr = _as_float_batch(losses, "losses")
    if loss_arr.ndim != 1 or loss_arr.size != len(tensors):
        raise ValueError(f"losses must be one value per sample, got shape "
                         f"{loss_arr.shape} for {len(tensors)} samples")
    if np.any(loss_arr < 0.0) or not np.all(np.isfinite(loss_arr)):
        raise ValueError("losses must be finite and nonnegative")
    profiles = score_profiles(tensors, grids, weights=handle.config.weights)
    combined = np.array([p.combined for p in profiles])
    return proposed_scores(loss_arr, combined, handle.pivot, handle.config.delta)


def bridge_select(handle: BridgeHandle, scores, b: int | None = None) -> np.ndarray:
    """Indices of the b largest scores; ties go to the lower index."""
    arr = _as_float_batch(scores, "scores")
    if arr.ndim != 1:
        raise ValueError(f"scores must be 1-D, got shape {arr.shape}")
    return select_topk(arr, handle.config.b if b is None else b)


def bridge_calibrate(handle: BridgeHandle, complexities) -> float:
    """Estimate the pivot from a complexity population and store it."""
    arr = _as_float_batch(complexities, "complexities")
    if arr.ndim != 1:
        raise ValueError(f"complexities must be 1-D, got shape {arr.shape}")
    handle.pivot = estimate_pivot(arr).pivot
    return handle.pivot
