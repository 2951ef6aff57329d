"""Image and mask primitives for the inpainting toolkit.

Images are float64 grids with values in [0, 1]; masks are binary grids where
1 marks an observed pixel and 0 a missing one. Loading, grayscale conversion,
mask generation, and report I/O live here.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from PIL import Image

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_SUPPORTED_MODES = {"L", "RGB", "LA", "RGBA", "P"}


class ImageTensor:
    """H x W x C pixel grid in [0, 1] with a lazily cached grayscale plane."""

    def __init__(self, data):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError(f"expected 2-D or 3-D pixel data, got {arr.ndim}-D")
        h, w, c = arr.shape
        if c not in (1, 3):
            raise ValueError(f"unsupported channel count {c}; expected 1 or 3")
        if h < 3 or w < 3:
            # Sobel filtering needs a full 3x3 neighbourhood.
            raise ValueError(f"image must be at least 3x3, got {h}x{w}")
        if arr.size and (float(arr.min()) < 0.0 or float(arr.max()) > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        self.data = arr
        self._gray: GrayPlane | None = None

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def gray(self) -> "GrayPlane":
        if self._gray is None:
            self._gray = to_grayscale(self)
        return self._gray

    def __repr__(self) -> str:
        return f"ImageTensor({self.height}x{self.width}x{self.channels})"


class GrayPlane:
    """Single-channel plane holding [0, 1] values and 0-255 quantized levels.

    Quantization is round-half-up: level = floor(255 * value + 0.5), clamped.
    """

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"gray plane must be 2-D, got {arr.ndim}-D")
        self.values = arr
        self._levels: np.ndarray | None = None

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def levels(self) -> np.ndarray:
        if self._levels is None:
            q = np.floor(255.0 * self.values + 0.5)
            self._levels = np.clip(q, 0, 255).astype(np.uint8)
        return self._levels


class MaskGrid:
    """H x W binary grid: 1 = observed pixel, 0 = missing pixel."""

    def __init__(self, bits):
        arr = np.asarray(bits)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got {arr.ndim}-D")
        uniq = np.unique(arr)
        if not np.all(np.isin(uniq, (0, 1))):
            raise ValueError("mask entries must be 0 or 1")
        self.bits = arr.astype(np.uint8)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def missing_count(self) -> int:
        return int(self.bits.size - int(self.bits.sum()))

    @property
    def missing_fraction(self) -> float:
        return self.missing_count / self.bits.size

    def missing(self) -> np.ndarray:
        """Boolean grid, True where the pixel is missing."""
        return self.bits == 0

    def __repr__(self) -> str:
        return f"MaskGrid({self.height}x{self.width}, missing={self.missing_count})"


def to_grayscale(img: ImageTensor) -> GrayPlane:
    """Collapse an image to one plane: identity for 1 channel, luma for 3."""
    if img.channels == 1:
        return GrayPlane(img.data[:, :, 0])
    if img.channels == 3:
        w = np.asarray(LUMA_WEIGHTS)
        vals = img.data @ w
        # Weights sum to 1, but guard rounding at the top of the range.
        return GrayPlane(np.clip(vals, 0.0, 1.0))
    raise ValueError(f"unsupported channel count {img.channels}")


def regular_mask(height: int, width: int) -> MaskGrid:
    """Centered rectangular hole of size (height/2) x (width/2).

    Exactly a quarter of the pixels are missing. Dimensions must be even so
    the hole centers exactly; odd sizes are rejected.
    """
    if height % 2 or width % 2:
        raise ValueError(f"regular mask needs even dimensions, got {height}x{width}")
    if height < 4 or width < 4:
        raise ValueError("regular mask needs dimensions of at least 4")
    bits = np.ones((height, width), dtype=np.uint8)
    top, left = height // 4, width // 4
    bits[top:top + height // 2, left:left + width // 2] = 0
    return MaskGrid(bits)


def irregular_mask(height: int, width: int, target_ratio: float, seed: int,
                   tolerance: float = 0.02, max_attempts: int = 500) -> MaskGrid:
    """Union of random rectangular and elliptical holes.

    Holes are added until the missing fraction lands inside
    [target_ratio - tolerance, target_ratio + tolerance]. Hole extents are
    uniform in [dim/16, dim/4] per axis. Deterministic for a given seed.
    """
    if not 0.0 < target_ratio < 1.0:
        raise ValueError(f"target_ratio must be in (0, 1), got {target_ratio}")
    rng = np.random.default_rng(seed)
    bits = np.ones((height, width), dtype=np.uint8)
    total = height * width
    yy, xx = np.mgrid[0:height, 0:width]
    attempts = 0
    while True:
        missing = total - int(bits.sum())
        frac = missing / total
        if frac >= target_ratio - tolerance:
            return MaskGrid(bits)
        if attempts >= max_attempts:
            raise ValueError(
                f"could not reach missing ratio {target_ratio} within "
                f"{max_attempts} attempts (stuck at {frac:.4f})")
        hh = rng.uniform(max(height / 16.0, 1.0), max(height / 4.0, 2.0))
        ww = rng.uniform(max(width / 16.0, 1.0), max(width / 4.0, 2.0))
        cy = rng.uniform(hh / 2.0, height - hh / 2.0)
        cx = rng.uniform(ww / 2.0, width - ww / 2.0)
        if rng.random() < 0.5:
            hole = ((np.abs(yy - cy) <= hh / 2.0)
                    & (np.abs(xx - cx) <= ww / 2.0))
        else:
            hole = (((yy - cy) / (hh / 2.0)) ** 2
                    + ((xx - cx) / (ww / 2.0)) ** 2) <= 1.0
        candidate = bits & ~hole.astype(np.uint8)
        new_frac = (total - int(candidate.sum())) / total
        if new_frac <= target_ratio + tolerance:
            bits = candidate
        attempts += 1


def bilinear_resize(values: np.ndarray, out_height: int, out_width: int) -> np.ndarray:
    """Resize a (H, W) or (H, W, C) float array with bilinear interpolation.

    Uses the half-pixel-center convention, in float64 throughout.
    """
    arr = np.asarray(values, dtype=np.float64)
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[:, :, np.newaxis]
    h, w, _ = arr.shape
    if (h, w) == (out_height, out_width):
        out = arr.copy()
        return out[:, :, 0] if squeeze else out

    def axis_coords(n_in, n_out):
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0.0, n_in - 1.0)
        lo = np.floor(src).astype(int)
        hi = np.minimum(lo + 1, n_in - 1)
        frac = src - lo
        return lo, hi, frac

    y0, y1, fy = axis_coords(h, out_height)
    x0, x1, fx = axis_coords(w, out_width)
    rows = arr[y0] * (1.0 - fy)[:, None, None] + arr[y1] * fy[:, None, None]
    out = (rows[:, x0] * (1.0 - fx)[None, :, None]
           + rows[:, x1] * fx[None, :, None])
    return out[:, :, 0] if squeeze else out


def load_image(path, size: int | None = None) -> ImageTensor:
    """Read an 8-bit PNG or binary PGM into an ImageTensor in [0, 1].

    If `size` is given the image is resized to size x size with bilinear
    interpolation. 16-bit and other exotic bit depths are rejected.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                raise ValueError(f"unsupported bit depth in {path} (mode {mode})")
            if mode not in _SUPPORTED_MODES:
                raise ValueError(f"unsupported image mode {mode} in {path}")
            if mode == "P":
                im = im.convert("RGB")
            elif mode == "LA":
                im = im.convert("L")
            elif mode == "RGBA":
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.float64) / 255.0
    except ValueError:
        raise
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"cannot decode image file {path}: {exc}") from exc
    if size is not None:
        arr = bilinear_resize(arr, size, size)
        arr = np.clip(arr, 0.0, 1.0)
    return ImageTensor(arr)


def _format_value(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def save_report(rows, path, fieldnames=None):
    """Write a list of dict rows to CSV or JSON, chosen by file suffix.

    Floats are written with shortest round-trip formatting, so reading a
    report back reproduces every value exactly.
    """
    rows = list(rows)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2, default=_json_default)
            fh.write("\n")
        return
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _format_value(row[k]) for k in fieldnames})


def _json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)!r}")


def load_report(path):
    """Read a CSV or JSON report back into a list of dicts.

    CSV fields that parse as numbers come back as int or float.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for key, text in raw.items():
                row[key] = _parse_field(text)
            rows.append(row)
    return rows


def _parse_field(text):
    if text is None:
        return text
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_manifest(path) -> list[str]:
    """Read a dataset manifest: newline-separated relative paths."""
    base = Path(path).parent
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(str(base / line))
    return entries
