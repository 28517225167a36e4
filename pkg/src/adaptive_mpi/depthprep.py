"""Disparity ingestion, discontinuity-enhancing preprocessing and ensemble fusion.

Disparity is relative inverse depth: larger means nearer. File formats:
16-bit grayscale PNG (value/65535, zero marks invalid) and little-endian
float PFM ("Pf" header, NaN marks invalid).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import imagecore
from .errors import DegenerateInputError, InvalidArgumentError

log = logging.getLogger(__name__)


@dataclass
class DisparityMap:
    """Single-channel relative inverse-depth raster with a validity mask."""

    values: np.ndarray  # (H, W) float64, valid samples >= 0
    valid: np.ndarray  # (H, W) bool

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.values.shape != self.valid.shape or self.values.ndim != 2:
            raise InvalidArgumentError("disparity raster/validity shape mismatch")
        if not self.valid.any():
            raise InvalidArgumentError("disparity map has no valid pixel")
        if not np.all(np.isfinite(self.values[self.valid])):
            raise InvalidArgumentError("disparity map contains non-finite valid samples")
        if np.any(self.values[self.valid] < 0):
            raise InvalidArgumentError("valid disparity samples must be >= 0")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass
class PreprocessConfig:
    """Tunables for the discontinuity-enhancing preprocessing stage.

    The source algorithm fixes none of these; defaults are the package's own.
    """

    bilateral_spatial_sigma: float = 5.0
    bilateral_range_sigma: float = 25.0
    bilateral_radius: int = 7
    canny_low: float = 50.0
    canny_high: float = 150.0
    band_kernel: int = 3
    band_iterations: int = 3


@dataclass
class PreprocessedDepth:
    """Quantized depth plus the expanded discontinuity band."""

    quantized: np.ndarray  # (H, W) int32 in [0, 255]
    edge_band: np.ndarray  # (H, W) bool


def normalize_quantize(d: DisparityMap) -> np.ndarray:
    """Affine-map valid disparity to integers [0, 255]; invalid pixels become 0."""
    vals = d.values[d.valid]
    lo, hi = float(vals.min()), float(vals.max())
    if hi <= lo:
        raise DegenerateInputError("constant disparity map cannot be quantized")
    q = np.zeros(d.shape, dtype=np.int32)
    scaled = (d.values - lo) * (255.0 / (hi - lo))
    q[d.valid] = np.clip(np.rint(scaled[d.valid]), 0, 255).astype(np.int32)
    return q


def normalize_unit(d: DisparityMap) -> np.ndarray:
    """Min-max normalize valid disparity to [0, 1]; invalid pixels become 0."""
    vals = d.values[d.valid]
    lo, hi = float(vals.min()), float(vals.max())
    if hi <= lo:
        raise DegenerateInputError("constant disparity map cannot be normalized")
    out = np.zeros(d.shape, dtype=np.float64)
    out[d.valid] = (d.values[d.valid] - lo) / (hi - lo)
    return out


def preprocess(d: DisparityMap, cfg: PreprocessConfig | None = None) -> PreprocessedDepth:
    """Quantize, bilateral-filter, detect edges and expand them into a band."""
    cfg = cfg or PreprocessConfig()
    q = normalize_quantize(d)
    filtered = imagecore.bilateral_filter(
        q.astype(np.float64),
        cfg.bilateral_spatial_sigma,
        cfg.bilateral_range_sigma,
        cfg.bilateral_radius,
    )
    edges = imagecore.canny_edges(filtered, cfg.canny_low, cfg.canny_high)
    band = imagecore.morph(edges, "dilate", cfg.band_kernel, cfg.band_iterations)
    quantized = np.clip(np.rint(filtered), 0, 255).astype(np.int32)
    quantized[~d.valid] = 0
    return PreprocessedDepth(quantized=quantized, edge_band=band)


def fuse_ensemble(
    predictions: list[np.ndarray], target_h: int, target_w: int
) -> DisparityMap:
    """Fuse teacher predictions into a pseudo ground truth disparity map.

    Each member is min-max normalized to [0, 1], bilinearly resized to the
    target resolution and fused per pixel by the median (even counts use the
    mean of the two central values). Constant members are skipped.
    """
    if not predictions:
        raise InvalidArgumentError("fuse_ensemble needs at least one prediction")
    resized = []
    for i, pred in enumerate(predictions):
        p = np.asarray(pred, dtype=np.float64)
        lo, hi = float(p.min()), float(p.max())
        if hi <= lo:
            log.warning("skipping constant ensemble member %d", i)
            continue
        p = (p - lo) / (hi - lo)
        resized.append(imagecore.resize_bilinear(p, target_h, target_w))
    if not resized:
        raise DegenerateInputError("all ensemble members were constant")
    fused = np.median(np.stack(resized, axis=0), axis=0)
    return DisparityMap(values=fused, valid=np.ones(fused.shape, dtype=bool))


# ---------------------------------------------------------------------------
# Disparity file I/O


def load_disparity(path: str | Path) -> DisparityMap:
    path = Path(path)
    if path.suffix.lower() == ".pfm":
        return read_pfm(path)
    if path.suffix.lower() == ".png":
        return read_disparity_png(path)
    raise InvalidArgumentError(f"unsupported disparity format: {path.name}")


def save_disparity(d: DisparityMap, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".pfm":
        write_pfm(d, path)
    elif path.suffix.lower() == ".png":
        write_disparity_png(d, path)
    else:
        raise InvalidArgumentError(f"unsupported disparity format: {path.name}")


def read_disparity_png(path: str | Path) -> DisparityMap:
    """16-bit grayscale PNG; zero pixels are invalid."""
    img = Image.open(path)
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{path}: expected single-channel PNG")
    raw = arr.astype(np.float64) / 65535.0
    return DisparityMap(values=raw, valid=arr > 0)


def write_disparity_png(d: DisparityMap, path: str | Path) -> None:
    scaled = np.clip(np.rint(d.values * 65535.0), 0, 65535).astype(np.uint16)
    # Invalid pixels encode as 0; nudge valid zeros up so they stay valid.
    scaled[d.valid & (scaled == 0)] = 1
    scaled[~d.valid] = 0
    Image.fromarray(scaled).save(path)


def read_pfm(path: str | Path) -> DisparityMap:
    """Grayscale PFM, standard bottom-up row order; NaN marks invalid."""
    with open(path, "rb") as f:
        header = f.readline().strip()
        if header != b"Pf":
            raise InvalidArgumentError(f"{path}: not a grayscale PFM file")
        dims = f.readline().split()
        w, h = int(dims[0]), int(dims[1])
        scale = float(f.readline())
        data = np.fromfile(f, "<f4" if scale < 0 else ">f4", count=w * h)
    if data.size != w * h:
        raise InvalidArgumentError(f"{path}: truncated PFM payload")
    arr = data.reshape(h, w)[::-1].astype(np.float64)
    valid = np.isfinite(arr)
    arr = np.where(valid, arr, 0.0)
    return DisparityMap(values=arr, valid=valid)


def write_pfm(d: DisparityMap, path: str | Path) -> None:
    arr = np.where(d.valid, d.values, np.nan).astype(np.float32)
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{w} {h}\n".encode())
        f.write(b"-1.0\n")
        arr[::-1].astype("<f4").tofile(f)
