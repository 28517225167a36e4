"""Occlusion-aware layer inpainting.

Each non-nearest layer accumulates everything at or behind it, a dilated
margin of the known region is intersected with the occluded area, and the
margin is filled by Jacobi diffusion (discrete Laplace equation with the
known pixels as Dirichlet boundary). The fill backend is deliberately
deterministic; swap in a learned model behind the same task interface
if sharper synthesis is needed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from . import imagecore
from .errors import DegenerateInputError, InvalidArgumentError
from .slicer import AdaptiveMpi, Layer

log = logging.getLogger(__name__)

DEFAULT_BAND_PX = 40
BAND_REFERENCE_DIM = 768  # band of 40 px is calibrated for min(H, W) == 768

_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass
class InpaintTask:
    input_rgba: np.ndarray  # accumulated background; alpha marks known pixels
    fill_mask: np.ndarray  # (H, W) bool, pixels to synthesize
    layer_index: int


@dataclass
class TrainingPair:
    input_rgba: np.ndarray  # layer with an eroded border removed
    mask: np.ndarray  # the removed border band
    target: np.ndarray  # the original layer


def scaled_band(band_px: int, dims: tuple[int, int]) -> int:
    """Proportional band width: band_px at min(H, W) == 768."""
    return max(1, round(band_px * min(dims) / BAND_REFERENCE_DIM))


def accumulate_background(mpi: AdaptiveMpi, layer_index: int) -> np.ndarray:
    """Composite of layers 0..layer_index (far to near), nearest-included wins."""
    if not 0 <= layer_index < len(mpi.layers):
        raise InvalidArgumentError(f"layer index {layer_index} out of range")
    h, w = mpi.source_dims
    out = np.zeros((h, w, 4), dtype=np.float64)
    for layer in mpi.layers[: layer_index + 1]:
        m = layer.occupancy
        out[..., :3][m] = layer.rgba[..., :3][m]
        out[..., 3][m] = 1.0
    return out


def make_inference_mask(
    accumulated: np.ndarray, occluders: np.ndarray, band_px: int = DEFAULT_BAND_PX
) -> np.ndarray:
    """Dilate the known region by the band, keep only occluded new pixels."""
    known = accumulated[..., 3] > 0.5
    if known.shape != occluders.shape:
        raise InvalidArgumentError("accumulated/occluders dimensions differ")
    dilated = imagecore.morph(known, "dilate", 3, band_px)
    return dilated & ~known & occluders


def make_training_pair(layer_rgba: np.ndarray, band_px: int = DEFAULT_BAND_PX) -> TrainingPair:
    """Erode a layer's occupancy by the band; the removed ring is the mask,
    the original layer the supervision target."""
    occupancy = layer_rgba[..., 3] > 0.5
    eroded = imagecore.morph(occupancy, "erode", 3, band_px)
    if not eroded.any():
        raise DegenerateInputError("erosion removed the whole layer")
    input_rgba = layer_rgba.copy()
    input_rgba[..., 3] = eroded.astype(np.float64)
    input_rgba[..., :3][~eroded] = 0.0
    return TrainingPair(input_rgba=input_rgba, mask=occupancy & ~eroded, target=layer_rgba.copy())


def diffuse_fill(task: InpaintTask, max_iters: int = 2000, tol: float = 1e-4) -> np.ndarray:
    """Solve the discrete Laplace equation on the fill pixels by Jacobi
    iteration; known pixels are the Dirichlet boundary. Fill components with
    no known neighbor get the global mean known color."""
    known = task.input_rgba[..., 3] > 0.5
    fill = task.fill_mask & ~known
    out = task.input_rgba.copy()
    out[..., 3] = (known | task.fill_mask).astype(np.float64)
    if not fill.any():
        return out
    if not known.any():
        raise InvalidArgumentError("diffuse_fill needs at least one known pixel")
    mean_color = task.input_rgba[..., :3][known].mean(axis=0)

    # Components that never touch the boundary cannot diffuse: constant-fill them.
    labels, n = ndimage.label(fill, structure=_CROSS)
    touching = np.unique(labels[ndimage.binary_dilation(known, _CROSS) & fill])
    orphan = ~np.isin(labels, touching) & fill
    if orphan.any():
        log.warning("fill region has %d pixels with no known neighbor; using mean color",
                    int(orphan.sum()))
        out[..., :3][orphan] = mean_color
        fill = fill & ~orphan
        if not fill.any():
            return out

    # Jacobi on the bounding box of the fill region.
    ys, xs = np.nonzero(fill)
    y0, y1 = max(0, ys.min() - 1), min(fill.shape[0], ys.max() + 2)
    x0, x1 = max(0, xs.min() - 1), min(fill.shape[1], xs.max() + 2)
    box = np.s_[y0:y1, x0:x1]
    f = fill[box]
    k = known[box]
    vals = np.where(k[..., None], task.input_rgba[box][..., :3], 0.0)
    vals[f] = mean_color
    weight = (k | f).astype(np.float64)

    den = np.zeros_like(weight)
    for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        den += _shift(weight, dy, dx)
    den3 = den[..., None]
    fidx = f[..., None]
    for it in range(max_iters):
        num = np.zeros_like(vals)
        for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            num += _shift(vals * weight[..., None], dy, dx)
        new = np.divide(num, den3, out=vals.copy(), where=fidx & (den3 > 0))
        delta = np.abs(new[f] - vals[f]).max()
        vals = new
        if delta < tol:
            break

    filled = out[..., :3]
    sub = filled[box]
    sub[f] = vals[f]
    filled[box] = sub
    return out


def _shift(arr: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Shift with zero padding (off-grid neighbors carry no weight)."""
    out = np.zeros_like(arr)
    src_y = slice(max(0, -dy), arr.shape[0] - max(0, dy))
    dst_y = slice(max(0, dy), arr.shape[0] - max(0, -dy))
    src_x = slice(max(0, -dx), arr.shape[1] - max(0, dx))
    dst_x = slice(max(0, dx), arr.shape[1] - max(0, -dx))
    out[dst_y, dst_x] = arr[src_y, src_x]
    return out


def inpaint_mpi(mpi: AdaptiveMpi, band_px: int = DEFAULT_BAND_PX,
                max_iters: int = 2000, tol: float = 1e-4) -> AdaptiveMpi:
    """Extend every occluded layer margin; the nearest layer is never touched.

    Masks are derived from the slice-time occupancies (which inpainting never
    modifies), so reapplying the operation reproduces the same fills exactly.
    """
    band = scaled_band(band_px, mpi.source_dims)
    n = len(mpi.layers)
    new_layers = []
    for j, layer in enumerate(mpi.layers):
        rgba = layer.rgba.copy()
        if j < n - 1:
            occluders = np.zeros(mpi.source_dims, dtype=bool)
            for nearer in mpi.layers[j + 1 :]:
                occluders |= nearer.occupancy
            acc = accumulate_background(mpi, j)
            fill_mask = make_inference_mask(acc, occluders, band)
            if fill_mask.any():
                filled = diffuse_fill(InpaintTask(acc, fill_mask, j), max_iters, tol)
                rgba[..., :3][fill_mask] = filled[..., :3][fill_mask]
                rgba[..., 3][fill_mask] = 1.0
        new_layers.append(Layer(rgba=rgba, disparity=layer.disparity,
                                occupancy=layer.occupancy.copy()))
    return AdaptiveMpi(layers=new_layers, intrinsics=mpi.intrinsics,
                       source_dims=mpi.source_dims)


def export_training_pairs(
    mpi: AdaptiveMpi,
    out_dir: str | Path,
    count: int,
    band_px: int = DEFAULT_BAND_PX,
    seed: int = 0,
) -> list[dict]:
    """Sample layers uniformly and write (input, mask, target) PNG triplets
    plus an index.json for training an external learned inpainter."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    band = scaled_band(band_px, mpi.source_dims)
    index = []
    made = 0
    attempts = 0
    while made < count and attempts < count * 10:
        attempts += 1
        j = int(rng.integers(0, len(mpi.layers)))
        acc = accumulate_background(mpi, j)
        try:
            pair = make_training_pair(acc, band)
        except DegenerateInputError:
            continue
        stem = f"pair_{made:04d}"
        names = {
            "layer_index": j,
            "input": f"{stem}_input.png",
            "mask": f"{stem}_mask.png",
            "target": f"{stem}_target.png",
        }
        _save_rgba(pair.input_rgba, out_dir / names["input"])
        Image.fromarray((pair.mask * 255).astype(np.uint8)).save(out_dir / names["mask"])
        _save_rgba(pair.target, out_dir / names["target"])
        index.append(names)
        made += 1
    with open(out_dir / "index.json", "w") as f:
        json.dump({"band_px": band, "seed": seed, "pairs": index}, f, indent=2, sort_keys=True)
    return index


def _save_rgba(rgba: np.ndarray, path: Path) -> None:
    q = np.clip(np.floor(rgba * 255.0 + 0.5), 0, 255).astype(np.uint8)
    Image.fromarray(q, mode="RGBA").save(path)
