"""Adaptive slicing of an image into depth planes.

Transitions between planes are picked from peaks of the transition index
t = lap(h) / max(eps, h), where h is the normalized histogram of the
preprocessed depth map. A uniform-slicing baseline shares the same layer
assembly for side-by-side evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import CameraIntrinsics
from .depthprep import DisparityMap, PreprocessedDepth, normalize_unit
from .errors import DegenerateInputError, InvalidArgumentError

HIST_BINS = 256
EPSILON = 0.001


@dataclass
class SlicingConfig:
    max_planes: int = 16
    xi: int = 8  # neighborhood zeroed around each selected peak
    min_value: float = 0.1  # transition-index threshold
    include_edge_band: bool = False  # include band pixels in the histogram


@dataclass
class SlicingPlan:
    """Selected transitions and the per-layer disparity placement."""

    transitions: list[int]  # sorted, transitions[0] == 0, transitions[-1] == 255
    plane_disparities: list[float]  # one per layer, far -> near, strictly increasing

    @property
    def layer_count(self) -> int:
        return len(self.transitions) - 1


@dataclass
class Layer:
    """One MPI plane: RGBA content pinned at a scalar disparity.

    occupancy is frozen at slice time; inpainting grows only the alpha
    channel and colors, never the occupancy.
    """

    rgba: np.ndarray  # (H, W, 4) float64
    disparity: float
    occupancy: np.ndarray  # (H, W) bool


@dataclass
class AdaptiveMpi:
    layers: list[Layer]  # far -> near: disparities strictly increasing
    intrinsics: CameraIntrinsics
    source_dims: tuple[int, int]  # (H, W)

    def __post_init__(self):
        disps = [l.disparity for l in self.layers]
        if any(b <= a for a, b in zip(disps, disps[1:])):
            raise InvalidArgumentError("layer disparities must strictly increase far->near")


def histogram(quantized: np.ndarray, exclude: np.ndarray | None = None) -> np.ndarray:
    """Normalized 256-bin histogram over non-excluded pixels."""
    if exclude is not None:
        samples = quantized[~exclude]
    else:
        samples = quantized.ravel()
    if samples.size == 0:
        raise DegenerateInputError("all pixels excluded from histogram")
    counts = np.bincount(samples.ravel(), minlength=HIST_BINS).astype(np.float64)
    return counts / counts.sum()


def transition_index(h: np.ndarray) -> np.ndarray:
    """lap(h) / max(eps, h) with replicate boundary for the Laplacian."""
    hp = np.pad(h, 1, mode="edge")
    lap = hp[:-2] - 2.0 * hp[1:-1] + hp[2:]
    return lap / np.maximum(EPSILON, h)


def select_transitions(
    t: np.ndarray,
    max_planes: int,
    xi: int = 8,
    min_value: float = 0.1,
) -> list[int]:
    """Greedy peak picking: repeatedly take the global maximum of t, zero its
    xi-neighborhood, stop below min_value or at max_planes-1 interior picks.
    Boundary bins 0 and 255 are always transitions."""
    if max_planes < 1:
        raise InvalidArgumentError("max_planes must be >= 1")
    work = np.array(t, dtype=np.float64)
    picks: list[int] = []
    while len(picks) < max_planes - 1:
        i = int(np.argmax(work))  # ties: smallest index
        if work[i] <= min_value:
            break
        picks.append(i)
        work[max(0, i - xi) : i + xi + 1] = 0.0
    return sorted({0, HIST_BINS - 1} | set(picks))


def _assemble(
    src: np.ndarray,
    quantized: np.ndarray,
    raw: DisparityMap,
    transitions: list[int],
    intrinsics: CameraIntrinsics | None,
) -> tuple[SlicingPlan, AdaptiveMpi]:
    """Build layers from transition intervals [T_j, T_{j+1}), last one closed.

    Quantized disparity is inverse depth (larger = nearer), so interval order
    is already far -> near. Empty intervals are merged into their successor
    (predecessor for a trailing empty) so the plan stays a partition.
    """
    h, w = quantized.shape
    if src.shape[:2] != (h, w):
        raise InvalidArgumentError("image and depth dimensions differ")
    unit = normalize_unit(raw)

    bounds = list(transitions)
    members: list[np.ndarray] = []
    for j in range(len(bounds) - 1):
        lo, hi = bounds[j], bounds[j + 1]
        last = j + 1 == len(bounds) - 1
        members.append((quantized >= lo) & ((quantized <= hi) if last else (quantized < hi)))

    # Drop empty layers by merging their interval into a neighbor.
    j = 0
    while len(members) > 1 and j < len(members):
        if members[j].any():
            j += 1
            continue
        if j < len(members) - 1:
            members[j + 1] |= members[j]
            del bounds[j + 1]
        else:
            members[j - 1] |= members[j]
            del bounds[j]
        del members[j]
        j = 0

    # Plane placement uses raw disparity means; the bilateral filter can move
    # edge pixels across quantization bins, so adjacent interval means may
    # invert. Merge such intervals to keep disparities strictly increasing.
    means = [float(unit[m].mean()) for m in members]
    j = 1
    while j < len(members):
        if means[j] <= means[j - 1]:
            members[j - 1] |= members[j]
            means[j - 1] = float(unit[members[j - 1]].mean())
            del members[j], means[j], bounds[j]
            j = max(1, j - 1)
        else:
            j += 1

    layers = []
    for mask, disparity in zip(members, means):
        rgba = np.zeros((h, w, 4), dtype=np.float64)
        rgba[..., :3][mask] = src[mask]
        rgba[..., 3][mask] = 1.0
        layers.append(Layer(rgba=rgba, disparity=disparity, occupancy=mask))

    if intrinsics is None:
        intrinsics = CameraIntrinsics(fx=float(w), fy=float(w), cx=w / 2.0, cy=h / 2.0)
    plan = SlicingPlan(
        transitions=bounds,
        plane_disparities=[l.disparity for l in layers],
    )
    mpi = AdaptiveMpi(layers=layers, intrinsics=intrinsics, source_dims=(h, w))
    return plan, mpi


def slice_adaptive(
    src: np.ndarray,
    pre: PreprocessedDepth,
    raw: DisparityMap,
    cfg: SlicingConfig | None = None,
    intrinsics: CameraIntrinsics | None = None,
) -> tuple[SlicingPlan, AdaptiveMpi]:
    """Histogram -> transition index -> greedy selection -> layer assembly."""
    cfg = cfg or SlicingConfig()
    exclude = None if cfg.include_edge_band else pre.edge_band
    h = histogram(pre.quantized, exclude=exclude)
    t = transition_index(h)
    transitions = select_transitions(t, cfg.max_planes, cfg.xi, cfg.min_value)
    return _assemble(src, pre.quantized, raw, transitions, intrinsics)


def slice_uniform(
    src: np.ndarray,
    pre: PreprocessedDepth,
    raw: DisparityMap,
    n_planes: int,
    intrinsics: CameraIntrinsics | None = None,
) -> tuple[SlicingPlan, AdaptiveMpi]:
    """Evenly spaced transitions floor(255*j/n); same layer assembly as adaptive."""
    if n_planes < 1:
        raise InvalidArgumentError("n_planes must be >= 1")
    transitions = sorted({(255 * j) // n_planes for j in range(n_planes + 1)})
    return _assemble(src, pre.quantized, raw, transitions, intrinsics)
