"""Novel-view synthesis from an MPI: per-plane homography warps and
back-to-front over-compositing, plus canned camera trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .camera import CameraIntrinsics, CameraPose
from .errors import InvalidArgumentError
from .slicer import AdaptiveMpi

_PLANE_NORMAL = np.array([0.0, 0.0, 1.0])


@dataclass
class RenderSettings:
    parallax_scale: float = 1.0  # relative disparity -> metric inverse depth
    background_color: tuple[float, float, float] = (0.0, 0.0, 0.0)
    eps_d: float = 1e-4  # inverse-depth floor; disparity 0 plane sits near infinity

    def __post_init__(self):
        if not (np.isfinite(self.parallax_scale) and self.parallax_scale > 0):
            raise InvalidArgumentError("parallax_scale must be finite and positive")


def plane_homography(
    K: CameraIntrinsics,
    pose: CameraPose,
    disparity: float,
    scale: float,
) -> np.ndarray:
    """Target->reference homography for a fronto-parallel plane.

    H = K (R - t n^T d s) K^-1 with n = (0,0,1), i.e. the plane sits at
    depth z = 1/(d*s) in the reference camera. Exact identity for the
    identity pose so identity renders stay bit-exact.
    """
    if disparity <= 0:
        raise InvalidArgumentError("plane disparity must be positive")
    r, t = pose.rotation, pose.translation
    if np.array_equal(r, np.eye(3)) and not t.any():
        return np.eye(3)
    km = K.matrix()
    core = r - np.outer(t, _PLANE_NORMAL) * (disparity * scale)
    return km @ core @ np.linalg.inv(km)


def warp_layer(layer_rgba: np.ndarray, H: np.ndarray, out_dims: tuple[int, int]) -> np.ndarray:
    """Inverse-warp an RGBA layer: each target pixel maps through H into the
    source and samples with premultiplied-alpha bilinear interpolation.
    Samples outside the source are fully transparent."""
    if abs(np.linalg.det(H)) < 1e-12:
        raise InvalidArgumentError("singular homography")
    out_h, out_w = out_dims
    if np.array_equal(H, np.eye(3)) and layer_rgba.shape[:2] == (out_h, out_w):
        return layer_rgba.copy()

    pre = layer_rgba.copy()
    pre[..., :3] *= pre[..., 3:4]

    xs, ys = np.meshgrid(np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64))
    w = H[2, 0] * xs + H[2, 1] * ys + H[2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (H[0, 0] * xs + H[0, 1] * ys + H[0, 2]) / w
        v = (H[1, 0] * xs + H[1, 1] * ys + H[1, 2]) / w
    behind = w <= 1e-12
    u = np.where(behind, -1.0, u)
    v = np.where(behind, -1.0, v)

    out = _bilinear_sample(pre, u, v)
    alpha = out[..., 3]
    np.divide(out[..., 0], alpha, out=out[..., 0], where=alpha > 1e-12)
    np.divide(out[..., 1], alpha, out=out[..., 1], where=alpha > 1e-12)
    np.divide(out[..., 2], alpha, out=out[..., 2], where=alpha > 1e-12)
    out[..., :3][alpha <= 1e-12] = 0.0
    return out


def _bilinear_sample(img: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sample img at fractional (u, v); coordinates outside contribute zeros."""
    h, w = img.shape[:2]
    x0 = np.floor(u).astype(np.int64)
    y0 = np.floor(v).astype(np.int64)
    fx = u - x0
    fy = v - y0
    out = np.zeros(u.shape + (img.shape[2],), dtype=np.float64)
    for dy, dx, wt in (
        (0, 0, (1 - fy) * (1 - fx)),
        (0, 1, (1 - fy) * fx),
        (1, 0, fy * (1 - fx)),
        (1, 1, fy * fx),
    ):
        xi = x0 + dx
        yi = y0 + dy
        inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        vals = img[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
        out += (wt * inside)[..., None] * vals
    return out


def composite(layers_far_to_near: list[np.ndarray], bg: tuple[float, float, float]) -> np.ndarray:
    """Back-to-front over-operator: out = alpha*layer + (1-alpha)*out."""
    if not layers_far_to_near:
        raise InvalidArgumentError("nothing to composite")
    h, w = layers_far_to_near[0].shape[:2]
    out = np.empty((h, w, 3), dtype=np.float64)
    out[:] = bg
    for layer in layers_far_to_near:
        if layer.shape[:2] != (h, w):
            raise InvalidArgumentError("composite layers must share dimensions")
        alpha = layer[..., 3:4]
        out = alpha * layer[..., :3] + (1.0 - alpha) * out
    return out


def render_view(
    mpi: AdaptiveMpi,
    pose: CameraPose,
    settings: RenderSettings | None = None,
    out_dims: tuple[int, int] | None = None,
) -> np.ndarray:
    """Warp every layer by its plane homography and composite far to near."""
    settings = settings or RenderSettings()
    if not mpi.layers:
        raise InvalidArgumentError("empty MPI")
    out_dims = out_dims or mpi.source_dims
    warped = []
    for layer in mpi.layers:
        # inverse depth d*s + eps_d, expressed as an effective disparity
        d_eff = layer.disparity + settings.eps_d / settings.parallax_scale
        H = plane_homography(mpi.intrinsics, pose, d_eff, settings.parallax_scale)
        warped.append(warp_layer(layer.rgba, H, out_dims))
    return composite(warped, settings.background_color)


def trajectory_poses(kind: str, frames: int, amplitude: float) -> list[CameraPose]:
    """Canned camera paths: sinusoidal swing, circular orbit, sinusoidal zoom."""
    if frames < 1:
        raise InvalidArgumentError("frames must be >= 1")
    poses = []
    for k in range(frames):
        phase = 2.0 * math.pi * k / frames
        if kind == "swing":
            t = (amplitude * math.sin(phase), 0.0, 0.0)
        elif kind == "circle":
            t = (amplitude * math.cos(phase), amplitude * math.sin(phase), 0.0)
        elif kind == "zoom":
            t = (0.0, 0.0, amplitude * math.sin(phase))
        else:
            raise InvalidArgumentError(f"unknown trajectory kind {kind!r}")
        poses.append(CameraPose.from_translation(*t))
    return poses


def render_trajectory(
    mpi: AdaptiveMpi,
    kind: str,
    frames: int,
    amplitude: float,
    settings: RenderSettings | None = None,
) -> list[np.ndarray]:
    return [
        render_view(mpi, pose, settings) for pose in trajectory_poses(kind, frames, amplitude)
    ]
