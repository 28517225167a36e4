"""Raster primitives shared by the whole pipeline.

Images are numpy float64 arrays, (H, W) for single channel or (H, W, C) with
C in {3, 4}; nominal range [0, 1] for color, unbounded for disparity.
Binary masks are boolean (H, W) arrays.

Border policy for every convolution / morphology here is edge replication,
so no phantom dark frame is introduced for the edge detector to latch onto.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError

# Rec. 601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])

# Sobel kernels, gradient positive toward increasing x (columns) / y (rows).
_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Rec. 601 luma of an (H, W, 3) image."""
    return rgb[..., :3] @ _LUMA


def resize_bilinear(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize to (out_h, out_w); exact copy when dimensions match."""
    if out_h < 1 or out_w < 1:
        raise InvalidArgumentError(f"resize target must be >= 1x1, got {out_h}x{out_w}")
    if src.shape[0] == out_h and src.shape[1] == out_w:
        return src.copy()
    out = cv2.resize(src, (out_w, out_h), interpolation=cv2.INTER_LINEAR)
    return np.asarray(out, dtype=src.dtype)


def bilateral_filter(
    src: np.ndarray,
    spatial_sigma: float,
    range_sigma: float,
    radius: int,
) -> np.ndarray:
    """Edge-preserving smoothing of a single-channel image.

    Circular neighborhood of the given radius, Gaussian spatial and range
    weights, replicated borders.
    """
    if src.ndim != 2:
        raise InvalidArgumentError("bilateral_filter expects a single-channel image")
    if spatial_sigma <= 0 or range_sigma <= 0:
        raise InvalidArgumentError("bilateral sigmas must be positive")
    if radius < 1:
        raise InvalidArgumentError("bilateral radius must be >= 1")
    out = cv2.bilateralFilter(
        src.astype(np.float32),
        d=2 * radius + 1,
        sigmaColor=float(range_sigma),
        sigmaSpace=float(spatial_sigma),
        borderType=cv2.BORDER_REPLICATE,
    )
    return out.astype(np.float64)


def canny_edges(src: np.ndarray, low_thresh: float, high_thresh: float) -> np.ndarray:
    """Canny edge mask of a single-channel [0..255] image.

    Sobel gradients, non-maximum suppression (strict against the gradient
    direction so a clean step yields a one-pixel line), double threshold with
    8-connected hysteresis.
    """
    if src.ndim != 2:
        raise InvalidArgumentError("canny_edges expects a single-channel image")
    if low_thresh > high_thresh:
        raise InvalidArgumentError("low_thresh must be <= high_thresh")
    img = src.astype(np.float64)
    gx = ndimage.convolve(img, _SOBEL_X, mode="nearest")
    gy = ndimage.convolve(img, _SOBEL_Y, mode="nearest")
    mag = np.hypot(gx, gy)

    # Quantize gradient direction to 0/45/90/135 degrees.
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = np.zeros(mag.shape, dtype=np.int8)
    sector[(angle >= 22.5) & (angle < 67.5)] = 1
    sector[(angle >= 67.5) & (angle < 112.5)] = 2
    sector[(angle >= 112.5) & (angle < 157.5)] = 3

    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    padded = np.pad(mag, 1, mode="edge")
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (dy, dx) in offsets.items():
        fwd = padded[1 + dy : padded.shape[0] - 1 + dy, 1 + dx : padded.shape[1] - 1 + dx]
        bwd = padded[1 - dy : padded.shape[0] - 1 - dy, 1 - dx : padded.shape[1] - 1 - dx]
        keep |= (sector == s) & (mag > fwd) & (mag >= bwd)

    weak = keep & (mag >= low_thresh)
    strong = keep & (mag >= high_thresh)
    if not strong.any():
        return np.zeros(mag.shape, dtype=bool)
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3)))
    kept_labels = np.unique(labels[strong])
    return np.isin(labels, kept_labels[kept_labels > 0])


def morph(mask: np.ndarray, op: str, kernel_size: int, iterations: int) -> np.ndarray:
    """Iterated binary erosion/dilation with a square kernel, replicated border."""
    if kernel_size < 1 or kernel_size % 2 == 0:
        raise InvalidArgumentError(f"kernel size must be odd and >= 1, got {kernel_size}")
    if iterations < 0:
        raise InvalidArgumentError("iterations must be >= 0")
    if op not in ("erode", "dilate"):
        raise InvalidArgumentError(f"unknown morphology op {op!r}")
    if iterations == 0 or kernel_size == 1:
        return mask.copy()
    # n iterations of a k x k square equal one pass with size n*(k-1)+1.
    size = iterations * (kernel_size - 1) + 1
    filt = ndimage.maximum_filter if op == "dilate" else ndimage.minimum_filter
    return filt(mask.astype(np.uint8), size=size, mode="nearest").astype(bool)


@dataclass
class DwtStack:
    """One level of 2D Haar coefficients (orthonormal convention).

    ac holds the approximation, (dh, dv, dd) the horizontal / vertical /
    diagonal details, each of shape (H/2, W/2[, C]). pad_bottom / pad_right
    record edge-replication padding applied to odd inputs so the inverse
    can crop it away.
    """

    ac: np.ndarray
    dh: np.ndarray
    dv: np.ndarray
    dd: np.ndarray
    pad_bottom: bool = False
    pad_right: bool = False

    def stacked(self) -> np.ndarray:
        """Coefficients concatenated channel-wise: (H/2, W/2, 4C)."""
        parts = [np.atleast_3d(c) for c in (self.ac, self.dh, self.dv, self.dd)]
        return np.concatenate(parts, axis=2)


def haar_dwt(src: np.ndarray) -> DwtStack:
    """Single-level orthonormal Haar transform, per channel.

    Odd dimensions are padded by edge replication; the padding is recorded
    in the returned stack.
    """
    img = np.asarray(src, dtype=np.float64)
    pad_bottom = img.shape[0] % 2 == 1
    pad_right = img.shape[1] % 2 == 1
    if pad_bottom or pad_right:
        widths = [(0, int(pad_bottom)), (0, int(pad_right))] + [(0, 0)] * (img.ndim - 2)
        img = np.pad(img, widths, mode="edge")
    a = img[0::2, 0::2]
    b = img[0::2, 1::2]
    c = img[1::2, 0::2]
    d = img[1::2, 1::2]
    return DwtStack(
        ac=(a + b + c + d) / 2.0,
        dh=(a - b + c - d) / 2.0,
        dv=(a + b - c - d) / 2.0,
        dd=(a - b - c + d) / 2.0,
        pad_bottom=pad_bottom,
        pad_right=pad_right,
    )


def haar_idwt(stack: DwtStack) -> np.ndarray:
    """Inverse of haar_dwt; crops replication padding per the stack metadata."""
    ac, dh, dv, dd = stack.ac, stack.dh, stack.dv, stack.dd
    if not (ac.shape == dh.shape == dv.shape == dd.shape):
        raise InvalidArgumentError("DWT coefficient blocks have mismatched shapes")
    out_shape = (ac.shape[0] * 2, ac.shape[1] * 2) + ac.shape[2:]
    out = np.empty(out_shape, dtype=np.float64)
    out[0::2, 0::2] = (ac + dh + dv + dd) / 2.0
    out[0::2, 1::2] = (ac - dh + dv - dd) / 2.0
    out[1::2, 0::2] = (ac + dh - dv - dd) / 2.0
    out[1::2, 1::2] = (ac - dh - dv + dd) / 2.0
    if stack.pad_bottom:
        out = out[:-1]
    if stack.pad_right:
        out = out[:, :-1]
    return out
