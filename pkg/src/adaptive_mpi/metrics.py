"""Quantitative measures: threshold/RMSE/REL depth metrics with median-std
alignment, multi-scale data+gradient losses, and SSIM/PSNR for views."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import fftconvolve

from .depthprep import DisparityMap
from .errors import DegenerateInputError, InvalidArgumentError

log = logging.getLogger(__name__)

PSNR_CAP = 99.0
RATIO_FLOOR = 1e-6


@dataclass
class DepthMetricsReport:
    delta_1: float
    delta_2: float
    delta_3: float
    rmse: float
    rel: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class ViewMetricsReport:
    ssim: float
    psnr: float

    def as_dict(self) -> dict:
        return asdict(self)


def align_median_std(pred: DisparityMap, gt: DisparityMap) -> DisparityMap:
    """Shift/scale pred so its median and standard deviation match gt over the
    jointly valid pixels."""
    joint = pred.valid & gt.valid
    if joint.sum() < 2:
        raise DegenerateInputError("need at least 2 jointly valid pixels to align")
    p = pred.values[joint]
    g = gt.values[joint]
    p_std = p.std()
    if p_std == 0:
        raise DegenerateInputError("prediction has zero spread; cannot align")
    aligned = (pred.values - np.median(p)) / p_std * g.std() + np.median(g)
    return DisparityMap(values=np.maximum(aligned, 0.0), valid=pred.valid.copy())


def depth_metrics(pred_aligned: DisparityMap, gt: DisparityMap) -> DepthMetricsReport:
    """delta_k thresholds at 1.25^k, RMSE and absolute relative error, over
    jointly valid pixels; values floored at 1e-6 for the ratio metrics."""
    joint = pred_aligned.valid & gt.valid
    if not joint.any():
        raise DegenerateInputError("no jointly valid pixels")
    p = pred_aligned.values[joint]
    g = gt.values[joint]
    pc = np.maximum(p, RATIO_FLOOR)
    gc = np.maximum(g, RATIO_FLOOR)
    ratio = np.maximum(pc / gc, gc / pc)
    return DepthMetricsReport(
        delta_1=float((ratio < 1.25).mean()),
        delta_2=float((ratio < 1.25**2).mean()),
        delta_3=float((ratio < 1.25**3).mean()),
        rmse=float(np.sqrt(np.mean((p - g) ** 2))),
        rel=float(np.mean(np.abs(p - g) / gc)),
    )


def loss_data(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean absolute difference over all samples."""
    if pred.shape != target.shape:
        raise InvalidArgumentError("shape mismatch")
    return float(np.abs(pred - target).mean())


def _grad_terms(residual: np.ndarray) -> float:
    """mean(|grad_x| + |grad_y|), forward differences, last row/col replicated
    (so their difference is zero)."""
    gx = np.zeros_like(residual)
    gy = np.zeros_like(residual)
    gx[:, :-1] = residual[:, 1:] - residual[:, :-1]
    gy[:-1, :] = residual[1:, :] - residual[:-1, :]
    return float((np.abs(gx) + np.abs(gy)).mean())


def _pool2(img: np.ndarray) -> np.ndarray:
    """2x mean pooling; odd trailing row/col padded by replication first."""
    if img.shape[0] % 2 or img.shape[1] % 2:
        widths = [(0, img.shape[0] % 2), (0, img.shape[1] % 2)] + [(0, 0)] * (img.ndim - 2)
        img = np.pad(img, widths, mode="edge")
    return (img[0::2, 0::2] + img[0::2, 1::2] + img[1::2, 0::2] + img[1::2, 1::2]) / 4.0


def loss_grad(pred: np.ndarray, target: np.ndarray) -> float:
    """Sum over scales s=0..3 of the mean absolute forward-difference
    gradients of the residual, downscaled by 2x mean pooling per scale."""
    if pred.shape != target.shape:
        raise InvalidArgumentError("shape mismatch")
    residual = np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    total = 0.0
    for s in range(4):
        total += _grad_terms(residual)
        if s < 3:
            residual = _pool2(residual)
    return total


def loss_depth(pred: np.ndarray, target: np.ndarray, alpha: float = 0.5) -> float:
    """Data term plus alpha times the multi-scale gradient term. Inputs are
    expected pre-normalized to [0, 10]."""
    return loss_data(pred, target) + alpha * loss_grad(pred, target)


# ---------------------------------------------------------------------------
# View metrics

_SSIM_SIGMA = 1.5
_SSIM_RADIUS = 5  # 11x11 window
_C1 = 0.01**2
_C2 = 0.03**2


def _gaussian_kernel() -> np.ndarray:
    x = np.arange(-_SSIM_RADIUS, _SSIM_RADIUS + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * _SSIM_SIGMA**2))
    g /= g.sum()
    return np.outer(g, g)


_KERNEL = _gaussian_kernel()


def _ssim_channel(a: np.ndarray, b: np.ndarray) -> float:
    def win(img):
        return fftconvolve(img, _KERNEL, mode="valid")

    mu_a = win(a)
    mu_b = win(b)
    var_a = win(a * a) - mu_a * mu_a
    var_b = win(b * b) - mu_b * mu_b
    cov = win(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + _C1) * (2 * cov + _C2)
    den = (mu_a**2 + mu_b**2 + _C1) * (var_a + var_b + _C2)
    return float((num / den).mean())


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local SSIM, 11x11 Gaussian window sigma=1.5, averaged over
    channels; images expected in [0, 1]."""
    if a.shape != b.shape:
        raise InvalidArgumentError("shape mismatch")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 2:
        a = a[..., None]
        b = b[..., None]
    if min(a.shape[0], a.shape[1]) < 2 * _SSIM_RADIUS + 1:
        log.warning("image smaller than SSIM window; falling back to global statistics")
        va, vb = a.var(), b.var()
        cov = ((a - a.mean()) * (b - b.mean())).mean()
        num = (2 * a.mean() * b.mean() + _C1) * (2 * cov + _C2)
        den = (a.mean() ** 2 + b.mean() ** 2 + _C1) * (va + vb + _C2)
        return float(num / den)
    return float(np.mean([_ssim_channel(a[..., c], b[..., c]) for c in range(a.shape[2])]))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10*log10(1/MSE) with peak 1.0; identical images return the 99 dB cap."""
    if a.shape != b.shape:
        raise InvalidArgumentError("shape mismatch")
    mse = float(np.mean((np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(1.0 / mse))


def crop_margin(img: np.ndarray, fraction: float = 0.05) -> np.ndarray:
    """Trim a fractional frame margin (evaluation crop for rendered views)."""
    if not 0 <= fraction < 0.5:
        raise InvalidArgumentError("crop fraction must be in [0, 0.5)")
    dy = int(round(img.shape[0] * fraction))
    dx = int(round(img.shape[1] * fraction))
    return img[dy : img.shape[0] - dy, dx : img.shape[1] - dx]
