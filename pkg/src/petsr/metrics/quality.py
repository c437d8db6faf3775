"""Whole-image and lesion-level fidelity metrics against an HR reference."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from skimage.metrics import normalized_root_mse, peak_signal_noise_ratio, structural_similarity

from ..core.errors import MetricError
from ..core.grid import GridImage, LesionMask

SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(ref: GridImage, est: GridImage) -> tuple[np.ndarray, np.ndarray]:
    if ref.shape != est.shape:
        raise MetricError(f"dimension mismatch: ref {ref.shape} vs est {est.shape}")
    return ref.data, est.data


def psnr(ref: GridImage, est: GridImage) -> float:
    """10 log10(max(ref)^2 / MSE) in dB; identical images give +inf."""
    r, e = _pair(ref, est)
    peak = float(r.max())
    if not peak > 0:
        raise MetricError("PSNR needs a reference with a positive maximum")
    if np.array_equal(r, e):
        return math.inf
    return float(peak_signal_noise_ratio(r, e, data_range=peak))


def ssim(ref: GridImage, est: GridImage) -> float:
    """Mean local SSIM, 11x11 Gaussian window (sigma 1.5), L = max(ref) - min(ref)."""
    r, e = _pair(ref, est)
    data_range = float(r.max() - r.min())
    if not data_range > 0:
        data_range = float(np.abs(r).max()) or 1.0
    try:
        return float(
            structural_similarity(
                r, e,
                data_range=data_range,
                gaussian_weights=True,
                sigma=SSIM_SIGMA,
                use_sample_covariance=False,
                K1=SSIM_K1,
                K2=SSIM_K2,
            )
        )
    except ValueError as exc:
        raise MetricError(f"SSIM not computable: {exc}") from exc


def nmse(ref: GridImage, est: GridImage) -> float:
    """||ref - est||^2 / ||ref||^2."""
    r, e = _pair(ref, est)
    if not np.any(r):
        raise MetricError("NMSE needs a nonzero reference")
    return float(normalized_root_mse(r, e, normalization="euclidean") ** 2)


@dataclass(frozen=True)
class LesionStats:
    label: str
    d_suv_max: float
    d_suv_mean: float
    lesion_nmse: float


def lesion_stats(ref: GridImage, est: GridImage, mask: LesionMask) -> LesionStats:
    """Absolute SUVmax/SUVmean deviations and NMSE restricted to the mask."""
    r, e = _pair(ref, est)
    if mask.mask.shape != r.shape:
        raise MetricError(f"mask {mask.mask.shape} does not match image {r.shape}")
    if mask.pixel_count == 0:
        raise MetricError(f"lesion mask {mask.label!r} is empty")
    rv, ev = r[mask.mask], e[mask.mask]
    energy = float(np.sum(rv ** 2))
    if not energy > 0:
        raise MetricError(f"reference is zero inside lesion mask {mask.label!r}")
    return LesionStats(
        label=mask.label,
        d_suv_max=abs(float(ev.max()) - float(rv.max())),
        d_suv_mean=abs(float(ev.mean()) - float(rv.mean())),
        lesion_nmse=float(np.sum((rv - ev) ** 2)) / energy,
    )
