"""Gaussian scanner PSF as a separable kernel with reflect boundaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.errors import GeometryError
from ..core.grid import GridImage

FWHM_TO_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
TRUNCATE_SIGMAS = 4.0


@dataclass(frozen=True, eq=False)
class PsfKernel:
    """Normalized, symmetric 1D Gaussian taps truncated at 4 sigma."""

    fwhm_mm: float
    sigma_px: float
    taps: np.ndarray

    def __post_init__(self) -> None:
        taps = np.array(self.taps, dtype=np.float64, copy=True)
        if taps.ndim != 1 or taps.size % 2 != 1:
            raise GeometryError(f"PSF taps must be odd-length 1D, got shape {taps.shape}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def radius(self) -> int:
        return self.taps.size // 2

    @property
    def is_identity(self) -> bool:
        return self.taps.size == 1


def make_psf(fwhm_mm: float, spacing_mm: float) -> PsfKernel:
    """Sampled Gaussian with sigma_px = fwhm / (2 sqrt(2 ln 2) spacing)."""
    if fwhm_mm < 0 or spacing_mm <= 0:
        raise GeometryError(f"invalid PSF parameters fwhm={fwhm_mm}, spacing={spacing_mm}")
    if fwhm_mm == 0:
        return PsfKernel(0.0, 0.0, np.array([1.0]))

    sigma = fwhm_mm / (FWHM_TO_SIGMA * spacing_mm)
    radius = int(math.ceil(TRUNCATE_SIGMAS * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    return PsfKernel(fwhm_mm, sigma, g / g.sum())


def _source_index(n: int, radius: int) -> np.ndarray:
    # padded position -> source pixel under half-sample symmetric reflection
    return np.pad(np.arange(n), radius, mode="symmetric")


def _filter_axis(arr: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    n = arr.shape[axis]
    radius = taps.size // 2
    padded = np.moveaxis(np.take(arr, _source_index(n, radius), axis=axis), axis, 0)
    out = np.zeros((n,) + padded.shape[1:])
    for k, w in enumerate(taps):
        out += w * padded[k:k + n]
    return np.moveaxis(out, 0, axis)


def _filter_axis_adjoint(arr: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    n = arr.shape[axis]
    radius = taps.size // 2
    moved = np.moveaxis(arr, axis, 0)
    spread = np.zeros((n + 2 * radius,) + moved.shape[1:])
    for k, w in enumerate(taps):
        spread[k:k + n] += w * moved
    out = np.zeros_like(moved, dtype=np.float64)
    np.add.at(out, _source_index(n, radius), spread)
    return np.moveaxis(out, 0, axis)


def blur(values: np.ndarray, kernel: PsfKernel) -> np.ndarray:
    """Separable blur of a 2D array."""
    if kernel.is_identity:
        return np.array(values, dtype=np.float64, copy=True)
    out = _filter_axis(np.asarray(values, dtype=np.float64), kernel.taps, 0)
    return _filter_axis(out, kernel.taps, 1)


def blur_adjoint(values: np.ndarray, kernel: PsfKernel) -> np.ndarray:
    """Exact transpose of :func:`blur`; equals it away from the border."""
    if kernel.is_identity:
        return np.array(values, dtype=np.float64, copy=True)
    out = _filter_axis_adjoint(np.asarray(values, dtype=np.float64), kernel.taps, 1)
    return _filter_axis_adjoint(out, kernel.taps, 0)


def apply_psf(img: GridImage, k: PsfKernel) -> GridImage:
    """Separable 2D convolution with reflect boundary handling."""
    return img.with_data(blur(img.data, k))
