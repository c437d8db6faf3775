"""Scanner-aware forward operator A(z) = G(H z) + b and its adjoint.

G is projection followed by angular/radial rebinning and the dose-scaled
count calibration; H is the Gaussian PSF (or identity, for the early PPCR
phase). The adjoint chain is rebin^T -> backproject -> H^T -> scale.
"""

from __future__ import annotations

import logging
from dataclasses import replace
from enum import Enum
from functools import lru_cache

import numpy as np

from ..core.config import ScannerConfig
from ..core.errors import ConfigurationError, DomainError, GeometryError
from ..core.grid import GridImage, Sinogram, SinogramKind, Units
from .psf import PsfKernel, blur, blur_adjoint, make_psf
from .projector import (
    ProjectionGeometry,
    back_project,
    forward_project,
    rebin_adjoint_values,
    rebin_values,
)

logger = logging.getLogger(__name__)


class PsfMode(str, Enum):
    IDENTITY = "identity"
    FULL = "full"


class ScannerOperator:
    """Matched forward/adjoint pair for one scanner config on one image grid."""

    def __init__(
        self,
        cfg: ScannerConfig,
        image_size: int,
        spacing_mm: float,
        psf_mode: PsfMode = PsfMode.FULL,
        rate_scale: float | None = None,
    ):
        problems = cfg.validate()
        if problems:
            raise ConfigurationError("invalid scanner config: " + "; ".join(problems), problems)
        self.cfg = cfg
        self.psf_mode = PsfMode(psf_mode)
        self.geometry = ProjectionGeometry.covering(
            cfg.n_angles_full, cfg.n_radial_full, image_size, spacing_mm
        )
        if self.psf_mode is PsfMode.FULL:
            self.kernel = make_psf(cfg.psf_fwhm_mm, spacing_mm)
        else:
            self.kernel = PsfKernel(0.0, 0.0, np.array([1.0]))
        if rate_scale is None:
            if not cfg.is_calibrated:
                raise ConfigurationError(
                    "scanner config is not calibrated; call calibrate_scanner first"
                )
            rate_scale = cfg.rate_scale
        self.rate_scale = float(rate_scale)
        self.background = float(cfg.background_per_bin or 0.0)

    @property
    def image_shape(self) -> tuple[int, int]:
        return (self.geometry.image_size, self.geometry.image_size)

    @property
    def sino_shape(self) -> tuple[int, int]:
        return (self.cfg.n_angles, self.cfg.n_radial)

    def linear(self, z: np.ndarray) -> np.ndarray:
        """Count-rate part G(H z), without background."""
        full = forward_project(blur(z, self.kernel), self.geometry)
        return self.rate_scale * rebin_values(full, self.cfg.angular_rebin, self.cfg.radial_rebin)

    def forward(self, z: np.ndarray) -> np.ndarray:
        return self.linear(z) + self.background

    def adjoint(self, r: np.ndarray) -> np.ndarray:
        if np.shape(r) != self.sino_shape:
            raise GeometryError(f"residual shape {np.shape(r)} does not match {self.sino_shape}")
        full = rebin_adjoint_values(r, self.cfg.angular_rebin, self.cfg.radial_rebin)
        return self.rate_scale * blur_adjoint(back_project(full, self.geometry), self.kernel)


@lru_cache(maxsize=32)
def get_operator(
    cfg: ScannerConfig, image_size: int, spacing_mm: float, psf_mode: PsfMode
) -> ScannerOperator:
    """Cached operator; configs are frozen so they key the cache."""
    return ScannerOperator(cfg, image_size, spacing_mm, PsfMode(psf_mode))


def square_size(img: GridImage) -> int:
    if img.width != img.height:
        raise GeometryError(f"square grid required, got {img.height}x{img.width}")
    return img.width


def require_nonnegative(z: GridImage) -> None:
    if np.any(z.data < 0):
        idx = tuple(int(i) for i in np.unravel_index(int(np.argmin(z.data)), z.shape))
        raise DomainError(f"activity must be >= 0; found {z.data[idx]:.6g} at pixel {idx}")


def calibrate_scanner(cfg: ScannerConfig, z_ref: GridImage) -> ScannerConfig:
    """Fix ``count_scale_norm`` (and an unset background) against a reference phantom.

    After calibration the mean of G(H z_ref) over the rebinned sinogram equals
    ``dose_fraction * count_scale``.
    """
    require_nonnegative(z_ref)
    raw = ScannerOperator(cfg, square_size(z_ref), z_ref.spacing_mm, PsfMode.FULL, rate_scale=1.0)
    mean_raw = float(raw.linear(z_ref.data).mean())
    if not mean_raw > 0:
        raise DomainError("cannot calibrate counts against an all-zero activity map")

    norm = cfg.count_scale / mean_raw
    background = cfg.background_per_bin
    if background is None:
        background = cfg.background_fraction * cfg.dose_fraction * cfg.count_scale
    logger.debug(f"Calibrated {cfg.name}: norm={norm:.6g} background={background:.6g}")
    return replace(cfg, count_scale_norm=norm, background_per_bin=float(background))


def forward_expected(
    z: GridImage, cfg: ScannerConfig, psf_mode: PsfMode = PsfMode.FULL
) -> Sinogram:
    """Expected counts lambda = A(z) for a calibrated config."""
    require_nonnegative(z)
    op = get_operator(cfg, square_size(z), z.spacing_mm, PsfMode(psf_mode))
    return Sinogram(op.forward(z.data), SinogramKind.EXPECTED)


def adjoint_apply(
    residual: Sinogram | np.ndarray,
    cfg: ScannerConfig,
    psf_mode: PsfMode,
    like: GridImage,
) -> GridImage:
    """A^T applied to a sinogram-domain residual, on the grid of ``like``."""
    values = residual.data if isinstance(residual, Sinogram) else np.asarray(residual)
    op = get_operator(cfg, square_size(like), like.spacing_mm, PsfMode(psf_mode))
    return GridImage(op.adjoint(values), like.spacing_mm, Units.ACTIVITY)
