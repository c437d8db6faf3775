"""Scanner and sampler configuration records."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class ScannerConfig:
    """Parameters of the low-quality forward operator A_lr and its background.

    ``count_scale_norm`` is ``None`` until :func:`petsr.physics.operator.calibrate_scanner`
    fixes it for an acquisition; ``background_per_bin`` of ``None`` means
    "``background_fraction`` of the mean expected counts", resolved at calibration.
    """

    psf_fwhm_mm: float = 0.0
    n_angles_full: int = 120
    n_radial_full: int = 128
    angular_rebin: int = 1
    radial_rebin: int = 1
    dose_fraction: float = 1.0
    background_per_bin: Optional[float] = None
    count_scale: float = 50.0
    target_spacing_mm: float = 2.0
    background_fraction: float = 0.05
    count_scale_norm: Optional[float] = None
    name: str = "custom"

    @property
    def n_angles(self) -> int:
        """Angular bins after rebinning."""
        return self.n_angles_full // self.angular_rebin

    @property
    def n_radial(self) -> int:
        """Radial bins after rebinning."""
        return self.n_radial_full // self.radial_rebin

    @property
    def is_calibrated(self) -> bool:
        return self.count_scale_norm is not None and self.background_per_bin is not None

    @property
    def rate_scale(self) -> float:
        """dose_fraction * count_scale_norm (requires calibration)."""
        if self.count_scale_norm is None:
            raise ValueError("scanner config is not calibrated")
        return self.dose_fraction * self.count_scale_norm

    def with_overrides(self, **changes) -> "ScannerConfig":
        return replace(self, **changes)

    def validate(self) -> list[str]:
        """Return every violated invariant (empty = valid)."""
        errors: list[str] = []

        if not (self.psf_fwhm_mm >= 0 and math.isfinite(self.psf_fwhm_mm)):
            errors.append(f"psf_fwhm_mm must be >= 0, got {self.psf_fwhm_mm}")
        for key in ("n_angles_full", "n_radial_full", "angular_rebin", "radial_rebin"):
            value = getattr(self, key)
            if not isinstance(value, int) or value < 1:
                errors.append(f"{key} must be a positive integer, got {value}")
        if (
            isinstance(self.angular_rebin, int) and self.angular_rebin >= 1
            and self.n_angles_full % self.angular_rebin != 0
        ):
            errors.append(
                f"n_angles_full ({self.n_angles_full}) must be divisible by "
                f"angular_rebin ({self.angular_rebin})"
            )
        if (
            isinstance(self.radial_rebin, int) and self.radial_rebin >= 1
            and self.n_radial_full % self.radial_rebin != 0
        ):
            errors.append(
                f"n_radial_full ({self.n_radial_full}) must be divisible by "
                f"radial_rebin ({self.radial_rebin})"
            )
        if not (0 < self.dose_fraction <= 1):
            errors.append("dose_fraction must be in (0,1]")
        if self.background_per_bin is not None and not self.background_per_bin >= 0:
            errors.append(f"background_per_bin must be >= 0, got {self.background_per_bin}")
        if not self.count_scale > 0:
            errors.append(f"count_scale must be > 0, got {self.count_scale}")
        if not self.target_spacing_mm > 0:
            errors.append(f"target_spacing_mm must be > 0, got {self.target_spacing_mm}")
        if not self.background_fraction >= 0:
            errors.append(f"background_fraction must be >= 0, got {self.background_fraction}")
        if self.count_scale_norm is not None and not self.count_scale_norm > 0:
            errors.append(f"count_scale_norm must be > 0, got {self.count_scale_norm}")

        return errors


@dataclass(frozen=True)
class PpcrConfig:
    """Hyperparameters of the PPCR sampler (step indices are 1-based)."""

    n_ddim_steps: int = 50
    psf_on_from_step: int = 36
    m_start: int = 2
    m_end: int = 20
    eta_dc: float = 0.05
    mu_nesterov: float = 0.9
    alpha_warmstart: float = 0.3
    nonneg_projection: bool = True
    epsilon: float = 1e-8

    def with_overrides(self, **changes) -> "PpcrConfig":
        return replace(self, **changes)

    def validate(self) -> list[str]:
        """Return every violated invariant (empty = valid)."""
        errors: list[str] = []

        if not isinstance(self.n_ddim_steps, int) or self.n_ddim_steps < 1:
            errors.append(f"n_ddim_steps must be a positive integer, got {self.n_ddim_steps}")
        elif not (1 <= self.psf_on_from_step <= self.n_ddim_steps + 1):
            errors.append(
                f"psf_on_from_step must be in [1, {self.n_ddim_steps + 1}], "
                f"got {self.psf_on_from_step}"
            )
        if self.m_start < 0 or self.m_end < 0:
            errors.append("m_start and m_end must be >= 0")
        if self.m_start > self.m_end:
            errors.append(f"m_start ({self.m_start}) must be <= m_end ({self.m_end})")
        if not self.eta_dc > 0:
            errors.append(f"eta_dc must be > 0, got {self.eta_dc}")
        if not (0 <= self.mu_nesterov < 1):
            errors.append(f"mu_nesterov must be in [0,1), got {self.mu_nesterov}")
        if not (0 <= self.alpha_warmstart <= 1):
            errors.append(f"alpha_warmstart must be in [0,1], got {self.alpha_warmstart}")
        if not self.epsilon > 0:
            errors.append(f"epsilon must be > 0, got {self.epsilon}")

        return errors
