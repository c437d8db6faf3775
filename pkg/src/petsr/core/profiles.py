"""Degradation presets for the standard and out-of-distribution protocols.

Each preset fixes the scanner blur, dose and sinogram rebinning of one
evaluation setting; every other scanner field comes from the base config.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .config import ScannerConfig
from .errors import ConfigurationError


@dataclass(frozen=True)
class DegradationProfile:
    """Immutable degradation setting."""

    name: str
    tag: str  # file tag, e.g. "std"
    psf_fwhm_mm: float
    dose_fraction: float
    angular_rebin: int
    radial_rebin: int
    target_spacing_mm: float
    sr_factor: int  # nominal resolution gain over the target spacing

    def __post_init__(self) -> None:
        if self.psf_fwhm_mm < 0:
            raise ValueError(f"psf_fwhm_mm must be >= 0, got {self.psf_fwhm_mm}")
        if not (0 < self.dose_fraction <= 1):
            raise ValueError(f"dose_fraction must be in (0,1], got {self.dose_fraction}")
        if self.angular_rebin < 1 or self.radial_rebin < 1:
            raise ValueError("rebin factors must be >= 1")

    def apply(self, base: ScannerConfig) -> ScannerConfig:
        return replace(
            base,
            psf_fwhm_mm=self.psf_fwhm_mm,
            dose_fraction=self.dose_fraction,
            angular_rebin=self.angular_rebin,
            radial_rebin=self.radial_rebin,
            target_spacing_mm=self.target_spacing_mm,
            name=self.name,
        )


PROFILES: dict[str, DegradationProfile] = {
    "standard": DegradationProfile(
        name="standard",
        tag="std",
        psf_fwhm_mm=8.0,
        dose_fraction=0.10,
        angular_rebin=2,
        radial_rebin=2,
        target_spacing_mm=8.0,
        sr_factor=4,
    ),
    "ood": DegradationProfile(
        name="ood",
        tag="ood",
        psf_fwhm_mm=12.0,
        dose_fraction=0.05,
        angular_rebin=3,
        radial_rebin=2,
        target_spacing_mm=12.0,
        sr_factor=6,
    ),
}


def get_profile(name: str) -> DegradationProfile:
    """Get a degradation profile by name.

    Raises:
        ConfigurationError: If the profile is unknown
    """
    if name not in PROFILES:
        raise ConfigurationError(f"Unknown preset: {name}. Available: {list(PROFILES.keys())}")
    return PROFILES[name]


def preset_scanner(name: str, base: Optional[ScannerConfig] = None) -> ScannerConfig:
    """Apply a named preset on top of ``base`` (defaults when omitted)."""
    return get_profile(name).apply(base or ScannerConfig())
