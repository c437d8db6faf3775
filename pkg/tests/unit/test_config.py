"""Tests for scanner/sampler configs, validation reports and degradation presets."""

import dataclasses

import pytest

from petsr.core.config import PpcrConfig, ScannerConfig
from petsr.core.errors import ConfigurationError
from petsr.core.profiles import PROFILES, get_profile, preset_scanner
from petsr.core.validator import validate


class TestScannerConfig:
    def test_defaults_are_valid(self):
        assert ScannerConfig().validate() == []

    def test_rebinned_sizes(self):
        cfg = ScannerConfig(n_angles_full=120, n_radial_full=128, angular_rebin=3, radial_rebin=2)
        assert (cfg.n_angles, cfg.n_radial) == (40, 64)

    def test_rebin_must_divide(self):
        errors = ScannerConfig(n_angles_full=121, angular_rebin=2).validate()
        assert any("divisible" in e for e in errors)

    def test_dose_fraction_range(self):
        assert ScannerConfig(dose_fraction=0.0).validate()
        assert ScannerConfig(dose_fraction=1.5).validate()
        assert not ScannerConfig(dose_fraction=1.0).validate()

    def test_uncalibrated_rate_scale(self):
        cfg = ScannerConfig()
        assert not cfg.is_calibrated
        with pytest.raises(ValueError, match="not calibrated"):
            cfg.rate_scale

    def test_rate_scale_after_calibration_fields(self):
        cfg = ScannerConfig(dose_fraction=0.1, count_scale_norm=2.0, background_per_bin=0.5)
        assert cfg.is_calibrated
        assert cfg.rate_scale == pytest.approx(0.2)

    def test_frozen(self):
        with pytest.raises(dataclasses.FrozenInstanceError):
            ScannerConfig().psf_fwhm_mm = 1.0  # type: ignore[misc]


class TestPpcrConfig:
    def test_defaults_are_valid(self):
        assert PpcrConfig().validate() == []

    def test_psf_switch_may_be_one_past_last_step(self):
        assert PpcrConfig(n_ddim_steps=50, psf_on_from_step=51).validate() == []
        assert PpcrConfig(n_ddim_steps=50, psf_on_from_step=52).validate()

    def test_ramp_order(self):
        errors = PpcrConfig(m_start=5, m_end=2).validate()
        assert any("m_start" in e for e in errors)

    def test_momentum_range(self):
        assert PpcrConfig(mu_nesterov=1.0).validate()
        assert not PpcrConfig(mu_nesterov=0.0).validate()

    def test_collects_every_violation(self):
        errors = PpcrConfig(eta_dc=0.0, alpha_warmstart=2.0, epsilon=0.0).validate()
        assert len(errors) == 3


class TestValidationReport:
    def test_ok_report(self):
        report = validate(ScannerConfig())
        assert report.ok
        assert report.summary == "ScannerConfig: ok"

    def test_raise_for_errors(self):
        report = validate(PpcrConfig(eta_dc=-1.0))
        assert not report.ok
        with pytest.raises(ConfigurationError, match="eta_dc") as info:
            report.raise_for_errors()
        assert info.value.violations == report.errors

    def test_unsupported_type(self):
        report = validate(object())
        assert not report.ok
        assert report.to_dict()["subject"] == "object"


class TestProfiles:
    def test_standard_preset_values(self):
        p = PROFILES["standard"]
        assert p.psf_fwhm_mm == 8.0
        assert p.dose_fraction == 0.10
        assert (p.angular_rebin, p.radial_rebin) == (2, 2)
        assert p.target_spacing_mm == 8.0
        assert p.sr_factor == 4

    def test_ood_preset_values(self):
        p = PROFILES["ood"]
        assert p.psf_fwhm_mm == 12.0
        assert p.dose_fraction == 0.05
        assert (p.angular_rebin, p.radial_rebin) == (3, 2)
        assert p.target_spacing_mm == 12.0
        assert p.sr_factor == 6

    def test_both_presets_exist(self):
        assert set(PROFILES) == {"standard", "ood"}

    def test_get_profile_unknown(self):
        with pytest.raises(ConfigurationError, match="Unknown preset"):
            get_profile("ultra")

    def test_preset_scanner_keeps_base_fields(self):
        base = ScannerConfig(n_angles_full=60, count_scale=10.0)
        cfg = preset_scanner("ood", base)
        assert cfg.name == "ood"
        assert cfg.n_angles_full == 60
        assert cfg.count_scale == 10.0
        assert cfg.psf_fwhm_mm == 12.0
        assert cfg.validate() == []

    def test_invalid_profile_rejected(self):
        with pytest.raises(ValueError):
            dataclasses.replace(PROFILES["standard"], dose_fraction=0.0)
