"""Run configuration: a flat ``key = value`` text file validated by pydantic.

Lines are UTF-8; ``#`` starts a comment; blank lines are ignored. Unknown keys
are rejected and every derived record is checked with its ``validate()``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .config import PpcrConfig, ScannerConfig
from .errors import ConfigurationError
from .profiles import PROFILES, preset_scanner
from .validator import validate


class RunConfig(BaseModel):
    """Every knob of one experiment run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    output_dir: Path
    seed: int = Field(0, ge=0, lt=2**64)
    workers: int = Field(1, ge=1)

    # phantom
    grid_size: int = Field(128, ge=8)
    spacing_mm: float = Field(2.0, gt=0)
    n_organs: int = Field(4, ge=2, le=6)
    n_lesions: int = Field(2, ge=0, le=4)
    lesion_radius_min_mm: float = Field(4.0, gt=0)
    lesion_radius_max_mm: float = Field(10.0, gt=0)
    lesion_contrast_min: float = Field(2.0, gt=1)
    lesion_contrast_max: float = Field(4.0, gt=1)
    organ_activity_min: float = Field(0.5, gt=0)
    organ_activity_max: float = Field(3.0, gt=0)
    lesion_in_anatomy: bool = False
    dataset_count: int = Field(50, ge=1)
    split_train: float = Field(0.8, ge=0, le=1)
    split_val: float = Field(0.1, ge=0, le=1)
    split_test: float = Field(0.1, ge=0, le=1)

    # scanner
    n_angles_full: int = Field(120, ge=1)
    n_radial_full: int = Field(128, ge=1)
    count_scale: float = Field(50.0, gt=0)
    background_fraction: float = Field(0.05, ge=0)
    mlem_iterations: int = Field(20, ge=1)

    # sampler
    n_ddim_steps: int = Field(50, ge=1)
    psf_on_from_step: int = Field(36, ge=1)
    m_start: int = Field(2, ge=0)
    m_end: int = Field(20, ge=0)
    eta_dc: float = Field(0.05, gt=0)
    mu_nesterov: float = Field(0.9, ge=0, lt=1)
    alpha_warmstart: float = Field(0.3, ge=0, le=1)
    nonneg_projection: bool = True
    epsilon: float = Field(1e-8, gt=0)

    # prior
    n_train_steps: int = Field(1000, ge=1)
    beta_min: float = Field(1e-4, gt=0, lt=1)
    beta_max: float = Field(0.02, gt=0, lt=1)
    s_scale: float = Field(1.0, gt=0)

    # training
    train_steps: int = Field(2000, ge=1)
    batch_size: int = Field(8, ge=1)
    learning_rate: float = Field(2e-3, gt=0)
    level_widths: Tuple[int, int] = (16, 32)
    attention_heads: int = Field(2, ge=1)
    time_embed_dim: int = Field(32, ge=2)
    cond_dropout: float = Field(0.1, ge=0, lt=1)
    log_every: int = Field(10, ge=1)

    @field_validator("level_widths", mode="before")
    @classmethod
    def parse_widths(cls, v):
        """Accept ``"16,32"`` as well as a sequence."""
        if isinstance(v, str):
            parts = [p.strip() for p in v.split(",") if p.strip()]
            if len(parts) != 2:
                raise ValueError("level_widths must list exactly two widths")
            return tuple(int(p) for p in parts)
        return v

    @field_validator("grid_size")
    @classmethod
    def grid_fits_network(cls, v: int) -> int:
        """The denoiser downsamples twice."""
        if v % 4:
            raise ValueError(f"must be divisible by 4, got {v}")
        return v

    @property
    def split(self) -> Tuple[float, float, float]:
        return (self.split_train, self.split_val, self.split_test)

    def scanner_base(self) -> ScannerConfig:
        return ScannerConfig(
            n_angles_full=self.n_angles_full,
            n_radial_full=self.n_radial_full,
            count_scale=self.count_scale,
            background_fraction=self.background_fraction,
        )

    def ppcr(self) -> PpcrConfig:
        return PpcrConfig(
            n_ddim_steps=self.n_ddim_steps,
            psf_on_from_step=self.psf_on_from_step,
            m_start=self.m_start,
            m_end=self.m_end,
            eta_dc=self.eta_dc,
            mu_nesterov=self.mu_nesterov,
            alpha_warmstart=self.alpha_warmstart,
            nonneg_projection=self.nonneg_projection,
            epsilon=self.epsilon,
        )

    def problems(self) -> list[str]:
        """Cross-field violations, including those of the derived records."""
        errors: list[str] = []
        if abs(sum(self.split) - 1.0) > 1e-9:
            errors.append(f"split fractions must sum to 1, got {self.split}")
        if self.lesion_radius_min_mm > self.lesion_radius_max_mm:
            errors.append("lesion_radius_min_mm must not exceed lesion_radius_max_mm")
        if self.lesion_contrast_min > self.lesion_contrast_max:
            errors.append("lesion_contrast_min must not exceed lesion_contrast_max")
        if self.organ_activity_min > self.organ_activity_max:
            errors.append("organ_activity_min must not exceed organ_activity_max")
        if self.beta_min > self.beta_max:
            errors.append("beta_min must not exceed beta_max")
        if self.n_ddim_steps > self.n_train_steps:
            errors.append("n_ddim_steps must not exceed n_train_steps")
        errors.extend(validate(self.scanner_base()).errors)
        for name in PROFILES:
            errors.extend(f"{name}: {e}" for e in validate(preset_scanner(name, self.scanner_base())).errors)
        errors.extend(validate(self.ppcr()).errors)
        return errors


def parse_settings(text: str, source: str = "<config>") -> Dict[str, str]:
    """Flat ``key = value`` pairs; duplicate keys and malformed lines are errors."""
    settings: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{number}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{source}:{number}: empty key")
        if key in settings:
            raise ConfigurationError(f"{source}:{number}: duplicate key {key!r}")
        settings[key] = value
    return settings


def build_run_config(settings: Dict[str, object], base_dir: Path | None = None) -> RunConfig:
    try:
        config = RunConfig(**settings)
    except ValidationError as exc:
        violations = [
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in exc.errors()
        ]
        raise ConfigurationError("invalid run config: " + "; ".join(violations), violations) from exc

    if base_dir is not None and not config.output_dir.is_absolute():
        config = config.model_copy(update={"output_dir": base_dir / config.output_dir})

    problems = config.problems()
    if problems:
        raise ConfigurationError("invalid run config: " + "; ".join(problems), problems)
    return config


def load_run_config(path: Union[str, Path], **overrides) -> RunConfig:
    """Read and validate ``path``; relative ``output_dir`` resolves against its directory.

    Raises:
        OSError: the file cannot be read
        ConfigurationError: unknown key, bad value or failed validation
    """
    path = Path(path)
    settings: Dict[str, object] = dict(parse_settings(path.read_text(encoding="utf-8"), str(path)))
    settings.update({k: v for k, v in overrides.items() if v is not None})
    return build_run_config(settings, path.parent)
