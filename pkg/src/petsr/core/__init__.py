"""Shared domain types, configuration records, presets and grid I/O."""

from .config import PpcrConfig, ScannerConfig
from .errors import (
    ConfigurationError,
    DomainError,
    GenerationError,
    GeometryError,
    GridFormatError,
    MetricError,
    NumericalFailure,
    PetSrError,
    SamplerFailure,
    TrainingFailure,
)
from .grid import GridImage, LesionMask, Sinogram, SinogramKind, Units
from .profiles import PROFILES, DegradationProfile, get_profile, preset_scanner
from .validator import ValidationReport, validate

__all__ = [
    "GridImage",
    "Sinogram",
    "SinogramKind",
    "LesionMask",
    "Units",
    "ScannerConfig",
    "PpcrConfig",
    "DegradationProfile",
    "PROFILES",
    "get_profile",
    "preset_scanner",
    "ValidationReport",
    "validate",
    "PetSrError",
    "ConfigurationError",
    "GeometryError",
    "DomainError",
    "NumericalFailure",
    "GenerationError",
    "GridFormatError",
    "MetricError",
    "TrainingFailure",
    "SamplerFailure",
]
