"""Exception hierarchy shared by every petsr module."""

from __future__ import annotations

from typing import Any, Optional


class PetSrError(Exception):
    """Base class for all petsr errors."""


class ConfigurationError(PetSrError, ValueError):
    """Invalid or unknown configuration (preset, variant, run config)."""

    def __init__(self, message: str, violations: Optional[list[str]] = None):
        super().__init__(message)
        self.violations = list(violations or [])


class GeometryError(PetSrError, ValueError):
    """Grid, sinogram or operator dimensions do not agree."""


class DomainError(PetSrError, ValueError):
    """Input outside the domain of an operator (e.g. negative activity)."""


class NumericalFailure(PetSrError, ArithmeticError):
    """A computation produced a non-finite value."""


class GenerationError(PetSrError):
    """Phantom generation failed."""

    def __init__(self, message: str, seed: int):
        super().__init__(f"{message} (seed={seed})")
        self.seed = seed


class GridFormatError(PetSrError, OSError):
    """A PSRG/PSDW file is malformed."""


class MetricError(PetSrError, ValueError):
    """A metric cannot be evaluated for the given inputs."""


class TrainingFailure(NumericalFailure):
    """Denoiser training diverged; ``last_good`` holds the last finite weights."""

    def __init__(self, message: str, step: int, last_good: Any = None):
        super().__init__(f"{message} at step {step}")
        self.step = step
        self.last_good = last_good


class SamplerFailure(NumericalFailure):
    """Reconstruction failed; ``trace`` holds the diagnostics recorded so far."""

    def __init__(self, message: str, trace: Optional[list] = None):
        super().__init__(message)
        self.trace = list(trace or [])
