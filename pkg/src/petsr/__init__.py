"""PET super-resolution engine: phantoms, Poisson forward model, diffusion prior and PPCR sampler."""

from .core.config import PpcrConfig, ScannerConfig
from .core.grid import GridImage, LesionMask, Sinogram, SinogramKind, Units

__all__ = [
    "GridImage",
    "Sinogram",
    "SinogramKind",
    "LesionMask",
    "Units",
    "ScannerConfig",
    "PpcrConfig",
]
__version__ = "0.1.0"
