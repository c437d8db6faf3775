"""Scanner forward model, degradation and Poisson likelihood."""

from .degrade import DegradeResult, degrade, lr_grid, mlem, upsample_to
from .likelihood import LikelihoodEval, poisson_nll, poisson_nll_grad
from .operator import (
    PsfMode,
    ScannerOperator,
    adjoint_apply,
    calibrate_scanner,
    forward_expected,
)
from .projector import ProjectionGeometry, backproject, project, rebin
from .psf import PsfKernel, apply_psf, make_psf

__all__ = [
    "PsfKernel",
    "make_psf",
    "apply_psf",
    "ProjectionGeometry",
    "project",
    "backproject",
    "rebin",
    "PsfMode",
    "ScannerOperator",
    "calibrate_scanner",
    "forward_expected",
    "adjoint_apply",
    "LikelihoodEval",
    "poisson_nll",
    "poisson_nll_grad",
    "DegradeResult",
    "degrade",
    "lr_grid",
    "mlem",
    "upsample_to",
]
