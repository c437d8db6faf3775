"""Poisson negative log-likelihood and its analytic gradient in activity space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.config import ScannerConfig
from ..core.errors import GeometryError, NumericalFailure
from ..core.grid import GridImage, Sinogram, Units
from .operator import PsfMode, ScannerOperator, require_nonnegative, square_size, get_operator

DEFAULT_EPSILON = 1e-8


@dataclass(frozen=True, eq=False)
class LikelihoodEval:
    nll: float
    grad: GridImage
    lambda_min: float  # min of A(z) + eps


def _operator_for(z: GridImage, y: Sinogram, cfg: ScannerConfig, psf_mode: PsfMode) -> ScannerOperator:
    require_nonnegative(z)
    op = get_operator(cfg, square_size(z), z.spacing_mm, PsfMode(psf_mode))
    if y.shape != op.sino_shape:
        raise GeometryError(f"measurement shape {y.shape} does not match operator {op.sino_shape}")
    return op


def _nll_terms(lam: np.ndarray, y: np.ndarray, epsilon: float) -> float:
    terms = lam - y * np.log(lam + epsilon)
    if not np.all(np.isfinite(terms)):
        first = int(np.flatnonzero(~np.isfinite(terms))[0])
        bad = tuple(int(i) for i in np.unravel_index(first, terms.shape))
        raise NumericalFailure(f"non-finite Poisson NLL term at bin {bad} (lambda={lam[bad]:.6g})")
    return float(terms.sum())


def poisson_nll(
    z: GridImage,
    y: Sinogram,
    cfg: ScannerConfig,
    psf_mode: PsfMode = PsfMode.FULL,
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    """sum_i [lambda_i - y_i log(lambda_i + eps)] with lambda = A(z)."""
    op = _operator_for(z, y, cfg, psf_mode)
    return _nll_terms(op.forward(z.data), y.data, epsilon)


def poisson_nll_grad(
    z: GridImage,
    y: Sinogram,
    cfg: ScannerConfig,
    psf_mode: PsfMode = PsfMode.FULL,
    epsilon: float = DEFAULT_EPSILON,
) -> LikelihoodEval:
    """NLL plus A^T(1 - y / (A(z) + eps)); the background carries no gradient."""
    op = _operator_for(z, y, cfg, psf_mode)
    lam = op.forward(z.data)
    nll = _nll_terms(lam, y.data, epsilon)
    grad = op.adjoint(1.0 - y.data / (lam + epsilon))
    if not np.all(np.isfinite(grad)):
        raise NumericalFailure("non-finite Poisson NLL gradient")
    return LikelihoodEval(
        nll=nll,
        grad=GridImage(grad, z.spacing_mm, Units.ACTIVITY),
        lambda_min=float(lam.min() + epsilon),
    )
