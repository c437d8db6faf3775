"""Measurement-domain data consistency: Nesterov-accelerated projected gradient on the Poisson NLL."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.config import ScannerConfig
from ..core.errors import ConfigurationError, GeometryError, NumericalFailure
from ..core.grid import GridImage, Sinogram, Units
from ..physics.likelihood import DEFAULT_EPSILON, poisson_nll, poisson_nll_grad
from ..physics.operator import PsfMode

logger = logging.getLogger(__name__)

DEFAULT_BACKTRACK = 0.5
MAX_BACKTRACKS = 20


@dataclass(frozen=True, eq=False)
class RefineResult:
    z: GridImage
    momentum: GridImage
    nll_initial: float
    nll_final: float
    backtracks: int = 0


def _project(z: np.ndarray, nonneg_projection: bool) -> np.ndarray:
    return np.maximum(z, 0.0) if nonneg_projection else z


def dc_refine(
    z_init: GridImage,
    y: Sinogram,
    cfg: ScannerConfig,
    psf_mode: PsfMode,
    m: int,
    eta: float,
    mu: float,
    momentum_in: Optional[GridImage] = None,
    nonneg_projection: bool = True,
    epsilon: float = DEFAULT_EPSILON,
    backtrack: Optional[float] = DEFAULT_BACKTRACK,
    max_backtracks: int = MAX_BACKTRACKS,
) -> RefineResult:
    """``m`` steps of v <- mu v - eta grad(z + mu v); z <- max(0, z + v).

    With ``mu = 0`` this is plain projected gradient descent.

    When ``backtrack`` is set every accepted step is monotone in the NLL: a
    step that raises it drops the momentum and retries from ``z`` with the
    step size multiplied by ``backtrack``, at most ``max_backtracks`` times
    per iteration. If no trial step descends, ``z`` is kept and the momentum
    is reset. ``backtrack=None`` runs the fixed-step scheme.
    """
    if m < 0:
        raise ConfigurationError(f"inner iteration count must be >= 0, got {m}")
    if backtrack is not None and not 0 < backtrack < 1:
        raise ConfigurationError(f"backtrack factor must be in (0,1), got {backtrack}")
    if max_backtracks < 0:
        raise ConfigurationError(f"max_backtracks must be >= 0, got {max_backtracks}")
    if momentum_in is not None and momentum_in.shape != z_init.shape:
        raise GeometryError(f"momentum {momentum_in.shape} does not match image {z_init.shape}")

    velocity = np.zeros(z_init.shape) if momentum_in is None else momentum_in.data.copy()
    nll_initial = poisson_nll(z_init, y, cfg, psf_mode, epsilon)
    if m == 0:
        passthrough = momentum_in if momentum_in is not None else z_init.with_data(velocity)
        return RefineResult(z_init, passthrough, nll_initial, nll_initial)

    z = z_init.data.copy()
    nll_z = nll_initial
    backtracks = 0
    for k in range(1, m + 1):
        step = eta
        for _ in range(max_backtracks + 1):
            lookahead = _project(z + mu * velocity, nonneg_projection)
            try:
                ev = poisson_nll_grad(z_init.with_data(lookahead), y, cfg, psf_mode, epsilon)
            except NumericalFailure as exc:
                raise NumericalFailure(f"DC iteration {k}: {exc}") from exc
            trial_velocity = mu * velocity - step * ev.grad.data
            trial = _project(z + trial_velocity, nonneg_projection)
            if backtrack is None:
                z, velocity = trial, trial_velocity
                break
            try:
                nll_trial = poisson_nll(z_init.with_data(trial), y, cfg, psf_mode, epsilon)
            except NumericalFailure:
                nll_trial = np.inf
            if nll_trial <= nll_z:
                z, velocity, nll_z = trial, trial_velocity, nll_trial
                break
            # restart from z without momentum
            velocity = np.zeros_like(velocity)
            step *= backtrack
            backtracks += 1
        else:
            logger.debug(f"DC iteration {k}: no descent after {max_backtracks} backtracks")

    z_out = z_init.with_data(z, Units.ACTIVITY)
    if backtrack is None:
        try:
            nll_z = poisson_nll(z_out, y, cfg, psf_mode, epsilon)
        except NumericalFailure as exc:
            raise NumericalFailure(f"DC iteration {m}: {exc}") from exc
    logger.debug(
        f"DC {PsfMode(psf_mode).value} m={m}: nll {nll_initial:.6g} -> {nll_z:.6g}"
        f" ({backtracks} backtracks)"
    )
    return RefineResult(z_out, z_init.with_data(velocity, Units.ACTIVITY), nll_initial, nll_z, backtracks)
