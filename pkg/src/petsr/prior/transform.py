"""Activity <-> model-space transform x = asinh(z / s) / kappa."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.errors import ConfigurationError, NumericalFailure
from ..core.grid import GridImage, Units

logger = logging.getLogger(__name__)

SINH_OVERFLOW_LIMIT = 700.0
KAPPA_PERCENTILE = 99.5
CLIP_MARGIN = 0.1


@dataclass(frozen=True)
class TransformParams:
    """``x_max`` bounds clean model-space images; ``None`` leaves them unbounded above."""

    s_scale: float = 1.0
    kappa: float = 1.0
    x_max: Optional[float] = None

    def __post_init__(self) -> None:
        if not (self.s_scale > 0 and self.kappa > 0):
            raise ConfigurationError(
                f"transform needs s_scale > 0 and kappa > 0, got s={self.s_scale} kappa={self.kappa}"
            )
        if self.x_max is not None and not (self.x_max > 0 and np.isfinite(self.x_max)):
            raise ConfigurationError(f"x_max must be a positive finite bound, got {self.x_max}")

    @property
    def z_max(self) -> Optional[float]:
        """Largest activity a clipped estimate can map to."""
        if self.x_max is None:
            return None
        return self.s_scale * float(np.sinh(self.kappa * self.x_max))


def to_model_space(z: GridImage, p: TransformParams) -> GridImage:
    return z.with_data(np.arcsinh(z.data / p.s_scale) / p.kappa, Units.MODEL_SPACE)


def from_model_space(x: GridImage, p: TransformParams, clamp: bool = False) -> GridImage:
    """z = s sinh(kappa x); ``clamp`` zeroes negative values for use as activity."""
    arg = p.kappa * x.data
    peak = float(np.max(np.abs(arg)))
    if peak > SINH_OVERFLOW_LIMIT:
        raise NumericalFailure(f"sinh overflow: |kappa*x| = {peak:.6g} exceeds {SINH_OVERFLOW_LIMIT}")
    z = p.s_scale * np.sinh(arg)
    if clamp:
        clamped = int(np.count_nonzero(z < 0))
        if clamped:
            logger.debug(f"Clamped {clamped} negative activity values to 0")
        z = np.maximum(z, 0.0)
    return x.with_data(z, Units.ACTIVITY)


def clip_model_space(x: GridImage, p: TransformParams) -> GridImage:
    """Clip a clean-image estimate to [0, x_max] (no upper bound when x_max is None)."""
    upper = np.inf if p.x_max is None else p.x_max
    return x.with_data(np.clip(x.data, 0.0, upper), Units.MODEL_SPACE)


def calibrate_kappa(activities: list[np.ndarray], s_scale: float = 1.0) -> float:
    """kappa such that the 99.5th percentile of asinh(z/s) maps to 1."""
    if not activities:
        raise ConfigurationError("kappa calibration needs at least one activity map")
    pooled = np.concatenate([np.arcsinh(np.asarray(a, dtype=np.float64).ravel() / s_scale) for a in activities])
    kappa = float(np.percentile(pooled, KAPPA_PERCENTILE))
    if not kappa > 0:
        logger.warning("Training activity is all zero; using kappa = 1")
        return 1.0
    return kappa


def calibrate_transform(activities: list[np.ndarray], s_scale: float = 1.0) -> TransformParams:
    """kappa from :func:`calibrate_kappa`; x_max is the training maximum plus a 10 % margin."""
    kappa = calibrate_kappa(activities, s_scale)
    peak = max(float(np.max(a)) for a in activities)
    if not peak > 0:
        return TransformParams(s_scale, kappa)
    x_max = (1.0 + CLIP_MARGIN) * float(np.arcsinh(peak / s_scale)) / kappa
    return TransformParams(s_scale, kappa, x_max)
