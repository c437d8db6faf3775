"""Noise predictors behind a single interface.

``predict`` is read-only after construction, so one denoiser instance can serve
concurrent reconstructions.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np
import torch

from ..core.errors import ConfigurationError, GeometryError, NumericalFailure
from ..core.grid import GridImage, Units
from .schedule import NoiseSchedule, make_schedule
from .weights import TinyDenoiserWeights

logger = logging.getLogger(__name__)


class Denoiser(ABC):
    """eps_hat = predict(x_t, t, c) on the grid of ``x_t``."""

    @abstractmethod
    def predict(self, x_t: GridImage, t: int, c: GridImage) -> GridImage:
        ...

    def _result(self, x_t: GridImage, eps: np.ndarray) -> GridImage:
        if eps.shape != x_t.shape:
            raise GeometryError(f"denoiser output {eps.shape} does not match input {x_t.shape}")
        if not np.all(np.isfinite(eps)):
            raise NumericalFailure("denoiser produced non-finite noise prediction")
        return x_t.with_data(eps, Units.MODEL_SPACE)


class GaussianAnalyticDenoiser(Denoiser):
    """Exact noise prediction for the prior x0 ~ Normal(mean, tau^2 I)."""

    def __init__(self, mean: GridImage, tau: float, schedule: Optional[NoiseSchedule] = None):
        if not tau > 0:
            raise ConfigurationError(f"tau must be > 0, got {tau}")
        self.mean = mean
        self.tau = float(tau)
        self.schedule = schedule or make_schedule()

    def posterior_mean(self, x_t: GridImage, t: int) -> np.ndarray:
        ab = self.schedule.alpha_bar(t)
        tau2 = self.tau ** 2
        gain = np.sqrt(ab) * tau2 / (ab * tau2 + 1.0 - ab)
        return self.mean.data + gain * (x_t.data - np.sqrt(ab) * self.mean.data)

    def predict(self, x_t: GridImage, t: int, c: GridImage) -> GridImage:
        if x_t.shape != self.mean.shape:
            raise GeometryError(f"input {x_t.shape} does not match prior mean {self.mean.shape}")
        ab = self.schedule.alpha_bar(t)
        if ab >= 1.0:
            return self._result(x_t, np.zeros(x_t.shape))
        mu = self.posterior_mean(x_t, t)
        return self._result(x_t, (x_t.data - np.sqrt(ab) * mu) / np.sqrt(1.0 - ab))


def gaussian_analytic_denoiser(
    mean: GridImage, tau: float, schedule: Optional[NoiseSchedule] = None
) -> Denoiser:
    return GaussianAnalyticDenoiser(mean, tau, schedule)


class NetworkDenoiser(Denoiser):
    """Trained tiny network; anatomy is scaled by the training-set maximum."""

    def __init__(self, weights: TinyDenoiserWeights):
        self.weights = weights
        self.model = weights.build_model()
        self.schedule = weights.noise_schedule()
        self.transform = weights.transform

    def predict(self, x_t: GridImage, t: int, c: GridImage) -> GridImage:
        if c.shape != x_t.shape:
            raise GeometryError(f"anatomy {c.shape} does not match image {x_t.shape}")
        x = torch.from_numpy(np.ascontiguousarray(x_t.data, dtype=np.float32))[None, None]
        cond = torch.from_numpy(
            np.ascontiguousarray(c.data / self.weights.anatomy_scale, dtype=np.float32)
        )[None, None]
        with torch.no_grad():
            eps = self.model(x, torch.tensor([int(t)]), cond)
        return self._result(x_t, eps[0, 0].numpy().astype(np.float64))
