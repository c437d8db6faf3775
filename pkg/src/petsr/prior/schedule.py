"""Linear-beta noise schedule, forward noising and the Tweedie estimate.

Timesteps are 1-based: ``t`` in 1..T, with ``alpha_bar(0) = 1`` standing for
the clean image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.errors import ConfigurationError, GeometryError, NumericalFailure
from ..core.grid import GridImage, Units

DEFAULT_T = 1000
DEFAULT_BETA_MIN = 1e-4
DEFAULT_BETA_MAX = 0.02


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    n_train_steps: int
    betas: np.ndarray
    alpha_bars: np.ndarray

    def __post_init__(self) -> None:
        if len(self.betas) != self.n_train_steps or len(self.alpha_bars) != self.n_train_steps:
            raise ConfigurationError("schedule arrays must have length n_train_steps")
        if np.any(np.diff(self.alpha_bars) >= 0) or not (self.alpha_bars[0] < 1 and self.alpha_bars[-1] > 0):
            raise ConfigurationError("alpha_bar must decrease strictly inside (0, 1)")

    def alpha_bar(self, t: int) -> float:
        if t == 0:
            return 1.0
        if not 1 <= t <= self.n_train_steps:
            raise ConfigurationError(f"timestep {t} outside 0..{self.n_train_steps}")
        return float(self.alpha_bars[t - 1])

    def describe(self) -> dict:
        return {
            "n_train_steps": self.n_train_steps,
            "beta_min": float(self.betas[0]),
            "beta_max": float(self.betas[-1]),
        }


def make_schedule(
    T: int = DEFAULT_T, beta_min: float = DEFAULT_BETA_MIN, beta_max: float = DEFAULT_BETA_MAX
) -> NoiseSchedule:
    if T < 1:
        raise ConfigurationError(f"T must be >= 1, got {T}")
    if not (0 < beta_min <= beta_max < 1):
        raise ConfigurationError(f"need 0 < beta_min <= beta_max < 1, got {beta_min}, {beta_max}")
    betas = np.linspace(beta_min, beta_max, T) if T > 1 else np.array([beta_min])
    alpha_bars = np.cumprod(1.0 - betas)
    return NoiseSchedule(T, betas, alpha_bars)


def _check_dims(a: GridImage, b: GridImage) -> None:
    if a.shape != b.shape:
        raise GeometryError(f"shape mismatch: {a.shape} vs {b.shape}")


def add_noise(x0: GridImage, t: int, sched: NoiseSchedule, noise: GridImage) -> GridImage:
    _check_dims(x0, noise)
    ab = sched.alpha_bar(t)
    return x0.with_data(np.sqrt(ab) * x0.data + np.sqrt(1.0 - ab) * noise.data, Units.MODEL_SPACE)


def tweedie_estimate(x_t: GridImage, t: int, eps_hat: GridImage, sched: NoiseSchedule) -> GridImage:
    """x0_hat = (x_t - sqrt(1 - abar) eps_hat) / sqrt(abar)."""
    _check_dims(x_t, eps_hat)
    ab = sched.alpha_bar(t)
    if not ab > 0:
        raise NumericalFailure(f"alpha_bar is zero at t={t}")
    return x_t.with_data((x_t.data - np.sqrt(1.0 - ab) * eps_hat.data) / np.sqrt(ab), Units.MODEL_SPACE)


def noise_from_estimate(x_t: GridImage, t: int, x0: GridImage, sched: NoiseSchedule) -> GridImage:
    """Noise consistent with ``x_t`` and a clean estimate; inverse of :func:`tweedie_estimate`."""
    _check_dims(x_t, x0)
    ab = sched.alpha_bar(t)
    if not ab < 1:
        raise NumericalFailure(f"alpha_bar is one at t={t}")
    return x_t.with_data((x_t.data - np.sqrt(ab) * x0.data) / np.sqrt(1.0 - ab), Units.MODEL_SPACE)
