"""DDIM timestep sequence and the progressive refinement schedules.

Sampler steps are counted 1..n from the noisiest state.
"""

from __future__ import annotations

import math
from typing import List

from ..core.config import PpcrConfig
from ..core.errors import ConfigurationError
from ..physics.operator import PsfMode


def ddim_timesteps(n_steps: int, T: int) -> List[int]:
    """Evenly spaced decreasing training timesteps starting at T.

    The step after the last one goes to t = 0 (the clean image).
    """
    if not 1 <= n_steps <= T:
        raise ConfigurationError(f"need 1 <= n_steps <= T, got n_steps={n_steps}, T={T}")
    stride = T // n_steps
    return [T - i * stride for i in range(n_steps)]


def _check_step(step: int, cfg: PpcrConfig) -> None:
    if not 1 <= step <= cfg.n_ddim_steps:
        raise ConfigurationError(f"step {step} outside 1..{cfg.n_ddim_steps}")


def psf_mode_for_step(step: int, cfg: PpcrConfig) -> PsfMode:
    _check_step(step, cfg)
    return PsfMode.IDENTITY if step < cfg.psf_on_from_step else PsfMode.FULL


def inner_iters_for_step(step: int, cfg: PpcrConfig) -> int:
    """Linear ramp of DC iterations from m_start (first step) to m_end (last step)."""
    _check_step(step, cfg)
    if cfg.n_ddim_steps == 1:
        return cfg.m_end
    frac = (step - 1) / (cfg.n_ddim_steps - 1)
    # round half up
    return math.floor(cfg.m_start + (cfg.m_end - cfg.m_start) * frac + 0.5)
