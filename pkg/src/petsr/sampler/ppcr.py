"""Deterministic DDIM reverse loop with Tweedie-guided data consistency.

Each sampler step predicts the noise, forms the Tweedie estimate, clips it to the
calibrated model-space range, maps it to activity, warm-starts from the previous step's refined activity, runs the
scheduled DC refinement, and re-enters the chain with the refined estimate and
the noise prediction (re-derived from the clipped estimate when clipping
changed it).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..core.config import PpcrConfig, ScannerConfig
from ..core.errors import ConfigurationError, DomainError, PetSrError, SamplerFailure
from ..core.grid import GridImage, Sinogram, SinogramKind, Units
from ..core.rng import make_rng
from ..prior.denoisers import Denoiser
from ..prior.schedule import NoiseSchedule, noise_from_estimate, tweedie_estimate
from ..prior.transform import TransformParams, clip_model_space, from_model_space, to_model_space
from .refine import dc_refine
from .schedules import ddim_timesteps, inner_iters_for_step, psf_mode_for_step

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("step", "t_train", "psf_mode", "m_t", "eta", "nll_before", "nll_after")
_INIT_STREAM = 3


@dataclass(frozen=True)
class StepRecord:
    step: int
    t_train: int
    psf_mode: str
    m_t: int
    eta: float
    nll_before: float
    nll_after: float


@dataclass
class SamplerState:
    step_index: int
    x_t: GridImage
    z_prev_refined: Optional[GridImage] = None
    momentum: Optional[GridImage] = None
    trace: List[StepRecord] = field(default_factory=list)


def write_trace(path: Path, trace: Sequence[StepRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=TRACE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in trace:
            row = asdict(record)
            for key in ("eta", "nll_before", "nll_after"):
                row[key] = repr(float(row[key]))
            writer.writerow(row)
    return path


def read_trace(path: Path) -> List[StepRecord]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [
            StepRecord(
                step=int(row["step"]),
                t_train=int(row["t_train"]),
                psf_mode=row["psf_mode"],
                m_t=int(row["m_t"]),
                eta=float(row["eta"]),
                nll_before=float(row["nll_before"]),
                nll_after=float(row["nll_after"]),
            )
            for row in csv.DictReader(fh)
        ]


def ppcr_reconstruct(
    y: Sinogram,
    c: GridImage,
    denoiser: Denoiser,
    sched: NoiseSchedule,
    scanner: ScannerConfig,
    ppcr: PpcrConfig,
    transform: TransformParams,
    seed: int,
) -> tuple[GridImage, SamplerState]:
    """Reconstruct HR activity on the grid of the anatomy map ``c``."""
    problems = ppcr.validate()
    if problems:
        raise ConfigurationError("invalid sampler config: " + "; ".join(problems), problems)
    if y.kind is not SinogramKind.SAMPLED:
        raise DomainError("reconstruction needs sampled counts")

    timesteps = ddim_timesteps(ppcr.n_ddim_steps, sched.n_train_steps)
    noise0 = make_rng(seed, _INIT_STREAM).standard_normal(c.shape)
    state = SamplerState(step_index=1, x_t=c.with_data(noise0, Units.MODEL_SPACE))
    alpha = ppcr.alpha_warmstart

    for i, t in enumerate(timesteps, start=1):
        state.step_index = i
        t_next = timesteps[i] if i < len(timesteps) else 0
        mode = psf_mode_for_step(i, ppcr)
        m_t = inner_iters_for_step(i, ppcr)
        try:
            eps = denoiser.predict(state.x_t, t, c)
            x0_raw = tweedie_estimate(state.x_t, t, eps, sched)
            x0_hat = clip_model_space(x0_raw, transform)
            clipped = int(np.count_nonzero(x0_hat.data != x0_raw.data))
            if clipped:
                # eps stays consistent with the clipped x0
                eps = noise_from_estimate(state.x_t, t, x0_hat, sched)
                logger.debug(f"step {i}: clipped {clipped} model-space values")
            z_tweedie = from_model_space(x0_hat, transform, clamp=True)
            if state.z_prev_refined is not None:
                z0 = z_tweedie.with_data((1.0 - alpha) * z_tweedie.data + alpha * state.z_prev_refined.data)
            else:
                z0 = z_tweedie

            refined = dc_refine(
                z0, y, scanner, mode, m_t, ppcr.eta_dc, ppcr.mu_nesterov,
                state.momentum, ppcr.nonneg_projection, ppcr.epsilon,
            )
            x0_refined = to_model_space(refined.z, transform)
            ab_next = sched.alpha_bar(t_next)
            x_next = np.sqrt(ab_next) * x0_refined.data + np.sqrt(1.0 - ab_next) * eps.data
            state.x_t = state.x_t.with_data(x_next)
        except (PetSrError, ArithmeticError) as exc:
            logger.error(f"Sampler failed at step {i} (t={t}): {exc}")
            raise SamplerFailure(f"sampler step {i} (t={t}): {exc}", state.trace) from exc

        state.z_prev_refined = refined.z
        state.momentum = refined.momentum
        state.trace.append(
            StepRecord(i, t, mode.value, m_t, ppcr.eta_dc, refined.nll_initial, refined.nll_final)
        )
        logger.debug(
            f"step {i} t={t} {mode.value} m={m_t} "
            f"nll {refined.nll_initial:.6g} -> {refined.nll_final:.6g}"
        )

    return state.z_prev_refined, state
