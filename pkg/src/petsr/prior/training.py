"""Training loop for the tiny conditional denoiser.

Only clean HR activity/anatomy pairs are used; no degraded data enters
training. Every random draw (batch order, timesteps, noise, condition dropout)
comes from one seeded numpy stream, so a fixed seed gives identical weights.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from ..core.errors import ConfigurationError, GeometryError, TrainingFailure
from ..core.grid import GridImage, Units
from ..core.rng import make_rng
from ..phantom.dataset import Manifest
from .denoisers import NetworkDenoiser
from .network import DenoiserArch, build_model
from .schedule import NoiseSchedule, add_noise, make_schedule
from .transform import calibrate_transform, to_model_space
from .weights import TinyDenoiserWeights

logger = logging.getLogger(__name__)

_TRAIN_STREAM = 11
_EVAL_STREAM = 12


@dataclass(frozen=True)
class TrainingConfig:
    steps: int = 2000
    batch_size: int = 8
    learning_rate: float = 2e-3
    cond_dropout: float = 0.1
    log_every: int = 10
    seed: int = 0
    s_scale: float = 1.0

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.steps < 1:
            errors.append(f"steps must be >= 1, got {self.steps}")
        if self.batch_size < 1:
            errors.append(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            errors.append(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (0 <= self.cond_dropout < 1):
            errors.append(f"cond_dropout must be in [0,1), got {self.cond_dropout}")
        if self.log_every < 1:
            errors.append(f"log_every must be >= 1, got {self.log_every}")
        if not self.s_scale > 0:
            errors.append(f"s_scale must be > 0, got {self.s_scale}")
        return errors


@dataclass(frozen=True, eq=False)
class TrainingResult:
    weights: TinyDenoiserWeights
    losses: List[Tuple[int, float]] = field(default_factory=list)


@dataclass(frozen=True)
class DenoiserEvaluation:
    t: int
    mse: float
    zero_baseline_mse: float

    @property
    def improvement(self) -> float:
        """Relative reduction of MSE versus predicting zero noise."""
        return 1.0 - self.mse / self.zero_baseline_mse


def load_split(manifest: Manifest, split: str = "train") -> Tuple[List[GridImage], List[GridImage]]:
    entries = manifest.split(split)
    return (
        [manifest.load_activity(e) for e in entries],
        [manifest.load_anatomy(e) for e in entries],
    )


def write_loss_log(path: Path, losses: Sequence[Tuple[int, float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "loss"])
        for step, loss in losses:
            writer.writerow([step, repr(float(loss))])
    return path


def _stack(images: Sequence[GridImage]) -> np.ndarray:
    shapes = {img.shape for img in images}
    if len(shapes) != 1:
        raise GeometryError(f"all training cases must share one grid, got {sorted(shapes)}")
    return np.stack([img.data for img in images])[:, None]


def train_on_images(
    activities: Sequence[GridImage],
    anatomies: Sequence[GridImage],
    arch: DenoiserArch,
    training: TrainingConfig,
    schedule: Optional[NoiseSchedule] = None,
) -> TrainingResult:
    """Fit the noise predictor on clean (activity, anatomy) pairs."""
    problems = training.validate()
    if problems:
        raise ConfigurationError("invalid training config: " + "; ".join(problems), problems)
    if not activities:
        raise ConfigurationError("training split is empty")
    if len(activities) != len(anatomies):
        raise GeometryError("activity and anatomy lists differ in length")

    schedule = schedule or make_schedule()
    transform = calibrate_transform([a.data for a in activities], training.s_scale)
    x0_all = _stack([to_model_space(a, transform) for a in activities]).astype(np.float32)
    anatomy_all = _stack(anatomies)
    anatomy_scale = float(anatomy_all.max()) or 1.0
    cond_all = (anatomy_all / anatomy_scale).astype(np.float32)
    logger.info(
        f"Training on {len(activities)} cases ({x0_all.shape[2]}x{x0_all.shape[3]}), "
        f"kappa={transform.kappa:.6g}, x_max={transform.x_max}, {training.steps} steps"
    )

    torch.use_deterministic_algorithms(True, warn_only=True)
    model = build_model(arch, training.seed)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=training.learning_rate)

    rng = make_rng(training.seed, _TRAIN_STREAM)
    sqrt_ab = np.sqrt(schedule.alpha_bars)
    sqrt_1mab = np.sqrt(1.0 - schedule.alpha_bars)
    queue: List[int] = []
    losses: List[Tuple[int, float]] = []
    last_good = TinyDenoiserWeights.from_model(model, transform, schedule, anatomy_scale)

    for step in range(1, training.steps + 1):
        while len(queue) < training.batch_size:
            queue.extend(int(i) for i in rng.permutation(len(activities)))
        idx, queue = queue[: training.batch_size], queue[training.batch_size:]

        t = rng.integers(1, schedule.n_train_steps + 1, size=len(idx))
        noise = rng.standard_normal(x0_all[idx].shape).astype(np.float32)
        keep = (rng.random(len(idx)) >= training.cond_dropout).astype(np.float32)

        scale = sqrt_ab[t - 1].astype(np.float32)[:, None, None, None]
        spread = sqrt_1mab[t - 1].astype(np.float32)[:, None, None, None]
        x_t = scale * x0_all[idx] + spread * noise
        cond = cond_all[idx] * keep[:, None, None, None]

        pred = model(torch.from_numpy(x_t), torch.from_numpy(t), torch.from_numpy(cond))
        loss = F.mse_loss(pred, torch.from_numpy(noise))
        if not torch.isfinite(loss):
            raise TrainingFailure("training loss is not finite", step, last_good)

        optimizer.zero_grad()
        loss.backward()
        optimizer.step()

        if step % training.log_every == 0 or step == training.steps:
            value = float(loss.item())
            losses.append((step, value))
            last_good = TinyDenoiserWeights.from_model(model, transform, schedule, anatomy_scale)
            logger.debug(f"step {step} loss {value:.6g}")

    model.eval()
    weights = TinyDenoiserWeights.from_model(model, transform, schedule, anatomy_scale)
    logger.info(f"Training finished: final logged loss {losses[-1][1]:.6g}")
    return TrainingResult(weights=weights, losses=losses)


def train_tiny_denoiser(
    manifest: Manifest,
    arch: DenoiserArch,
    training: TrainingConfig,
    schedule: Optional[NoiseSchedule] = None,
    loss_log: Optional[Path] = None,
) -> TinyDenoiserWeights:
    """Train on the manifest's train split; optionally write the ``step,loss`` log."""
    activities, anatomies = load_split(manifest, "train")
    if not activities:
        raise ConfigurationError(f"manifest {manifest.path} has no training cases")
    result = train_on_images(activities, anatomies, arch, training, schedule)
    if loss_log is not None:
        write_loss_log(loss_log, result.losses)
    return result.weights


def evaluate_denoiser(
    weights: TinyDenoiserWeights,
    activities: Sequence[GridImage],
    anatomies: Sequence[GridImage],
    t: int,
    seed: int = 0,
) -> DenoiserEvaluation:
    """Noise-prediction MSE at timestep ``t`` against the zero predictor."""
    if not activities:
        raise ConfigurationError("evaluation needs at least one case")
    denoiser = NetworkDenoiser(weights)
    rng = make_rng(seed, _EVAL_STREAM, t)
    errors, baseline = [], []
    for activity, anatomy in zip(activities, anatomies):
        x0 = to_model_space(activity, weights.transform)
        noise = x0.with_data(rng.standard_normal(x0.shape), Units.MODEL_SPACE)
        x_t = add_noise(x0, t, denoiser.schedule, noise)
        eps = denoiser.predict(x_t, t, anatomy)
        errors.append(float(np.mean((eps.data - noise.data) ** 2)))
        baseline.append(float(np.mean(noise.data ** 2)))
    return DenoiserEvaluation(t=t, mse=float(np.mean(errors)), zero_baseline_mse=float(np.mean(baseline)))
