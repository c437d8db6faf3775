"""Diffusion prior: model-space transform, noise schedule, denoisers and training."""

from .denoisers import Denoiser, GaussianAnalyticDenoiser, NetworkDenoiser, gaussian_analytic_denoiser
from .network import Conditioning, DenoiserArch, TinyDenoiser
from .schedule import NoiseSchedule, add_noise, make_schedule, noise_from_estimate, tweedie_estimate
from .training import TrainingConfig, evaluate_denoiser, train_tiny_denoiser
from .transform import TransformParams, calibrate_transform, clip_model_space, from_model_space, to_model_space
from .weights import TinyDenoiserWeights

__all__ = [
    "TransformParams",
    "to_model_space",
    "from_model_space",
    "clip_model_space",
    "calibrate_transform",
    "NoiseSchedule",
    "make_schedule",
    "add_noise",
    "tweedie_estimate",
    "noise_from_estimate",
    "Denoiser",
    "GaussianAnalyticDenoiser",
    "gaussian_analytic_denoiser",
    "NetworkDenoiser",
    "Conditioning",
    "DenoiserArch",
    "TinyDenoiser",
    "TinyDenoiserWeights",
    "TrainingConfig",
    "train_tiny_denoiser",
    "evaluate_denoiser",
]
