"""DDIM sampling with progressive physics-constrained refinement."""

from .ablation import VARIANTS, AblationVariant, ablation_variant
from .ppcr import SamplerState, StepRecord, ppcr_reconstruct, write_trace
from .refine import RefineResult, dc_refine
from .schedules import ddim_timesteps, inner_iters_for_step, psf_mode_for_step

__all__ = [
    "ddim_timesteps",
    "psf_mode_for_step",
    "inner_iters_for_step",
    "dc_refine",
    "RefineResult",
    "SamplerState",
    "StepRecord",
    "ppcr_reconstruct",
    "write_trace",
    "VARIANTS",
    "AblationVariant",
    "ablation_variant",
]
