"""Named sampler variants used in the ablation study."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..core.config import PpcrConfig
from ..core.errors import ConfigurationError
from ..prior.network import Conditioning

VARIANTS = ("full", "no_dc", "no_psf", "no_ppcr", "concat_cond")


@dataclass(frozen=True)
class AblationVariant:
    name: str
    ppcr: PpcrConfig
    conditioning: Conditioning = Conditioning.ATTENTION


def ablation_variant(name: str, base: PpcrConfig) -> AblationVariant:
    if name == "full":
        return AblationVariant(name, base)
    if name == "no_dc":
        return AblationVariant(name, replace(base, m_start=0, m_end=0))
    if name == "no_psf":
        return AblationVariant(name, replace(base, psf_on_from_step=base.n_ddim_steps + 1))
    if name == "no_ppcr":
        return AblationVariant(
            name,
            replace(
                base,
                m_start=base.m_end,
                psf_on_from_step=1,
                mu_nesterov=0.0,
                alpha_warmstart=0.0,
            ),
        )
    if name == "concat_cond":
        return AblationVariant(name, base, Conditioning.CONCAT)

    raise ConfigurationError(f"Unknown variant: {name}. Available: {', '.join(VARIANTS)}")
