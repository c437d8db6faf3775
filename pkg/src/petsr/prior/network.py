"""Tiny anatomy-conditioned noise-prediction network.

Two-level encoder/decoder over the noisy model-space image. The anatomy is
encoded by its own strided branch down to the bottleneck resolution, where a
multi-head attention block takes queries from the image features and
keys/values from the anatomy features. The ``concat`` variant instead feeds
the anatomy as a second input channel and has no attention.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Tuple

import torch
import torch.nn.functional as F
from torch import nn

from ..core.errors import ConfigurationError, GeometryError

MAX_PARAMETERS = 200_000


class Conditioning(str, Enum):
    ATTENTION = "attention"
    CONCAT = "concat"


@dataclass(frozen=True)
class DenoiserArch:
    level_widths: Tuple[int, int] = (16, 32)
    attention_heads: int = 2
    time_embed_dim: int = 32
    conditioning: Conditioning = Conditioning.ATTENTION

    def __post_init__(self) -> None:
        object.__setattr__(self, "level_widths", tuple(int(w) for w in self.level_widths))
        object.__setattr__(self, "conditioning", Conditioning(self.conditioning))

    def validate(self) -> list[str]:
        errors: list[str] = []
        if len(self.level_widths) != 2 or any(w < 1 for w in self.level_widths):
            errors.append(f"level_widths must be two positive widths, got {self.level_widths}")
        elif self.conditioning is Conditioning.ATTENTION and self.level_widths[1] % self.attention_heads:
            errors.append(
                f"bottleneck width {self.level_widths[1]} not divisible by {self.attention_heads} heads"
            )
        if self.attention_heads < 1:
            errors.append(f"attention_heads must be >= 1, got {self.attention_heads}")
        if self.time_embed_dim < 2 or self.time_embed_dim % 2:
            errors.append(f"time_embed_dim must be an even number >= 2, got {self.time_embed_dim}")
        return errors

    def to_dict(self) -> dict:
        data = asdict(self)
        data["level_widths"] = list(self.level_widths)
        data["conditioning"] = self.conditioning.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "DenoiserArch":
        return cls(
            level_widths=tuple(data["level_widths"]),
            attention_heads=int(data["attention_heads"]),
            time_embed_dim=int(data["time_embed_dim"]),
            conditioning=Conditioning(data["conditioning"]),
        )


def timestep_embedding(t: torch.Tensor, dim: int, max_period: float = 10000.0) -> torch.Tensor:
    """Sinusoidal embedding of integer timesteps, shape (B, dim)."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(max_period) * torch.arange(half, dtype=torch.float64, device=t.device) / half
    )
    args = t.to(torch.float64)[:, None] * freqs[None, :]
    return torch.cat([torch.cos(args), torch.sin(args)], dim=-1)


def _groups(channels: int) -> int:
    for g in (8, 4, 2):
        if channels % g == 0:
            return g
    return 1


class TimeBlock(nn.Module):
    """conv3x3 -> GroupNorm -> (+ time) -> SiLU -> conv3x3 -> GroupNorm -> SiLU."""

    def __init__(self, in_ch: int, out_ch: int, time_dim: int):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, padding=1)
        self.norm1 = nn.GroupNorm(_groups(out_ch), out_ch)
        self.time_proj = nn.Linear(time_dim, out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1)
        self.norm2 = nn.GroupNorm(_groups(out_ch), out_ch)

    def forward(self, x: torch.Tensor, t_emb: torch.Tensor) -> torch.Tensor:
        h = self.norm1(self.conv1(x)) + self.time_proj(t_emb)[:, :, None, None]
        h = F.silu(h)
        return F.silu(self.norm2(self.conv2(h)))


class CrossAttention2d(nn.Module):
    """Residual attention with image queries and condition keys/values."""

    def __init__(self, channels: int, heads: int):
        super().__init__()
        self.norm_q = nn.GroupNorm(_groups(channels), channels)
        self.norm_kv = nn.GroupNorm(_groups(channels), channels)
        self.attn = nn.MultiheadAttention(channels, heads, batch_first=True)

    def forward(self, x: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        b, c, h, w = x.shape
        q = self.norm_q(x).flatten(2).transpose(1, 2)
        kv = self.norm_kv(cond).flatten(2).transpose(1, 2)
        out, _ = self.attn(q, kv, kv, need_weights=False)
        return x + out.transpose(1, 2).reshape(b, c, h, w)


class TinyDenoiser(nn.Module):
    def __init__(self, arch: DenoiserArch):
        super().__init__()
        problems = arch.validate()
        if problems:
            raise ConfigurationError("invalid denoiser architecture: " + "; ".join(problems), problems)
        self.arch = arch
        w0, w1 = arch.level_widths
        td = arch.time_embed_dim
        in_ch = 2 if arch.conditioning is Conditioning.CONCAT else 1

        self.time_mlp = nn.Sequential(nn.Linear(td, td), nn.SiLU(), nn.Linear(td, td))

        self.enc0 = TimeBlock(in_ch, w0, td)
        self.down0 = nn.Conv2d(w0, w0, 3, stride=2, padding=1)
        self.enc1 = TimeBlock(w0, w1, td)
        self.down1 = nn.Conv2d(w1, w1, 3, stride=2, padding=1)
        self.mid = TimeBlock(w1, w1, td)

        if arch.conditioning is Conditioning.ATTENTION:
            self.cond_encoder = nn.Sequential(
                nn.Conv2d(1, w0, 3, padding=1),
                nn.SiLU(),
                nn.Conv2d(w0, w1, 3, stride=2, padding=1),
                nn.SiLU(),
                nn.Conv2d(w1, w1, 3, stride=2, padding=1),
            )
            self.cross_attn = CrossAttention2d(w1, arch.attention_heads)

        self.up1 = nn.Conv2d(w1, w1, 3, padding=1)
        self.dec1 = TimeBlock(2 * w1, w0, td)
        self.up0 = nn.Conv2d(w0, w0, 3, padding=1)
        self.dec0 = TimeBlock(2 * w0, w0, td)
        self.out = nn.Conv2d(w0, 1, 3, padding=1)

    def forward(self, x: torch.Tensor, t: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        """x, cond: (B, 1, H, W); t: (B,) integer timesteps. Returns predicted noise (B, 1, H, W)."""
        if x.shape[-1] % 4 or x.shape[-2] % 4:
            raise GeometryError(f"image dims must be divisible by 4, got {tuple(x.shape[-2:])}")
        t_emb = self.time_mlp(timestep_embedding(t, self.arch.time_embed_dim).to(x.dtype))

        inp = torch.cat([x, cond], dim=1) if self.arch.conditioning is Conditioning.CONCAT else x
        e0 = self.enc0(inp, t_emb)
        e1 = self.enc1(self.down0(e0), t_emb)
        m = self.mid(self.down1(e1), t_emb)
        if self.arch.conditioning is Conditioning.ATTENTION:
            m = self.cross_attn(m, self.cond_encoder(cond))

        d1 = self.up1(F.interpolate(m, scale_factor=2, mode="nearest"))
        d1 = self.dec1(torch.cat([d1, e1], dim=1), t_emb)
        d0 = self.up0(F.interpolate(d1, scale_factor=2, mode="nearest"))
        d0 = self.dec0(torch.cat([d0, e0], dim=1), t_emb)
        return self.out(d0)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def build_model(arch: DenoiserArch, seed: int = 0) -> TinyDenoiser:
    """Deterministically initialized network; the global torch RNG is left untouched."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = TinyDenoiser(arch)
    count = parameter_count(model)
    if count > MAX_PARAMETERS:
        raise ConfigurationError(f"network has {count} parameters, limit is {MAX_PARAMETERS}")
    return model
