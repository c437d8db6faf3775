"""PSDW weights files.

Layout (little-endian)::

    magic  b"PSDW"
    u32    format version
    u32    descriptor length in bytes
    ...    UTF-8 JSON descriptor (architecture, transform, schedule,
           anatomy scale, parameter names and shapes in order)
    f32[]  parameters, concatenated in ``named_parameters()`` order
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import torch

from ..core.errors import GridFormatError
from .network import DenoiserArch, TinyDenoiser, build_model
from .schedule import NoiseSchedule, make_schedule
from .transform import TransformParams

logger = logging.getLogger(__name__)

MAGIC = b"PSDW"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sII")

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class TinyDenoiserWeights:
    arch: DenoiserArch
    transform: TransformParams
    schedule: Dict[str, float]
    anatomy_scale: float
    names: Tuple[str, ...]
    shapes: Tuple[Tuple[int, ...], ...]
    params: List[np.ndarray] = field(repr=False)

    @property
    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params))

    def noise_schedule(self) -> NoiseSchedule:
        return make_schedule(
            int(self.schedule["n_train_steps"]), self.schedule["beta_min"], self.schedule["beta_max"]
        )

    def descriptor(self) -> dict:
        return {
            "arch": self.arch.to_dict(),
            "transform": {
                "s_scale": self.transform.s_scale,
                "kappa": self.transform.kappa,
                "x_max": self.transform.x_max,
            },
            "schedule": dict(self.schedule),
            "anatomy_scale": self.anatomy_scale,
            "parameter_count": self.parameter_count,
            "parameters": [
                {"name": n, "shape": list(s)} for n, s in zip(self.names, self.shapes)
            ],
        }

    @classmethod
    def from_model(
        cls,
        model: TinyDenoiser,
        transform: TransformParams,
        schedule: NoiseSchedule,
        anatomy_scale: float,
    ) -> "TinyDenoiserWeights":
        names, shapes, params = [], [], []
        for name, p in model.named_parameters():
            names.append(name)
            shapes.append(tuple(p.shape))
            params.append(p.detach().cpu().numpy().astype("<f4", copy=True))
        return cls(
            model.arch, transform, schedule.describe(), float(anatomy_scale),
            tuple(names), tuple(shapes), params,
        )

    def build_model(self) -> TinyDenoiser:
        model = build_model(self.arch)
        state = {n: torch.from_numpy(p.astype(np.float32)) for n, p in zip(self.names, self.params)}
        expected = [n for n, _ in model.named_parameters()]
        if expected != list(self.names):
            raise GridFormatError("weights parameter names do not match the architecture")
        model.load_state_dict(state, strict=True)
        model.eval()
        return model

    def to_bytes(self) -> bytes:
        desc = json.dumps(self.descriptor(), sort_keys=True, separators=(",", ":")).encode("utf-8")
        blob = b"".join(np.ascontiguousarray(p, dtype="<f4").tobytes() for p in self.params)
        return _HEADER.pack(MAGIC, FORMAT_VERSION, len(desc)) + desc + blob

    @classmethod
    def from_bytes(cls, data: bytes, source: str = "<bytes>") -> "TinyDenoiserWeights":
        if len(data) < _HEADER.size:
            raise GridFormatError(f"{source}: truncated weights header")
        magic, version, desc_len = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise GridFormatError(f"{source}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise GridFormatError(f"{source}: unsupported weights version {version}")
        start = _HEADER.size
        try:
            desc = json.loads(data[start:start + desc_len].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise GridFormatError(f"{source}: corrupt descriptor ({exc})") from exc

        entries = desc["parameters"]
        shapes = tuple(tuple(e["shape"]) for e in entries)
        sizes = [int(np.prod(s)) for s in shapes]
        payload = data[start + desc_len:]
        if len(payload) != 4 * sum(sizes):
            raise GridFormatError(
                f"{source}: expected {4 * sum(sizes)} parameter bytes, found {len(payload)}"
            )
        flat = np.frombuffer(payload, dtype="<f4")
        offsets = np.cumsum([0] + sizes)
        params = [flat[a:b].reshape(s).copy() for a, b, s in zip(offsets[:-1], offsets[1:], shapes)]

        tr = desc["transform"]
        return cls(
            arch=DenoiserArch.from_dict(desc["arch"]),
            transform=TransformParams(tr["s_scale"], tr["kappa"], tr.get("x_max")),
            schedule=desc["schedule"],
            anatomy_scale=float(desc["anatomy_scale"]),
            names=tuple(e["name"] for e in entries),
            shapes=shapes,
            params=params,
        )

    def save(self, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        logger.info(f"Wrote {self.parameter_count} parameters to {path}")
        return path

    @classmethod
    def load(cls, path: PathLike) -> "TinyDenoiserWeights":
        path = Path(path)
        return cls.from_bytes(path.read_bytes(), str(path))
