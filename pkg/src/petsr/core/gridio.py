"""PSRG grid file format.

Layout (little-endian): magic ``PSRG``, u32 version (1), u32 units tag,
u32 dim0 (height or n_angles), u32 dim1 (width or n_radial), f32 spacing_mm,
then dim0*dim1 f32 values, row-major.
"""

from __future__ import annotations

import logging
import struct
from enum import IntEnum
from pathlib import Path
from typing import Union

import numpy as np

from .errors import GridFormatError
from .grid import GridImage, LesionMask, Sinogram, SinogramKind, Units

logger = logging.getLogger(__name__)

MAGIC = b"PSRG"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIf")
F32_MAX = float(np.finfo(np.float32).max)


class UnitsTag(IntEnum):
    ACTIVITY = 0
    ANATOMY = 1
    MODEL_SPACE = 2
    SINOGRAM = 3
    MASK = 4


_IMAGE_TAGS = {
    Units.ACTIVITY: UnitsTag.ACTIVITY,
    Units.ANATOMY: UnitsTag.ANATOMY,
    Units.MODEL_SPACE: UnitsTag.MODEL_SPACE,
}

PathLike = Union[str, Path]


def encode(values: np.ndarray, tag: UnitsTag, spacing_mm: float) -> bytes:
    arr = np.asarray(values, dtype=np.float64)
    dim0, dim1 = arr.shape
    if not np.all(np.isfinite(arr)):
        raise GridFormatError("grid values must be finite")
    peak = float(np.max(np.abs(arr), initial=0.0))
    if peak > F32_MAX:
        raise GridFormatError(f"grid value {peak:.6g} exceeds the float32 range")
    header = _HEADER.pack(MAGIC, VERSION, int(tag), dim0, dim1, float(spacing_mm))
    return header + np.ascontiguousarray(arr, dtype="<f4").tobytes()


def decode(blob: bytes, source: str = "<bytes>") -> tuple[UnitsTag, np.ndarray, float]:
    if len(blob) < _HEADER.size:
        raise GridFormatError(f"{source}: truncated header")
    magic, version, tag, dim0, dim1, spacing = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise GridFormatError(f"{source}: bad magic {magic!r}")
    if version != VERSION:
        raise GridFormatError(f"{source}: unsupported version {version}")
    try:
        tag = UnitsTag(tag)
    except ValueError as exc:
        raise GridFormatError(f"{source}: unknown units tag {tag}") from exc
    expected = _HEADER.size + 4 * dim0 * dim1
    if len(blob) != expected:
        raise GridFormatError(f"{source}: expected {expected} bytes, found {len(blob)}")
    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(dim0, dim1)
    return tag, values.astype(np.float64), float(spacing)


def _write(path: PathLike, payload: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    logger.debug(f"Wrote {path} ({len(payload)} bytes)")
    return path


def _read(path: PathLike) -> tuple[UnitsTag, np.ndarray, float]:
    path = Path(path)
    return decode(path.read_bytes(), str(path))


def write_image(path: PathLike, image: GridImage) -> Path:
    return _write(path, encode(image.data, _IMAGE_TAGS[image.units], image.spacing_mm))


def read_image(path: PathLike) -> GridImage:
    tag, values, spacing = _read(path)
    for units, image_tag in _IMAGE_TAGS.items():
        if tag is image_tag:
            return GridImage(values, spacing, units)
    raise GridFormatError(f"{path}: tag {tag.name} is not an image")


def write_sinogram(path: PathLike, sino: Sinogram) -> Path:
    return _write(path, encode(sino.data, UnitsTag.SINOGRAM, 0.0))


def read_sinogram(path: PathLike, kind: SinogramKind = SinogramKind.SAMPLED) -> Sinogram:
    tag, values, _ = _read(path)
    if tag is not UnitsTag.SINOGRAM:
        raise GridFormatError(f"{path}: tag {tag.name} is not a sinogram")
    return Sinogram(values, kind)


def write_mask(path: PathLike, mask: LesionMask, spacing_mm: float) -> Path:
    return _write(path, encode(mask.mask.astype(np.float32), UnitsTag.MASK, spacing_mm))


def read_mask(path: PathLike, label: str | None = None) -> LesionMask:
    tag, values, _ = _read(path)
    if tag is not UnitsTag.MASK:
        raise GridFormatError(f"{path}: tag {tag.name} is not a mask")
    return LesionMask(values > 0.5, label or Path(path).stem)
