"""Immutable grid records: images, sinograms and lesion masks."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import GeometryError, NumericalFailure


class Units(str, Enum):
    """Role of a GridImage."""
    ACTIVITY = "activity_mbq_ml"
    ANATOMY = "anatomy_arbitrary"
    MODEL_SPACE = "model_space"


class SinogramKind(str, Enum):
    """Whether a sinogram holds expected rates or Poisson draws."""
    EXPECTED = "expected_counts"
    SAMPLED = "sampled_counts"


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridImage:
    """2D image on an isotropic grid, stored row-major as ``data[row, col]``."""

    data: np.ndarray
    spacing_mm: float
    units: Units = Units.ACTIVITY

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise GeometryError(f"GridImage needs a non-empty 2D array, got shape {arr.shape}")
        if not self.spacing_mm > 0:
            raise GeometryError(f"spacing_mm must be > 0, got {self.spacing_mm}")
        arr = _frozen(arr)
        if not np.all(np.isfinite(arr)):
            raise NumericalFailure("GridImage values must be finite")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "units", Units(self.units))

    @classmethod
    def from_flat(
        cls, values, width: int, height: int, spacing_mm: float, units: Units = Units.ACTIVITY
    ) -> "GridImage":
        """Build from a flat row-major sequence; length must equal width*height."""
        flat = np.asarray(values, dtype=np.float64).ravel()
        if width < 1 or height < 1 or flat.size != width * height:
            raise GeometryError(
                f"data length {flat.size} does not match {width}x{height}"
            )
        return cls(flat.reshape(height, width), spacing_mm, units)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def fov_mm(self) -> float:
        """Field of view along the width axis."""
        return self.width * self.spacing_mm

    def with_data(self, data: np.ndarray, units: Units | None = None) -> "GridImage":
        """Same grid, new values."""
        if np.shape(data) != self.shape:
            raise GeometryError(f"shape {np.shape(data)} does not match grid {self.shape}")
        return GridImage(data, self.spacing_mm, units or self.units)


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Projection data, angle-major: ``data[angle, radial]``."""

    data: np.ndarray
    kind: SinogramKind = SinogramKind.EXPECTED

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise GeometryError(f"Sinogram needs a non-empty 2D array, got shape {arr.shape}")
        arr = _frozen(arr)
        if not np.all(np.isfinite(arr)):
            raise NumericalFailure("Sinogram values must be finite")
        kind = SinogramKind(self.kind)
        if np.any(arr < 0):
            raise GeometryError(f"{kind.value} entries must be >= 0")
        if kind is SinogramKind.SAMPLED and not np.array_equal(arr, np.round(arr)):
            raise GeometryError("sampled_counts entries must be integers")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "kind", kind)

    @classmethod
    def from_flat(
        cls, values, n_angles: int, n_radial: int, kind: SinogramKind = SinogramKind.EXPECTED
    ) -> "Sinogram":
        flat = np.asarray(values, dtype=np.float64).ravel()
        if n_angles < 1 or n_radial < 1 or flat.size != n_angles * n_radial:
            raise GeometryError(
                f"data length {flat.size} does not match {n_angles}x{n_radial}"
            )
        return cls(flat.reshape(n_angles, n_radial), kind)

    @property
    def n_angles(self) -> int:
        return self.data.shape[0]

    @property
    def n_radial(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True, eq=False)
class LesionMask:
    """Boolean support of one lesion on an image grid."""

    mask: np.ndarray
    label: str = "lesion"

    def __post_init__(self) -> None:
        arr = np.array(self.mask, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise GeometryError(f"LesionMask needs a 2D array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "mask", arr)

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def pixel_count(self) -> int:
        return int(self.mask.sum())
