"""Seeded ellipse phantoms with co-registered anatomy and lesion masks.

Activity is a sum of ellipse-supported organ uptakes plus hot circular
lesions; anatomy is the same sum with a per-tissue intensity instead of an
uptake, so its region boundaries are exactly the organ boundaries. Lesions are
functional: they are absent from the anatomy unless ``lesion_in_anatomy``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..core.errors import GenerationError
from ..core.grid import GridImage, LesionMask, Units
from ..core.rng import make_rng

logger = logging.getLogger(__name__)

MAX_PLACEMENT_ATTEMPTS = 100
ANATOMY_INTENSITY_RANGE = (0.2, 2.0)
LESION_ANATOMY_OFFSET = 0.5


@dataclass(frozen=True)
class PhantomSpec:
    """Everything a phantom depends on; identical specs give identical phantoms."""

    seed: int = 0
    grid_size: int = 128
    spacing_mm: float = 2.0
    n_organs: int = 4
    n_lesions: int = 2
    lesion_radius_mm: Tuple[float, float] = (4.0, 10.0)
    lesion_contrast: Tuple[float, float] = (2.0, 4.0)
    organ_activity: Tuple[float, float] = (0.5, 3.0)
    lesion_in_anatomy: bool = False

    def validate(self) -> list[str]:
        """Return list of errors (empty = valid)."""
        errors: list[str] = []

        if self.seed < 0 or self.seed >= 2**64:
            errors.append(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.grid_size < 8:
            errors.append(f"grid_size must be >= 8, got {self.grid_size}")
        if not self.spacing_mm > 0:
            errors.append(f"spacing_mm must be > 0, got {self.spacing_mm}")
        if not (2 <= self.n_organs <= 6):
            errors.append(f"n_organs must be in [2,6], got {self.n_organs}")
        if not (0 <= self.n_lesions <= 4):
            errors.append(f"n_lesions must be in [0,4], got {self.n_lesions}")

        r_lo, r_hi = self.lesion_radius_mm
        if not (0 < r_lo <= r_hi):
            errors.append(f"lesion_radius_mm must be a positive range, got {self.lesion_radius_mm}")
        c_lo, c_hi = self.lesion_contrast
        if not (1 < c_lo <= c_hi):
            errors.append(f"lesion_contrast must be a range > 1, got {self.lesion_contrast}")
        a_lo, a_hi = self.organ_activity
        if not (0 < a_lo <= a_hi):
            errors.append(f"organ_activity must be a positive range, got {self.organ_activity}")

        return errors


@dataclass(frozen=True, eq=False)
class Phantom:
    activity: GridImage
    anatomy: GridImage
    lesions: List[LesionMask]
    organ_labels: np.ndarray  # bitmask of ellipse memberships per pixel


def _pixel_coords(spec: PhantomSpec) -> tuple[np.ndarray, np.ndarray]:
    centers = (np.arange(spec.grid_size) - 0.5 * (spec.grid_size - 1)) * spec.spacing_mm
    yy, xx = np.meshgrid(centers, centers, indexing="ij")
    return xx, yy


def _ellipse(xx, yy, cx, cy, ax, ay, phi) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    dx, dy = xx - cx, yy - cy
    u = (dx * c + dy * s) / ax
    v = (-dx * s + dy * c) / ay
    return u * u + v * v <= 1.0


def _distinct_draws(rng: np.random.Generator, lo: float, hi: float, n: int) -> np.ndarray:
    values = rng.uniform(lo, hi, size=n)
    # distinct per-organ values keep every ellipse boundary visible in both images
    while len(np.unique(values)) < n:
        values = rng.uniform(lo, hi, size=n)
    return values


def generate(spec: PhantomSpec) -> Phantom:
    """Build the (activity, anatomy, lesion masks) triple for ``spec``."""
    problems = spec.validate()
    if problems:
        raise GenerationError("invalid phantom spec: " + "; ".join(problems), spec.seed)

    rng = make_rng(spec.seed)
    xx, yy = _pixel_coords(spec)
    half_fov = 0.5 * spec.grid_size * spec.spacing_mm

    uptakes = _distinct_draws(rng, *spec.organ_activity, spec.n_organs)
    intensities = _distinct_draws(rng, *ANATOMY_INTENSITY_RANGE, spec.n_organs)

    labels = np.zeros(xx.shape, dtype=np.int64)
    activity = np.zeros(xx.shape)
    anatomy = np.zeros(xx.shape)

    # organ 0 is the body outline; the others sit inside it
    body_ax = half_fov * rng.uniform(0.70, 0.85)
    body_ay = half_fov * rng.uniform(0.55, 0.75)
    supports = [_ellipse(xx, yy, 0.0, 0.0, body_ax, body_ay, 0.0)]
    for _ in range(1, spec.n_organs):
        ax = body_ax * rng.uniform(0.15, 0.40)
        ay = body_ay * rng.uniform(0.15, 0.40)
        cx = body_ax * rng.uniform(-0.45, 0.45)
        cy = body_ay * rng.uniform(-0.45, 0.45)
        phi = rng.uniform(0.0, math.pi)
        supports.append(_ellipse(xx, yy, cx, cy, ax, ay, phi) & supports[0])

    for k, support in enumerate(supports):
        labels |= support.astype(np.int64) << k
        activity += uptakes[k] * support
        anatomy += intensities[k] * support

    lesions: List[LesionMask] = []
    for index in range(spec.n_lesions):
        mask = _place_lesion(spec, rng, xx, yy, labels, lesions)
        region_value = float(activity[mask][0])
        contrast = rng.uniform(*spec.lesion_contrast)
        activity[mask] = region_value * contrast
        if spec.lesion_in_anatomy:
            anatomy[mask] += LESION_ANATOMY_OFFSET
        lesions.append(LesionMask(mask, f"lesion{index}"))

    logger.debug(f"Generated phantom seed={spec.seed}: {spec.n_organs} organs, {len(lesions)} lesions")
    return Phantom(
        activity=GridImage(activity, spec.spacing_mm, Units.ACTIVITY),
        anatomy=GridImage(anatomy, spec.spacing_mm, Units.ANATOMY),
        lesions=lesions,
        organ_labels=labels,
    )


def _place_lesion(
    spec: PhantomSpec,
    rng: np.random.Generator,
    xx: np.ndarray,
    yy: np.ndarray,
    labels: np.ndarray,
    placed: List[LesionMask],
) -> np.ndarray:
    """Rejection-sample a disc lying inside one organ region, away from other lesions."""
    occupied = np.zeros(labels.shape, dtype=bool)
    for lesion in placed:
        occupied |= lesion.mask

    inside = np.argwhere(labels > 0)
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        radius = rng.uniform(*spec.lesion_radius_mm)
        row, col = inside[rng.integers(len(inside))]
        cx, cy = xx[row, col], yy[row, col]
        mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius
        if not mask.any():
            continue
        region = labels[mask]
        if region[0] == 0 or np.any(region != region[0]):
            continue
        if np.any(occupied & mask):
            continue
        return mask

    raise GenerationError(
        f"could not place lesion {len(placed)} inside an organ after "
        f"{MAX_PLACEMENT_ATTEMPTS} attempts",
        spec.seed,
    )
