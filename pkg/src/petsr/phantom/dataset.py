"""Phantom datasets on disk plus their manifest.

Manifest lines (UTF-8, one per case, sorted by case id)::

    <case_id>,<split>,<activity_path>,<anatomy_path>,<mask_paths;...>,<seed>

Paths are relative to the manifest's directory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from ..core import gridio
from ..core.errors import ConfigurationError
from ..core.grid import GridImage, LesionMask
from ..core.rng import make_rng
from ..services.case_runner import CaseRunner
from .generator import PhantomSpec, generate

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.csv"
SPLITS = ("train", "val", "test")
_SPLIT_STREAM = 7


@dataclass(frozen=True)
class ManifestEntry:
    case_id: str
    split: str
    activity_path: str
    anatomy_path: str
    mask_paths: Tuple[str, ...]
    seed: int

    def to_line(self) -> str:
        masks = ";".join(self.mask_paths)
        return f"{self.case_id},{self.split},{self.activity_path},{self.anatomy_path},{masks},{self.seed}"

    @classmethod
    def from_line(cls, line: str) -> "ManifestEntry":
        parts = line.rstrip("\n").split(",")
        if len(parts) != 6:
            raise ValueError(f"malformed manifest line: {line!r}")
        case_id, split, activity, anatomy, masks, seed = parts
        mask_paths = tuple(p for p in masks.split(";") if p)
        return cls(case_id, split, activity, anatomy, mask_paths, int(seed))


@dataclass
class Manifest:
    path: Path
    entries: List[ManifestEntry] = field(default_factory=list)

    @property
    def root(self) -> Path:
        return self.path.parent

    def split(self, name: str) -> List[ManifestEntry]:
        return [e for e in self.entries if e.split == name]

    def resolve(self, relative: str) -> Path:
        return self.root / relative

    def load_activity(self, entry: ManifestEntry) -> GridImage:
        return gridio.read_image(self.resolve(entry.activity_path))

    def load_anatomy(self, entry: ManifestEntry) -> GridImage:
        return gridio.read_image(self.resolve(entry.anatomy_path))

    def load_masks(self, entry: ManifestEntry) -> List[LesionMask]:
        return [
            gridio.read_mask(self.resolve(p), Path(p).stem.rsplit("_", 1)[-1])
            for p in entry.mask_paths
        ]

    def write(self) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        lines = [e.to_line() for e in sorted(self.entries, key=lambda e: e.case_id)]
        self.path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return self.path

    @classmethod
    def read(cls, path: Path) -> "Manifest":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        entries = [ManifestEntry.from_line(line) for line in text.splitlines() if line.strip()]
        return cls(path, entries)


def split_counts(count: int, split: Sequence[float]) -> Tuple[int, int, int]:
    if len(split) != 3 or any(f < 0 for f in split) or abs(sum(split) - 1.0) > 1e-9:
        raise ConfigurationError(f"split fractions must be three values summing to 1, got {split}")
    n_train = int(round(count * split[0]))
    n_val = min(int(round(count * split[1])), count - n_train)
    return n_train, n_val, count - n_train - n_val


def _assign_splits(base_seed: int, count: int, split: Sequence[float]) -> List[str]:
    n_train, n_val, _ = split_counts(count, split)
    order = make_rng(base_seed, _SPLIT_STREAM).permutation(count)
    labels = [""] * count
    for rank, index in enumerate(order):
        if rank < n_train:
            labels[index] = "train"
        elif rank < n_train + n_val:
            labels[index] = "val"
        else:
            labels[index] = "test"
    return labels


def _write_case(out_dir: Path, case_id: str, split: str, spec: PhantomSpec) -> ManifestEntry:
    phantom = generate(spec)
    rel = Path(split)
    activity = rel / f"{case_id}_activity.psrg"
    anatomy = rel / f"{case_id}_anatomy.psrg"
    gridio.write_image(out_dir / activity, phantom.activity)
    gridio.write_image(out_dir / anatomy, phantom.anatomy)

    masks = []
    for lesion in phantom.lesions:
        mask_path = rel / f"{case_id}_{lesion.label}.psrg"
        gridio.write_mask(out_dir / mask_path, lesion, spec.spacing_mm)
        masks.append(mask_path.as_posix())

    return ManifestEntry(
        case_id, split, activity.as_posix(), anatomy.as_posix(), tuple(masks), spec.seed
    )


def generate_dataset(
    base: PhantomSpec,
    count: int,
    split: Sequence[float] = (0.8, 0.1, 0.1),
    out_dir: Optional[Path] = None,
    workers: int = 1,
) -> Manifest:
    """Write ``count`` phantoms (seeds base.seed + index) and their manifest."""
    if count < 0:
        raise ConfigurationError(f"count must be >= 0, got {count}")
    out_dir = Path(out_dir or "dataset")
    labels = _assign_splits(base.seed, count, split)
    out_dir.mkdir(parents=True, exist_ok=True)

    def job(index: int) -> ManifestEntry:
        spec = replace(base, seed=base.seed + index)
        return _write_case(out_dir, f"case{index:04d}", labels[index], spec)

    runner = CaseRunner(workers=workers, name="phantom")
    results = runner.run([(f"case{i:04d}", i) for i in range(count)], job)
    runner.raise_for_failures(results)

    manifest = Manifest(out_dir / MANIFEST_NAME, [r.value for r in results])
    manifest.write()
    split_sizes = "/".join(str(len(manifest.split(s))) for s in SPLITS)
    logger.info(f"Wrote {count} cases ({split_sizes}) to {manifest.path}")
    return manifest

