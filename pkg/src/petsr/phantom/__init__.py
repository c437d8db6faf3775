"""Synthetic phantom generation and on-disk datasets."""

from .dataset import Manifest, ManifestEntry, generate_dataset
from .generator import Phantom, PhantomSpec, generate

__all__ = ["PhantomSpec", "Phantom", "generate", "Manifest", "ManifestEntry", "generate_dataset"]
