"""Graymap preview export."""

from .exporter import PGMExporter

__all__ = ["PGMExporter"]
