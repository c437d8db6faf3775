"""16-bit portable graymap previews of grid images."""

from __future__ import annotations

import logging
from io import BytesIO
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from ..core.grid import GridImage

logger = logging.getLogger(__name__)

PGM_MAXVAL = 65535


class PGMExporter:
    """Export GridImages as binary PGM (P5, maxval 65535), max-scaled."""

    def __init__(self):
        self.maxval = PGM_MAXVAL
        self.format = "PPM"

    def to_levels(self, image: GridImage) -> np.ndarray:
        """Scale so the image maximum maps to ``maxval``; negatives clip to 0."""
        data = np.maximum(image.data, 0.0)
        peak = float(data.max())
        if not peak > 0:
            return np.zeros(image.shape, dtype=np.int32)
        return np.rint(data * (self.maxval / peak)).astype(np.int32)

    def export_bytes(self, image: GridImage) -> bytes:
        buffer = BytesIO()
        Image.fromarray(self.to_levels(image)).save(buffer, format=self.format)
        return buffer.getvalue()

    def export(self, image: GridImage, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.export_bytes(image))
        logger.debug(f"Wrote preview {path}")
        return path
