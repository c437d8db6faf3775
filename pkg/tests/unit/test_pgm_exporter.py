"""Tests for 16-bit PGM previews."""

from io import BytesIO

import numpy as np
from PIL import Image

from petsr.core.grid import GridImage
from petsr.preview.exporter import PGMExporter


class TestPGMExporter:
    """Test PGMExporter class."""

    def test_init_default(self):
        exporter = PGMExporter()
        assert exporter.maxval == 65535
        assert exporter.format == "PPM"

    def test_levels_scaled_to_maxval(self):
        img = GridImage(np.array([[0.0, 1.0], [2.0, -1.0]]), 1.0)
        levels = PGMExporter().to_levels(img)
        np.testing.assert_array_equal(levels, [[0, 32768], [65535, 0]])

    def test_zero_image(self):
        levels = PGMExporter().to_levels(GridImage(np.zeros((3, 3)), 1.0))
        assert not levels.any()

    def test_header_and_size(self):
        img = GridImage(np.arange(12, dtype=float).reshape(3, 4), 1.0)
        blob = PGMExporter().export_bytes(img)
        header = b"P5\n4 3\n65535\n"
        assert blob.startswith(header)
        assert len(blob) == len(header) + 2 * 12
        # big-endian 16-bit samples, maximum last
        assert blob[-2:] == b"\xff\xff"

    def test_export_reopens(self, temp_output_dir):
        img = GridImage(np.linspace(0, 5, 16).reshape(4, 4), 2.0)
        path = PGMExporter().export(img, temp_output_dir / "preview.pgm")
        reopened = Image.open(BytesIO(path.read_bytes()))
        assert reopened.size == (4, 4)
        assert np.asarray(reopened).max() == 65535
