"""Tests for the Poisson NLL and its gradient."""

import numpy as np
import pytest

from petsr.core.errors import DomainError, GeometryError
from petsr.core.grid import GridImage, Sinogram, SinogramKind
from petsr.core.rng import make_rng, poisson_sample
from petsr.physics.likelihood import poisson_nll, poisson_nll_grad
from petsr.physics.operator import PsfMode, forward_expected


class TestPoissonNll:
    def test_matches_direct_formula(self, tiny_image, tiny_scanner, tiny_measurement):
        lam = forward_expected(tiny_image, tiny_scanner).data
        expected = np.sum(lam - tiny_measurement.data * np.log(lam + 1e-8))
        assert poisson_nll(tiny_image, tiny_measurement, tiny_scanner) == pytest.approx(expected, rel=1e-12)

    def test_shape_mismatch(self, tiny_image, tiny_scanner):
        y = Sinogram(np.ones((5, 5)), SinogramKind.SAMPLED)
        with pytest.raises(GeometryError, match="does not match"):
            poisson_nll(tiny_image, y, tiny_scanner)

    def test_negative_activity(self, tiny_image, tiny_scanner, tiny_measurement):
        bad = tiny_image.with_data(tiny_image.data - 5.0)
        with pytest.raises(DomainError):
            poisson_nll_grad(bad, tiny_measurement, tiny_scanner)

    def test_lambda_min_includes_background(self, tiny_image, tiny_scanner, tiny_measurement):
        ev = poisson_nll_grad(tiny_image, tiny_measurement, tiny_scanner)
        assert ev.lambda_min >= tiny_scanner.background_per_bin


class TestGradient:
    @pytest.mark.parametrize("mode", [PsfMode.FULL, PsfMode.IDENTITY])
    def test_finite_differences(self, tiny_image, tiny_scanner, tiny_measurement, mode):
        ev = poisson_nll_grad(tiny_image, tiny_measurement, tiny_scanner, mode)
        rng = make_rng(21)
        h = 1e-3
        scale = float(np.abs(ev.grad.data).max())
        for _ in range(10):
            i, j = rng.integers(0, 16, size=2)
            step = np.zeros((16, 16))
            step[i, j] = h
            up = poisson_nll(tiny_image.with_data(tiny_image.data + step), tiny_measurement, tiny_scanner, mode)
            down = poisson_nll(tiny_image.with_data(tiny_image.data - step), tiny_measurement, tiny_scanner, mode)
            fd = (up - down) / (2 * h)
            assert fd == pytest.approx(ev.grad.data[i, j], rel=1e-3, abs=1e-3 * scale)

    @pytest.mark.parametrize("seed", range(5))
    def test_finite_differences_across_instances(self, seed, tiny_scanner):
        rng = make_rng(40, seed)
        z = GridImage(0.2 + 3.0 * rng.random((16, 16)), 2.0)
        counts = poisson_sample(forward_expected(z, tiny_scanner).data, make_rng(41, seed))
        y = Sinogram(counts, SinogramKind.SAMPLED)
        start = z.with_data(0.5 + rng.random((16, 16)))
        ev = poisson_nll_grad(start, y, tiny_scanner)
        scale = float(np.abs(ev.grad.data).max())
        h = 1e-3
        flat = rng.choice(16 * 16, size=20, replace=False)
        for i, j in zip(*np.unravel_index(flat, (16, 16))):
            step = np.zeros((16, 16))
            step[i, j] = h
            up = poisson_nll(start.with_data(start.data + step), y, tiny_scanner)
            down = poisson_nll(start.with_data(start.data - step), y, tiny_scanner)
            assert (up - down) / (2 * h) == pytest.approx(ev.grad.data[i, j], rel=1e-3, abs=1e-3 * scale)

    def test_directional_derivative(self, tiny_image, tiny_scanner, tiny_measurement):
        ev = poisson_nll_grad(tiny_image, tiny_measurement, tiny_scanner)
        d = make_rng(22).standard_normal((16, 16))
        h = 1e-4
        up = poisson_nll(tiny_image.with_data(tiny_image.data + h * d), tiny_measurement, tiny_scanner)
        down = poisson_nll(tiny_image.with_data(tiny_image.data - h * d), tiny_measurement, tiny_scanner)
        assert (up - down) / (2 * h) == pytest.approx(np.sum(ev.grad.data * d), rel=1e-4)

    def test_small_step_descends(self, tiny_image, tiny_scanner, tiny_measurement):
        start = tiny_image.with_data(np.full((16, 16), 0.5))
        ev = poisson_nll_grad(start, tiny_measurement, tiny_scanner)
        moved = start.with_data(np.maximum(start.data - 1e-3 * ev.grad.data, 0.0))
        assert poisson_nll(moved, tiny_measurement, tiny_scanner) < ev.nll
