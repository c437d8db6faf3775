"""
Pytest configuration and shared fixtures for all tests.
"""

import sys
from pathlib import Path

# Add src directory to Python path
project_root = Path(__file__).parent.parent
src_path = str(project_root / "src")

if src_path not in sys.path:
    sys.path.insert(0, src_path)

import pytest

from petsr.core.config import PpcrConfig, ScannerConfig
from petsr.core.grid import GridImage, Sinogram, SinogramKind, Units
from petsr.core.rng import make_rng, poisson_sample
from petsr.phantom.generator import PhantomSpec, generate
from petsr.physics.operator import PsfMode, calibrate_scanner, forward_expected


@pytest.fixture
def temp_output_dir(tmp_path):
    """Provide temporary output directory for tests"""
    return tmp_path / "output"


# ---------------------------------------------------------------------------
# Small grids and scanners
# ---------------------------------------------------------------------------

@pytest.fixture
def small_spec():
    """32x32 phantom spec with one lesion."""
    return PhantomSpec(
        seed=7,
        grid_size=32,
        spacing_mm=2.0,
        n_organs=3,
        n_lesions=1,
        lesion_radius_mm=(3.0, 5.0),
    )


@pytest.fixture
def small_phantom(small_spec):
    return generate(small_spec)


@pytest.fixture
def small_scanner():
    """Uncalibrated 16-angle scanner with 2x2 rebinning."""
    return ScannerConfig(
        psf_fwhm_mm=4.0,
        n_angles_full=16,
        n_radial_full=32,
        angular_rebin=2,
        radial_rebin=2,
        dose_fraction=0.5,
        count_scale=50.0,
        target_spacing_mm=4.0,
        name="small",
    )


@pytest.fixture
def calibrated_scanner(small_scanner, small_phantom):
    return calibrate_scanner(small_scanner, small_phantom.activity)


@pytest.fixture
def measurement(small_phantom, calibrated_scanner):
    """Poisson counts of the small phantom."""
    lam = forward_expected(small_phantom.activity, calibrated_scanner, PsfMode.FULL)
    counts = poisson_sample(lam.data, make_rng(5, 1))
    return Sinogram(counts, SinogramKind.SAMPLED)


@pytest.fixture
def tiny_image():
    """16x16 strictly positive activity map."""
    rng = make_rng(11)
    return GridImage(1.0 + rng.random((16, 16)), 2.0, Units.ACTIVITY)


@pytest.fixture
def tiny_scanner(tiny_image):
    cfg = ScannerConfig(
        psf_fwhm_mm=4.0,
        n_angles_full=12,
        n_radial_full=24,
        angular_rebin=2,
        radial_rebin=2,
        dose_fraction=0.5,
        count_scale=50.0,
        name="tiny",
    )
    return calibrate_scanner(cfg, tiny_image)


@pytest.fixture
def tiny_measurement(tiny_image, tiny_scanner):
    lam = forward_expected(tiny_image, tiny_scanner, PsfMode.FULL)
    return Sinogram(poisson_sample(lam.data, make_rng(3, 1)), SinogramKind.SAMPLED)


@pytest.fixture
def fast_ppcr():
    """Ten-step sampler config for quick reconstructions."""
    return PpcrConfig(
        n_ddim_steps=10,
        psf_on_from_step=7,
        m_start=1,
        m_end=5,
        eta_dc=0.05,
        mu_nesterov=0.5,
        alpha_warmstart=0.3,
    )


@pytest.fixture
def tiny_run_config_text():
    """Run config for an end-to-end run on 16x16 phantoms."""
    return "\n".join([
        "# tiny end-to-end run",
        "output_dir = out",
        "seed = 5",
        "grid_size = 16",
        "n_organs = 3",
        "n_lesions = 1",
        "lesion_radius_min_mm = 2.0",
        "lesion_radius_max_mm = 3.0",
        "dataset_count = 4",
        "split_train = 0.5",
        "split_val = 0.25",
        "split_test = 0.25",
        "n_angles_full = 12",
        "n_radial_full = 24",
        "mlem_iterations = 3",
        "n_train_steps = 100",
        "n_ddim_steps = 5",
        "psf_on_from_step = 4",
        "m_start = 1",
        "m_end = 3",
        "train_steps = 4",
        "batch_size = 2",
        "log_every = 2",
        "level_widths = 8,16",
        "time_embed_dim = 16",
        "",
    ])


@pytest.fixture
def tiny_run_config_file(tmp_path, tiny_run_config_text):
    path = tmp_path / "run.cfg"
    path.write_text(tiny_run_config_text, encoding="utf-8")
    return path
