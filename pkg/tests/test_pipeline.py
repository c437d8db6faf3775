"""Tests for the experiment pipeline and its output layout."""

import csv
from pathlib import Path

import numpy as np
import pytest

from petsr.cli import EXIT_OK, PetSrCLI
from petsr.core import gridio
from petsr.core.config import ScannerConfig
from petsr.core.runconfig import load_run_config
from petsr.pipeline import ExperimentPipeline, RunLayout, load_scanner, save_scanner
from petsr.prior.network import Conditioning
from petsr.sampler.ablation import VARIANTS


class TestRunLayout:
    def test_paths(self):
        layout = RunLayout(Path("/runs/a"))
        assert layout.manifest == Path("/runs/a/dataset/manifest.csv")
        assert layout.sinogram("std", "case0003") == Path("/runs/a/degraded/std/case0003_std_sino.psrg")
        assert layout.lr_image("ood", "case0003") == Path("/runs/a/degraded/ood/case0003_ood_lr.psrg")
        assert layout.weights(Conditioning.CONCAT) == Path("/runs/a/model/weights_concat.psdw")
        assert layout.recon("std", "no_dc") == Path("/runs/a/recon/std/no_dc")
        assert layout.evaluation("std") == Path("/runs/a/eval/std")

    def test_scanner_roundtrip(self, tmp_path):
        cfg = ScannerConfig(psf_fwhm_mm=8.0, angular_rebin=2, background_per_bin=0.3, count_scale_norm=1.7)
        path = save_scanner(tmp_path / "x" / "scanner.json", cfg)
        assert load_scanner(path) == cfg


class TestPipelineStages:
    @pytest.fixture
    def pipeline(self, tiny_run_config_file):
        return ExperimentPipeline(load_run_config(tiny_run_config_file))

    def test_phantom_and_degrade(self, pipeline):
        manifest = pipeline.phantom()
        assert [len(manifest.split(s)) for s in ("train", "val", "test")] == [2, 1, 1]

        paths = pipeline.degrade("standard")
        case_id = manifest.split("test")[0].case_id
        assert paths == [pipeline.layout.scanner("std", case_id)]
        assert pipeline.layout.sinogram("std", case_id).is_file()
        scanner = load_scanner(paths[0])
        assert scanner.is_calibrated
        assert (scanner.n_angles, scanner.n_radial) == (6, 12)

    def test_degrade_needs_manifest(self, pipeline):
        with pytest.raises(FileNotFoundError):
            pipeline.degrade("standard")

    def test_reconstruct_needs_weights(self, pipeline):
        pipeline.phantom()
        pipeline.degrade("standard")
        with pytest.raises(FileNotFoundError):
            pipeline.reconstruct("standard", "full")


@pytest.mark.integration
class TestAblation:
    def test_end_to_end(self, tiny_run_config_file):
        pipeline = ExperimentPipeline(load_run_config(tiny_run_config_file))
        summaries = pipeline.ablate("standard")
        assert list(summaries) == ["standard"]

        layout = pipeline.layout
        assert layout.weights(Conditioning.ATTENTION).is_file()
        assert layout.weights(Conditioning.CONCAT).is_file()
        assert layout.validation(Conditioning.ATTENTION).is_file()

        with (layout.evaluation("std") / "metrics.csv").open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert {r["method"] for r in rows} == {"hr_self", "lr", *VARIANTS}
        assert all(r["psnr"] == "inf" for r in rows if r["method"] == "hr_self")

        first = pipeline.manifest().split("test")[0]
        case_id = first.case_id
        trace = layout.recon("std", "full") / f"{case_id}_trace.csv"
        assert len(trace.read_text(encoding="utf-8").splitlines()) == 1 + 5
        assert (layout.recon("std", "full") / f"{case_id}_recon.pgm").is_file()
        truth_peak = pipeline.manifest().load_activity(first).data.max()
        for variant in VARIANTS:
            z = gridio.read_image(layout.recon("std", variant) / f"{case_id}_recon.psrg")
            assert np.all(np.isfinite(z.data))
            assert z.data.max() <= 10 * truth_peak

        summary = (layout.evaluation("std") / "summary.txt").read_text(encoding="utf-8")
        assert all(name in summary for name in VARIANTS)

    def test_deterministic(self, tmp_path, tiny_run_config_text):
        trees = []
        for name in ("a", "b"):
            path = tmp_path / name / "run.cfg"
            path.parent.mkdir()
            path.write_text(tiny_run_config_text, encoding="utf-8")
            pipeline = ExperimentPipeline(load_run_config(path))
            pipeline.ablate("standard", ["full", "no_dc"])
            root = pipeline.layout.root
            trees.append({
                p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()
            })
        assert sorted(trees[0]) == sorted(trees[1])
        assert any(name.endswith("_recon.psrg") for name in trees[0])
        assert any(name.endswith(".psdw") for name in trees[0])
        for name, blob in trees[0].items():
            assert blob == trees[1][name], name

    def test_cli_ablate(self, tiny_run_config_file, capsys):
        assert PetSrCLI().run(["ablate", "--config", str(tiny_run_config_file)]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("[standard]")
        assert "no_ppcr" in out


def _mean_psnr(rows, method):
    values = [float(r["psnr"]) for r in rows if r["method"] == method]
    return float(np.mean(values)), len(values)


@pytest.mark.integration
class TestReconstructionQuality:
    """A briefly trained prior with data consistency beats the LR baseline and its ablations."""

    @pytest.fixture(scope="class")
    def rows(self, tmp_path_factory):
        root = tmp_path_factory.mktemp("quality")
        (root / "run.cfg").write_text("\n".join([
            "output_dir = out",
            "seed = 21",
            "grid_size = 32",
            "n_organs = 3",
            "n_lesions = 1",
            "lesion_radius_min_mm = 3.0",
            "lesion_radius_max_mm = 5.0",
            "dataset_count = 30",
            "split_train = 0.5",
            "split_val = 0.1",
            "split_test = 0.4",
            "n_angles_full = 36",
            "n_radial_full = 48",
            "mlem_iterations = 10",
            "n_ddim_steps = 20",
            "psf_on_from_step = 14",
            "m_start = 1",
            "m_end = 5",
            "train_steps = 300",
            "batch_size = 8",
            "log_every = 50",
            "level_widths = 8,16",
            "time_embed_dim = 16",
            "",
        ]), encoding="utf-8")
        pipeline = ExperimentPipeline(load_run_config(root / "run.cfg"))
        pipeline.ablate("standard", ["full", "no_dc", "no_psf"])
        for variant in ("full", "no_dc", "no_psf"):
            for path in pipeline.layout.recon("std", variant).glob("*_recon.psrg"):
                z = gridio.read_image(path)
                assert np.all(np.isfinite(z.data))
        with (pipeline.layout.evaluation("std") / "metrics.csv").open(newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))

    def test_enough_test_cases(self, rows):
        assert _mean_psnr(rows, "full")[1] >= 10

    def test_full_beats_lr(self, rows):
        assert _mean_psnr(rows, "full")[0] > _mean_psnr(rows, "lr")[0]

    def test_full_at_least_no_dc(self, rows):
        assert _mean_psnr(rows, "full")[0] >= _mean_psnr(rows, "no_dc")[0]

    def test_full_at_least_no_psf(self, rows):
        assert _mean_psnr(rows, "full")[0] >= _mean_psnr(rows, "no_psf")[0]
