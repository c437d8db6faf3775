"""
Experiment orchestrator: dataset generation, degradation, training,
reconstruction, evaluation and ablation over one output directory.

Layout under ``output_dir``::

    dataset/manifest.csv, dataset/<split>/<case>_*.psrg
    degraded/<tag>/<case>_<tag>_sino.psrg, <case>_<tag>_lr.psrg, <case>_<tag>_scanner.json
    model/weights_<conditioning>.psdw, loss_<conditioning>.csv, validation_<conditioning>.json
    recon/<tag>/<variant>/<case>_recon.psrg, <case>_trace.csv, <case>_recon.pgm
    eval/<tag>/metrics.csv, lesions.csv, summary.txt
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .core import gridio
from .core.config import ScannerConfig
from .core.errors import ConfigurationError, SamplerFailure
from .core.grid import GridImage
from .core.profiles import PROFILES, get_profile, preset_scanner
from .core.runconfig import RunConfig
from .metrics.report import (
    MetricReport,
    evaluate_case,
    format_summary,
    summarize,
    write_lesion_csv,
    write_metrics_csv,
)
from .phantom.dataset import MANIFEST_NAME, Manifest, ManifestEntry, generate_dataset
from .phantom.generator import PhantomSpec
from .physics.degrade import degrade, upsample_to
from .preview.exporter import PGMExporter
from .prior.denoisers import NetworkDenoiser
from .prior.network import Conditioning, DenoiserArch
from .prior.schedule import make_schedule
from .prior.training import (
    TrainingConfig,
    evaluate_denoiser,
    load_split,
    train_tiny_denoiser,
)
from .prior.weights import TinyDenoiserWeights
from .sampler.ablation import VARIANTS, ablation_variant
from .sampler.ppcr import ppcr_reconstruct, write_trace
from .services.case_runner import CaseRunner

logger = logging.getLogger(__name__)

SELF_METHOD = "hr_self"
LR_METHOD = "lr"


@dataclass(frozen=True)
class RunLayout:
    root: Path

    @property
    def manifest(self) -> Path:
        return self.root / "dataset" / MANIFEST_NAME

    def degraded(self, tag: str) -> Path:
        return self.root / "degraded" / tag

    def sinogram(self, tag: str, case_id: str) -> Path:
        return self.degraded(tag) / f"{case_id}_{tag}_sino.psrg"

    def lr_image(self, tag: str, case_id: str) -> Path:
        return self.degraded(tag) / f"{case_id}_{tag}_lr.psrg"

    def scanner(self, tag: str, case_id: str) -> Path:
        return self.degraded(tag) / f"{case_id}_{tag}_scanner.json"

    def weights(self, conditioning: Conditioning) -> Path:
        return self.root / "model" / f"weights_{conditioning.value}.psdw"

    def loss_log(self, conditioning: Conditioning) -> Path:
        return self.root / "model" / f"loss_{conditioning.value}.csv"

    def validation(self, conditioning: Conditioning) -> Path:
        return self.root / "model" / f"validation_{conditioning.value}.json"

    def recon(self, tag: str, variant: str) -> Path:
        return self.root / "recon" / tag / variant

    def evaluation(self, tag: str) -> Path:
        return self.root / "eval" / tag


def save_scanner(path: Path, cfg: ScannerConfig) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_scanner(path: Path) -> ScannerConfig:
    return ScannerConfig(**json.loads(Path(path).read_text(encoding="utf-8")))


class ExperimentPipeline:
    """Runs each protocol stage for one RunConfig."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.layout = RunLayout(Path(config.output_dir))
        self.runner = CaseRunner(workers=config.workers, name="cases")

    # ------------------------------------------------------------------ data

    def phantom_spec(self) -> PhantomSpec:
        c = self.config
        return PhantomSpec(
            seed=c.seed,
            grid_size=c.grid_size,
            spacing_mm=c.spacing_mm,
            n_organs=c.n_organs,
            n_lesions=c.n_lesions,
            lesion_radius_mm=(c.lesion_radius_min_mm, c.lesion_radius_max_mm),
            lesion_contrast=(c.lesion_contrast_min, c.lesion_contrast_max),
            organ_activity=(c.organ_activity_min, c.organ_activity_max),
            lesion_in_anatomy=c.lesion_in_anatomy,
        )

    def phantom(self) -> Manifest:
        """Generate the phantom dataset and its manifest."""
        return generate_dataset(
            self.phantom_spec(),
            self.config.dataset_count,
            self.config.split,
            self.layout.manifest.parent,
            workers=self.config.workers,
        )

    def manifest(self) -> Manifest:
        return Manifest.read(self.layout.manifest)

    def degrade(self, setting: str = "standard") -> List[Path]:
        """Simulate the acquisition of every test case under ``setting``."""
        profile = get_profile(setting)
        manifest = self.manifest()
        scanner = preset_scanner(setting, self.config.scanner_base())
        out_dir = self.layout.degraded(profile.tag)
        iterations = self.config.mlem_iterations

        def job(entry: ManifestEntry) -> Path:
            result = degrade(manifest.load_activity(entry), scanner, entry.seed, iterations)
            gridio.write_sinogram(self.layout.sinogram(profile.tag, entry.case_id), result.sampled)
            gridio.write_image(self.layout.lr_image(profile.tag, entry.case_id), result.lr_reference)
            return save_scanner(self.layout.scanner(profile.tag, entry.case_id), result.scanner)

        entries = manifest.split("test")
        results = self.runner.run([(e.case_id, e) for e in entries], job)
        self.runner.raise_for_failures(results)
        logger.info(f"Degraded {len(entries)} test cases with the {setting} preset into {out_dir}")
        return [r.value for r in results]

    # ----------------------------------------------------------------- prior

    def arch(self, conditioning: Conditioning) -> DenoiserArch:
        return DenoiserArch(
            level_widths=self.config.level_widths,
            attention_heads=self.config.attention_heads,
            time_embed_dim=self.config.time_embed_dim,
            conditioning=conditioning,
        )

    def training_config(self) -> TrainingConfig:
        c = self.config
        return TrainingConfig(
            steps=c.train_steps,
            batch_size=c.batch_size,
            learning_rate=c.learning_rate,
            cond_dropout=c.cond_dropout,
            log_every=c.log_every,
            seed=c.seed,
            s_scale=c.s_scale,
        )

    def train(self, conditioning: Conditioning = Conditioning.ATTENTION) -> Path:
        """Train the denoiser on clean HR training pairs and write weights + loss log."""
        conditioning = Conditioning(conditioning)
        manifest = self.manifest()
        schedule = make_schedule(self.config.n_train_steps, self.config.beta_min, self.config.beta_max)
        weights = train_tiny_denoiser(
            manifest,
            self.arch(conditioning),
            self.training_config(),
            schedule,
            loss_log=self.layout.loss_log(conditioning),
        )
        path = weights.save(self.layout.weights(conditioning))

        activities, anatomies = load_split(manifest, "val")
        if activities:
            t_mid = schedule.n_train_steps // 2 or 1
            ev = evaluate_denoiser(weights, activities, anatomies, t_mid, self.config.seed)
            self.layout.validation(conditioning).write_text(
                json.dumps(
                    {"t": ev.t, "mse": ev.mse, "zero_baseline_mse": ev.zero_baseline_mse,
                     "improvement": ev.improvement},
                    indent=2, sort_keys=True,
                ) + "\n",
                encoding="utf-8",
            )
            logger.info(
                f"Validation at t={ev.t}: mse {ev.mse:.4g} vs zero-predictor {ev.zero_baseline_mse:.4g}"
            )
        return path

    # --------------------------------------------------------------- sampler

    def reconstruct(self, setting: str = "standard", variant: str = "full") -> List[Path]:
        """Run the sampler variant over every degraded test case."""
        profile = get_profile(setting)
        chosen = ablation_variant(variant, self.config.ppcr())
        weights = TinyDenoiserWeights.load(self.layout.weights(chosen.conditioning))
        denoiser = NetworkDenoiser(weights)
        schedule = weights.noise_schedule()
        manifest = self.manifest()
        out_dir = self.layout.recon(profile.tag, variant)
        exporter = PGMExporter()

        def job(entry: ManifestEntry) -> Path:
            y = gridio.read_sinogram(self.layout.sinogram(profile.tag, entry.case_id))
            scanner = load_scanner(self.layout.scanner(profile.tag, entry.case_id))
            anatomy = manifest.load_anatomy(entry)
            trace_path = out_dir / f"{entry.case_id}_trace.csv"
            try:
                z_hr, state = ppcr_reconstruct(
                    y, anatomy, denoiser, schedule, scanner, chosen.ppcr, weights.transform, entry.seed
                )
            except SamplerFailure as exc:
                write_trace(trace_path, exc.trace)
                raise
            write_trace(trace_path, state.trace)
            exporter.export(z_hr, out_dir / f"{entry.case_id}_recon.pgm")
            return gridio.write_image(out_dir / f"{entry.case_id}_recon.psrg", z_hr)

        entries = manifest.split("test")
        results = self.runner.run([(e.case_id, e) for e in entries], job)
        self.runner.raise_for_failures(results)
        logger.info(f"Reconstructed {len(entries)} cases ({setting}, {variant}) into {out_dir}")
        return [r.value for r in results]

    # ------------------------------------------------------------ evaluation

    def _evaluate_setting(self, tag: str, manifest: Manifest) -> Optional[List[MetricReport]]:
        src = self.layout.degraded(tag)
        if not src.is_dir():
            return None
        variants = [v for v in VARIANTS if self.layout.recon(tag, v).is_dir()]

        def job(entry: ManifestEntry) -> List[MetricReport]:
            ref = manifest.load_activity(entry)
            masks = manifest.load_masks(entry)
            lr = upsample_to(gridio.read_image(self.layout.lr_image(tag, entry.case_id)), ref.width)
            estimates: Dict[str, GridImage] = {SELF_METHOD: ref, LR_METHOD: lr}
            for v in variants:
                estimates[v] = gridio.read_image(self.layout.recon(tag, v) / f"{entry.case_id}_recon.psrg")
            return [evaluate_case(entry.case_id, m, ref, est, masks) for m, est in estimates.items()]

        entries = manifest.split("test")
        results = self.runner.run([(e.case_id, e) for e in entries], job)
        self.runner.raise_for_failures(results)
        return [report for r in results for report in r.value]

    def evaluate(self) -> Dict[str, str]:
        """Metrics CSVs and a mean±std summary for every degraded setting."""
        manifest = self.manifest()
        summaries: Dict[str, str] = {}
        for name, profile in PROFILES.items():
            reports = self._evaluate_setting(profile.tag, manifest)
            if reports is None:
                continue
            out_dir = self.layout.evaluation(profile.tag)
            write_metrics_csv(out_dir / "metrics.csv", reports)
            write_lesion_csv(out_dir / "lesions.csv", reports)
            table = format_summary(summarize(reports))
            (out_dir / "summary.txt").write_text(table + "\n", encoding="utf-8")
            summaries[name] = table
        if not summaries:
            raise FileNotFoundError(f"no degraded data under {self.layout.root / 'degraded'}")
        return summaries

    # --------------------------------------------------------------- ablation

    def ablate(self, setting: str = "standard", variants: Sequence[str] = VARIANTS) -> Dict[str, str]:
        """Reconstruct every variant for ``setting`` and evaluate; missing stages run first."""
        get_profile(setting)
        unknown = [v for v in variants if v not in VARIANTS]
        if unknown:
            raise ConfigurationError(f"Unknown variant(s): {', '.join(unknown)}")

        if not self.layout.manifest.is_file():
            self.phantom()
        if not self.layout.degraded(get_profile(setting).tag).is_dir():
            self.degrade(setting)
        for v in variants:
            conditioning = ablation_variant(v, self.config.ppcr()).conditioning
            if not self.layout.weights(conditioning).is_file():
                self.train(conditioning)
        for v in variants:
            self.reconstruct(setting, v)
        return self.evaluate()
