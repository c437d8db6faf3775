"""
Command-Line Interface for the PET super-resolution engine
==========================================================

Usage:
    python -m petsr phantom --config run.cfg
    python -m petsr degrade --config run.cfg --setting ood
    python -m petsr reconstruct --config run.cfg --setting standard --variant no_dc
"""

import argparse
import logging
from typing import Optional

from .core.errors import (
    ConfigurationError,
    DomainError,
    GenerationError,
    GeometryError,
    MetricError,
    NumericalFailure,
)
from .core.profiles import PROFILES
from .core.runconfig import load_run_config
from .pipeline import ExperimentPipeline
from .sampler.ablation import VARIANTS, ablation_variant

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def setup_logging(verbose: bool = False):
    """Configure logging."""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def exit_code_for(exc: BaseException) -> int:
    """Stable exit code for a failure: 2 config, 3 I/O, 4 numerical."""
    if isinstance(exc, (ConfigurationError, GeometryError)):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (NumericalFailure, DomainError, GenerationError, MetricError, ArithmeticError)):
        return EXIT_NUMERICAL
    return 1


class PetSrCLI:
    """Command-line interface for the experimental protocol."""

    def __init__(self):
        self.parser = self._create_parser()

    def _create_parser(self) -> argparse.ArgumentParser:
        """Create argument parser."""
        parser = argparse.ArgumentParser(
            prog="petsr",
            description="Physics-constrained diffusion super-resolution for PET on synthetic phantoms",
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog="""
Examples:
  # Phantom dataset and manifest
  python -m petsr phantom --config run.cfg

  # Low-dose acquisitions for the out-of-distribution setting
  python -m petsr degrade --config run.cfg --setting ood

  # Train the attention-conditioned prior, then reconstruct without DC
  python -m petsr train --config run.cfg
  python -m petsr reconstruct --config run.cfg --variant no_dc

  # Every ablation variant plus evaluation
  python -m petsr ablate --config run.cfg --workers 4

Exit codes: 0 ok, 2 configuration, 3 I/O, 4 numerical failure.
            """,
        )

        parser.add_argument(
            "-v", "--verbose",
            action="store_true",
            help="Enable debug logging"
        )

        common = argparse.ArgumentParser(add_help=False)
        common.add_argument(
            "-c", "--config",
            required=True,
            help="Run config file (key = value lines)"
        )
        common.add_argument(
            "--seed",
            type=int,
            help="Override the config seed (unsigned 64-bit)"
        )
        common.add_argument(
            "--workers",
            type=int,
            help="Override the number of concurrent cases"
        )

        setting = argparse.ArgumentParser(add_help=False)
        setting.add_argument(
            "--setting",
            default="standard",
            choices=list(PROFILES),
            help="Degradation setting (default: standard)"
        )

        variant = argparse.ArgumentParser(add_help=False)
        variant.add_argument(
            "--variant",
            default="full",
            choices=list(VARIANTS),
            help="Sampler variant (default: full)"
        )

        subparsers = parser.add_subparsers(dest="command", help="Command to run")
        subparsers.add_parser("phantom", parents=[common], help="Generate the phantom dataset")
        subparsers.add_parser(
            "degrade", parents=[common, setting], help="Simulate low-dose acquisitions of the test split"
        )
        subparsers.add_parser(
            "train", parents=[common, variant],
            help="Train the denoiser (concat_cond trains the concatenation model)"
        )
        subparsers.add_parser(
            "reconstruct", parents=[common, setting, variant], help="Run the sampler on degraded cases"
        )
        subparsers.add_parser("eval", parents=[common], help="Compute metrics and summary tables")
        subparsers.add_parser(
            "ablate", parents=[common, setting], help="Reconstruct and evaluate every variant"
        )

        return parser

    def run(self, args: Optional[list] = None) -> int:
        """Run the CLI."""
        parsed = self.parser.parse_args(args)
        setup_logging(parsed.verbose)

        if not parsed.command:
            self.parser.print_help()
            return EXIT_CONFIG

        handlers = {
            "phantom": self.cmd_phantom,
            "degrade": self.cmd_degrade,
            "train": self.cmd_train,
            "reconstruct": self.cmd_reconstruct,
            "eval": self.cmd_eval,
            "ablate": self.cmd_ablate,
        }
        try:
            pipeline = self._pipeline(parsed)
            return handlers[parsed.command](pipeline, parsed)
        except Exception as e:
            code = exit_code_for(e)
            logger.error(f"{parsed.command} failed ({type(e).__name__}): {e}")
            if code == 1:
                logger.exception("Unexpected error")
            return code

    @staticmethod
    def _pipeline(args) -> ExperimentPipeline:
        config = load_run_config(args.config, seed=args.seed, workers=args.workers)
        return ExperimentPipeline(config)

    def cmd_phantom(self, pipeline: ExperimentPipeline, args) -> int:
        """Generate phantoms and print the manifest path."""
        manifest = pipeline.phantom()
        print(manifest.path)
        return EXIT_OK

    def cmd_degrade(self, pipeline: ExperimentPipeline, args) -> int:
        paths = pipeline.degrade(args.setting)
        logger.info(f"Degraded {len(paths)} cases ({args.setting})")
        return EXIT_OK

    def cmd_train(self, pipeline: ExperimentPipeline, args) -> int:
        conditioning = ablation_variant(args.variant, pipeline.config.ppcr()).conditioning
        path = pipeline.train(conditioning)
        print(path)
        return EXIT_OK

    def cmd_reconstruct(self, pipeline: ExperimentPipeline, args) -> int:
        paths = pipeline.reconstruct(args.setting, args.variant)
        logger.info(f"Reconstructed {len(paths)} cases ({args.setting}, {args.variant})")
        return EXIT_OK

    def cmd_eval(self, pipeline: ExperimentPipeline, args) -> int:
        """Print one mean±std table per evaluated setting."""
        for setting, table in pipeline.evaluate().items():
            print(f"[{setting}]")
            print(table)
        return EXIT_OK

    def cmd_ablate(self, pipeline: ExperimentPipeline, args) -> int:
        for setting, table in pipeline.ablate(args.setting).items():
            print(f"[{setting}]")
            print(table)
        return EXIT_OK


def main():
    """Entry point."""
    cli = PetSrCLI()
    exit_code = cli.run()
    exit(exit_code)


if __name__ == "__main__":
    main()
