"""Image fidelity and lesion metrics."""

from .quality import LesionStats, lesion_stats, nmse, psnr, ssim
from .report import MetricReport, evaluate_case, format_summary, summarize

__all__ = [
    "psnr",
    "ssim",
    "nmse",
    "lesion_stats",
    "LesionStats",
    "MetricReport",
    "evaluate_case",
    "summarize",
    "format_summary",
]
