"""Per-case metric reports, their CSV files and the mean/std summary table.

Metrics CSV: ``case_id,method,psnr,ssim,nmse``; lesion CSV:
``case_id,lesion,method,d_suv_max,d_suv_mean,lesion_nmse``. Rows are sorted by
case id, then method, and PSNR of identical images is written as ``inf``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..core.grid import GridImage, LesionMask
from .quality import LesionStats, lesion_stats, nmse, psnr, ssim

METRIC_COLUMNS = ("case_id", "method", "psnr", "ssim", "nmse")
LESION_COLUMNS = ("case_id", "lesion", "method", "d_suv_max", "d_suv_mean", "lesion_nmse")


@dataclass(frozen=True)
class MetricReport:
    case_id: str
    method: str
    psnr_db: float
    ssim: float
    nmse: float
    lesions: Tuple[LesionStats, ...] = field(default_factory=tuple)


def evaluate_case(
    case_id: str,
    method: str,
    ref: GridImage,
    est: GridImage,
    masks: Sequence[LesionMask] = (),
) -> MetricReport:
    return MetricReport(
        case_id=case_id,
        method=method,
        psnr_db=psnr(ref, est),
        ssim=ssim(ref, est),
        nmse=nmse(ref, est),
        lesions=tuple(lesion_stats(ref, est, m) for m in masks),
    )


def _sorted(reports: Iterable[MetricReport]) -> List[MetricReport]:
    return sorted(reports, key=lambda r: (r.case_id, r.method))


def _num(value: float) -> str:
    return repr(float(value))


def write_metrics_csv(path: Path, reports: Iterable[MetricReport]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRIC_COLUMNS)
        for r in _sorted(reports):
            writer.writerow([r.case_id, r.method, _num(r.psnr_db), _num(r.ssim), _num(r.nmse)])
    return path


def write_lesion_csv(path: Path, reports: Iterable[MetricReport]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LESION_COLUMNS)
        for r in _sorted(reports):
            for les in r.lesions:
                writer.writerow(
                    [r.case_id, les.label, r.method,
                     _num(les.d_suv_max), _num(les.d_suv_mean), _num(les.lesion_nmse)]
                )
    return path


def read_metrics_csv(path: Path) -> List[MetricReport]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [
            MetricReport(row["case_id"], row["method"], float(row["psnr"]), float(row["ssim"]), float(row["nmse"]))
            for row in csv.DictReader(fh)
        ]


@dataclass(frozen=True)
class SummaryRow:
    method: str
    count: int
    psnr: Tuple[float, float]
    ssim: Tuple[float, float]
    nmse: Tuple[float, float]


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if np.all(np.isinf(arr)):
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std())


def summarize(reports: Iterable[MetricReport]) -> List[SummaryRow]:
    """Mean and population standard deviation per method, sorted by method name."""
    groups: Dict[str, List[MetricReport]] = {}
    for r in _sorted(reports):
        groups.setdefault(r.method, []).append(r)
    return [
        SummaryRow(
            method=method,
            count=len(rows),
            psnr=_mean_std([r.psnr_db for r in rows]),
            ssim=_mean_std([r.ssim for r in rows]),
            nmse=_mean_std([r.nmse for r in rows]),
        )
        for method, rows in sorted(groups.items())
    ]


def format_summary(rows: Sequence[SummaryRow]) -> str:
    header = f"{'method':<16} | {'PSNR (dB)':>18} | {'SSIM':>18} | {'NMSE':>22}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row.method:<16} | {row.psnr[0]:>8.3f} ± {row.psnr[1]:<7.3f} | "
            f"{row.ssim[0]:>8.4f} ± {row.ssim[1]:<7.4f} | "
            f"{row.nmse[0]:>10.3e} ± {row.nmse[1]:<9.3e}"
        )
    return "\n".join(lines)
