"""Bounded-concurrency runner for independent per-case jobs.

Cases run on a thread pool (numpy/scipy/torch release the GIL in their
kernels); results come back in submission order so every downstream writer
sees a deterministic sequence.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Generic, Iterable, List, Optional, Tuple, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


class CaseStatus(str, Enum):
    """Per-case outcome."""
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"


@dataclass
class CaseResult(Generic[T]):
    case_id: str
    status: CaseStatus
    value: Optional[T] = None
    error: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.status is CaseStatus.COMPLETED

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "status": self.status.value,
            "error": None if self.error is None else str(self.error),
        }


class CaseRunner:
    """Run ``job(payload)`` for every case with at most ``workers`` in flight."""

    def __init__(self, workers: int = 1, name: str = "cases"):
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self.name = name

    def _run_one(self, case_id: str, payload: Any, job: Callable[[Any], T]) -> CaseResult[T]:
        try:
            value = job(payload)
        except Exception as exc:
            logger.error(f"{self.name}: {case_id} failed: {exc}")
            return CaseResult(case_id, CaseStatus.FAILED, error=exc)
        logger.info(f"{self.name}: {case_id} done")
        return CaseResult(case_id, CaseStatus.COMPLETED, value=value)

    def run(
        self, cases: Iterable[Tuple[str, Any]], job: Callable[[Any], T]
    ) -> List[CaseResult[T]]:
        cases = list(cases)
        if self.workers == 1 or len(cases) <= 1:
            return [self._run_one(case_id, payload, job) for case_id, payload in cases]

        with ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix=self.name) as pool:
            futures = [pool.submit(self._run_one, case_id, payload, job) for case_id, payload in cases]
            return [f.result() for f in futures]

    @staticmethod
    def raise_for_failures(results: List[CaseResult]) -> None:
        """Re-raise the first failure (in case order) so callers keep its type."""
        for result in results:
            if not result.ok:
                raise result.error
