"""Case-level concurrency services."""

from .case_runner import CaseResult, CaseRunner, CaseStatus

__all__ = ["CaseRunner", "CaseResult", "CaseStatus"]
