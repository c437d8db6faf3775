"""Configuration validation reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Union

from .config import PpcrConfig, ScannerConfig
from .errors import ConfigurationError


@dataclass
class ValidationReport:
    """Result of validating one configuration record."""
    subject: str
    errors: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def summary(self) -> str:
        if self.ok:
            return f"{self.subject}: ok"
        return f"{self.subject}: {len(self.errors)} violation(s): " + "; ".join(self.errors)

    def to_dict(self) -> Dict[str, Any]:
        return {"subject": self.subject, "ok": self.ok, "errors": list(self.errors)}

    def raise_for_errors(self) -> None:
        if not self.ok:
            raise ConfigurationError(self.summary, self.errors)


def validate(config: Union[ScannerConfig, PpcrConfig]) -> ValidationReport:
    """Collect every violated invariant of ``config``; never raises."""
    if not isinstance(config, (ScannerConfig, PpcrConfig)):
        return ValidationReport(
            subject=type(config).__name__,
            errors=[f"unsupported config type: {type(config).__name__}"],
        )
    return ValidationReport(subject=type(config).__name__, errors=config.validate())
