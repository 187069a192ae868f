"""Report models shared by the verifier, the CLI and the HTTP API."""

import math
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


def _finite_max(values) -> float:
    values = list(values)
    if not values:
        return 0.0
    if any(not math.isfinite(v) for v in values):
        return math.inf
    return max(values)


class AxiomReport(BaseModel):
    """Residuals of the square characterization axioms for one candidate form."""

    kind: str
    signature: str
    residuals: Dict[str, float] = Field(default_factory=dict)
    tolerance: float
    verdict: str
    witness: Optional[List[List[float]]] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def max_residual(self) -> float:
        return _finite_max(self.residuals.values())


class ResidualRecord(BaseModel):
    """Residuals of one check at one chart point."""

    check: str
    point: List[float] = Field(default_factory=list)
    residuals: Dict[str, float] = Field(default_factory=dict)
    tolerance: float
    passed: bool

    @classmethod
    def build(cls, check: str, point, residuals: Dict[str, float], tolerance: float) -> "ResidualRecord":
        clean = {name: float(value) for name, value in residuals.items()}
        return cls(
            check=check,
            point=[float(x) for x in point],
            residuals=clean,
            tolerance=tolerance,
            passed=_finite_max(clean.values()) <= tolerance,
        )

    @property
    def max_residual(self) -> float:
        return _finite_max(self.residuals.values())


class ReportEntry(BaseModel):
    check_id: str
    params: Dict[str, Any] = Field(default_factory=dict)
    max_residual: float
    tolerance: float
    passed: bool
    wall_time: float = 0.0
    details: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_residuals(cls, check_id: str, params: Dict[str, Any], residuals: Dict[str, float],
                       tolerance: float, wall_time: float = 0.0, **details) -> "ReportEntry":
        worst = _finite_max(float(v) for v in residuals.values())
        return cls(
            check_id=check_id,
            params=params,
            max_residual=worst,
            tolerance=tolerance,
            passed=worst <= tolerance,
            wall_time=wall_time,
            details={"residuals": {k: float(v) for k, v in residuals.items()}, **details},
        )


class ReportSummary(BaseModel):
    command: str
    seed: int
    total: int
    passed: int
    failed: int
    all_passed: bool
    failed_checks: List[str] = Field(default_factory=list)

    @classmethod
    def of(cls, command: str, seed: int, entries: List[ReportEntry]) -> "ReportSummary":
        failed = [e.check_id for e in entries if not e.passed]
        return cls(
            command=command,
            seed=seed,
            total=len(entries),
            passed=len(entries) - len(failed),
            failed=len(failed),
            all_passed=not failed,
            failed_checks=failed,
        )


class Report(BaseModel):
    entries: List[ReportEntry] = Field(default_factory=list)
    summary: ReportSummary
    artifacts: Dict[str, Any] = Field(default_factory=dict)
