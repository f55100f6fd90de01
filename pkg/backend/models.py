"""
Verdict and report records shared by the CLI, the API and the library.

Negative outcomes of checks are values, not exceptions: every check returns
one of these records with a machine-readable ``status`` and an optional
``witness``.
"""

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class ConsistencyVerdict(BaseModel):
    status: Literal["CONSISTENT_CERTIFIED", "CONSISTENT_UP_TO_DEPTH", "INCONSISTENT"]
    depth: int
    reason: str = ""
    witness: Optional[dict[str, Any]] = None


class BoundedTypeVerdict(BaseModel):
    status: Literal["BOUNDED_CERTIFIED", "BOUNDED_UP_TO_CAP", "UNBOUNDED_SUSPECTED"]
    reasons: list[str] = Field(default_factory=list)
    length_cap: int
    witness: Optional[list[str]] = None


class MembershipVerdict(BaseModel):
    status: Literal["MEMBER", "NOT_MEMBER_UP_TO_CAPS"]
    q_order: int
    length_cap: int
    # one record per generator used: {"coeff", "monomial", "left", "relation", "right"}
    combination: Optional[list[dict[str, Any]]] = None


class QuasiFlatVerdict(BaseModel):
    status: Literal["QUASI_FLAT", "VIOLATION"]
    q_order: int
    length_cap: int
    witness: Optional[str] = None


class CancellationViolation(BaseModel):
    left: str
    right: str
    vertex: str
    reduced_with_potential: str


class CHLVerdict(BaseModel):
    status: Literal["OK", "CYCLICITY_VIOLATION", "RELATION_MISMATCH", "CURVATURE_NOT_INFINITESIMAL"]
    witness: Optional[dict[str, Any]] = None


class GrowthRow(BaseModel):
    arity: int
    entries: int
    min_q_order: Optional[int] = None


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class Report(BaseModel):
    """Output of one CLI/API command: named sections of serialized values."""

    status: Literal["ok", "error", "violation"] = "ok"
    command: str
    dimer: Optional[str] = None
    order: Optional[int] = None
    sections: dict[str, Any] = Field(default_factory=dict)
    checks: list[CheckResult] = Field(default_factory=list)
    timing: dict[str, float] = Field(default_factory=dict)

    def failed_checks(self):
        return [c for c in self.checks if not c.passed]
