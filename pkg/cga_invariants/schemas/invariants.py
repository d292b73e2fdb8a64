"""Schemas for invariant verification, expression checks and benchmarks."""

from typing import Any

from pydantic import BaseModel, Field

from cga_invariants.schemas.common import CheckStatus, DiscrepancyEntry, ReportBase


class AnnihilationEntry(BaseModel):
    """One (operator, invariant) pair."""

    generator: str
    invariant: str
    annihilated: bool
    peak_terms: int = Field(0, ge=0, description="Largest intermediate polynomial")


class AnnihilationReport(ReportBase):
    """Every prolonged generator applied to every final invariant."""

    invariants: list[str]
    generators: list[str]
    argument_count: int = Field(..., ge=0)
    status: CheckStatus
    entries: list[AnnihilationEntry]

    @property
    def failures(self) -> list[AnnihilationEntry]:
        return [entry for entry in self.entries if not entry.annihilated]


class LemmaCheck(BaseModel):
    """One intermediate claim of the construction."""

    name: str
    status: CheckStatus
    detail: str = ""


class LemmaReport(ReportBase):
    status: CheckStatus
    checks: list[LemmaCheck]
    discrepancies: list[DiscrepancyEntry] = Field(default_factory=list)


class CheckVerdict(BaseModel):
    generator: str
    annihilated: bool


class CheckReport(ReportBase):
    """Which operators annihilate a user-supplied expression."""

    expression: str
    verdicts: list[CheckVerdict]


class BenchReport(ReportBase):
    timings: dict[str, float] = Field(..., description="Wall-clock seconds per phase")
    peak_terms: int = Field(..., ge=0)
    invariant_count: int = Field(..., ge=0)
    status: CheckStatus
    memory_limit_mb: int = Field(0, ge=0)


class EmitEntry(BaseModel):
    """One named expression or generator."""

    name: str
    value: dict[str, Any] = Field(..., description="num/den polynomials or field components")


class EmitDocument(ReportBase):
    target: str
    entries: list[EmitEntry]


class VerificationReport(ReportBase):
    """Annihilation and lemma checks from one verify-invariants run."""

    status: CheckStatus
    annihilation: AnnihilationReport
    lemmas: LemmaReport
