"""Schemas for commutation-table verification."""

from pydantic import BaseModel, Field

from cga_invariants.schemas.common import CheckStatus, DiscrepancyEntry, ReportBase


class BracketEntry(BaseModel):
    """One bracket [first, second]."""

    first: str
    second: str
    computed: str = Field(..., description="Computed bracket as a vector field (text form)")
    expected: dict[str, str] = Field(
        ..., description="Expected combination of generators, coefficients as p/q"
    )
    decomposition: dict[str, str] | None = Field(
        None, description="Computed bracket written in the generator basis, None if outside the span"
    )
    match: bool
    central: bool = Field(False, description="True for the pairs carrying the central term")


class BracketReport(ReportBase):
    """All brackets for one ell."""

    central_sign: int = Field(..., description="Sign applied to the central term")
    central_sign_printed: int = Field(1, description="Sign of the central term as printed")
    status: CheckStatus
    entries: list[BracketEntry]
    discrepancies: list[DiscrepancyEntry] = Field(default_factory=list)
