"""Common schemas used across reports."""

from enum import Enum

from pydantic import BaseModel, Field

from cga_invariants.config import get_settings


class CheckStatus(str, Enum):
    """Outcome of a single verification."""

    PASS = "PASS"
    WARN = "WARN"
    FAIL = "FAIL"


def worst_status(statuses: list[CheckStatus]) -> CheckStatus:
    """FAIL beats WARN beats PASS."""
    if CheckStatus.FAIL in statuses:
        return CheckStatus.FAIL
    if CheckStatus.WARN in statuses:
        return CheckStatus.WARN
    return CheckStatus.PASS


class ReportBase(BaseModel):
    """Fields carried by every top-level report."""

    schema_version: str = Field(
        default_factory=lambda: get_settings().report_schema_version,
        description="Version of the report layout",
    )
    ell: str = Field(..., description="Half-integer ell, as p/2")


class DiscrepancyEntry(BaseModel):
    """A printed value that the exact computation does not reproduce."""

    key: str = Field(..., description="Ledger key")
    subject: str = Field(..., description="What the printed value describes")
    printed: str = Field(..., description="Value as printed")
    computed: str = Field(..., description="Value found by exact computation")
    resolution: str = Field(..., description="What the engine uses instead")
    status: CheckStatus = Field(default=CheckStatus.WARN)
