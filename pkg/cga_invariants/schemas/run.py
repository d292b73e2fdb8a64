"""Validated command-line run configuration."""

from enum import Enum

from pydantic import BaseModel, Field, field_validator

from cga_invariants.services.arith import HalfInt


class OutputFormat(str, Enum):
    TEXT = "text"
    LATEX = "latex"
    JSON = "json"


class EmitTarget(str, Enum):
    GENERATORS = "generators"
    PHI = "phi"
    W = "w"
    WKM = "wkm"
    FINAL = "final"


class RunConfig(BaseModel):
    """Merged CLI flags and settings."""

    ell: str = Field(..., description="Half-integer ell >= 3/2, e.g. 5/2")
    output_format: OutputFormat = OutputFormat.TEXT
    parallelism: int = Field(1, ge=0)
    output: str | None = None
    what: EmitTarget | None = None

    @field_validator("ell")
    @classmethod
    def validate_ell(cls, v: str) -> str:
        """Reject anything that is not a half-integer >= 3/2."""
        return str(HalfInt.parse(v))

    @property
    def half_int(self) -> HalfInt:
        return HalfInt.parse(self.ell)
