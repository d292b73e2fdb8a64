"""Schemas for the expansion-coefficient table dump."""

from pydantic import BaseModel, Field

from cga_invariants.schemas.common import ReportBase


class CoeffEntry(BaseModel):
    k: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    a: int = Field(..., ge=0)
    b: int = Field(..., ge=0)
    value: str = Field(..., description="Exact rational as p/q")


class GammaEntry(BaseModel):
    k: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    value: str


class CoeffTableModel(ReportBase):
    """Every c_ab(k, m) and gamma(k, m) for one ell."""

    c: list[CoeffEntry]
    gamma: list[GammaEntry]
