"""
Parameter models for special functions.
"""

from pydantic import BaseModel, Field, field_validator

from mdlt.config import settings


class SeriesAccuracy(BaseModel):
    """Stopping rule for series summation."""
    rel_tol: float = Field(
        default_factory=lambda: settings.series_rel_tol,
        gt=0,
        description="Relative tolerance of the truncated tail"
    )
    max_terms: int = Field(
        default_factory=lambda: settings.series_max_terms,
        ge=1,
        description="Hard cap on the number of summed terms"
    )


class MLParams(BaseModel):
    """Two-parameter Mittag-Leffler function E_{alpha,beta}."""
    alpha: float = Field(..., gt=0, description="Order alpha > 0")
    beta: float = Field(default=1.0, description="Second parameter beta")

    class Config:
        json_schema_extra = {
            "example": {"alpha": 0.5, "beta": 1.0}
        }


class WrightParams(BaseModel):
    """Wright function Phi_gamma (M-Wright normalization)."""
    gamma: float = Field(..., description="Order gamma in (0, 1)")

    @field_validator("gamma")
    @classmethod
    def _open_unit_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {v}")
        return v
