"""
Models for transform inversion, Tauberian limits and uniqueness checks.
"""

import math
from enum import Enum
from typing import Any, List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator


class Decay(BaseModel):
    """
    Declared decay ||F(lambda)|| <= M * prod_j |lambda_j|^{-1-eps_j}
    on Re lambda_j > omega_j.
    """
    M: float = Field(default=1.0, gt=0, description="Majorant constant")
    omega: List[float] = Field(..., description="Per-axis abscissa")
    eps: List[float] = Field(..., description="Per-axis decay exponent")

    @model_validator(mode="after")
    def _check(self) -> "Decay":
        if len(self.omega) != len(self.eps):
            raise ValueError("omega and eps must share one length")
        if any(e < 0 for e in self.eps):
            raise ValueError("decay exponents must be >= 0")
        return self

    @classmethod
    def uniform(cls, dims: int, M: float = 1.0, omega: float = 0.0, eps: float = 0.0) -> "Decay":
        return cls(M=M, omega=[omega] * dims, eps=[eps] * dims)

    @property
    def dims(self) -> int:
        return len(self.omega)


class DerivativeSource(str, Enum):
    """Where Post-Widder obtains the mixed partials of F."""
    ANALYTIC_CALLBACK = "analytic_callback"
    MOMENT_QUADRATURE = "moment_quadrature"


class PostWidderConfig(BaseModel):
    """Post-Widder order and derivative source."""
    k: Union[int, List[int]] = Field(default=32, description="Per-axis order k_j >= 1")
    derivative_source: DerivativeSource = Field(
        default=DerivativeSource.ANALYTIC_CALLBACK,
        description="Analytic partials or the moment route through f"
    )
    moment_rel_tol: float = Field(default=1e-10, gt=0, description="rel_tol of moment quadrature")

    @field_validator("k")
    @classmethod
    def _positive(cls, v):
        values = v if isinstance(v, list) else [v]
        if any(k < 1 for k in values):
            raise ValueError("Post-Widder orders must be >= 1")
        return v

    def orders(self, dims: int) -> List[int]:
        if isinstance(self.k, list):
            if len(self.k) != dims:
                raise ValueError(f"expected {dims} orders, got {len(self.k)}")
            return list(self.k)
        return [self.k] * dims


class ContourShape(str, Enum):
    """Bromwich contour family."""
    VERTICAL_LINE = "vertical_line"
    SECTOR_RAYS = "sector_rays"


PerAxis = Union[float, List[float]]


class ContourConfig(BaseModel):
    """Per-axis Bromwich contour parameters."""
    shape: ContourShape = Field(default=ContourShape.VERTICAL_LINE, description="Contour family")
    offsets: Optional[PerAxis] = Field(
        default=None,
        description="c_j > omega_j (default omega_j + 1 + 1/t_j)"
    )
    half_length: PerAxis = Field(default=200.0, description="L_j for vertical lines")
    nodes: int = Field(default=16, ge=8, le=64, description="Gauss-Legendre nodes per panel")
    angle: PerAxis = Field(default=math.pi / 4, description="gamma_j in (0, pi/2) for sector rays")
    ray_decay: float = Field(default=40.0, gt=5, description="Truncate rays where |e^{lambda t}| ~ e^{-ray_decay}")
    check_decay: bool = Field(default=True, description="Sample |F| against the declared majorant")

    @field_validator("half_length")
    @classmethod
    def _positive_length(cls, v):
        values = v if isinstance(v, list) else [v]
        if any(x <= 0 for x in values):
            raise ValueError("half_length must be > 0")
        return v

    @field_validator("angle")
    @classmethod
    def _sector_angle(cls, v):
        values = v if isinstance(v, list) else [v]
        if any(not 0 < x < math.pi / 2 for x in values):
            raise ValueError("sector angle must lie in (0, pi/2)")
        return v

    def per_axis(self, value, dims: int) -> List[float]:
        if isinstance(value, list):
            if len(value) != dims:
                raise ValueError(f"expected {dims} per-axis values, got {len(value)}")
            return [float(x) for x in value]
        return [float(value)] * dims


class InversionResult(BaseModel):
    """Recovered values at a batch of time points."""
    points: Any = Field(..., description="Time points, shape (P, n)")
    values: Any = Field(..., description="Recovered values, shape (P, m)")
    error_estimate: Any = Field(..., description="Per-point error estimate, shape (P,)")
    accuracy_warning: bool = Field(default=False, description="Low-order or best-effort flag")
    method: str = Field(..., description="post_widder or bromwich")

    class Config:
        arbitrary_types_allowed = True


class TauberianResult(BaseModel):
    """Extrapolated initial or final value."""
    value: Any = Field(..., description="Limit in C^m")
    error_estimate: float = Field(..., ge=0, description="Last extrapolation increment")
    converged: bool = Field(..., description="False if increments failed to decrease")

    class Config:
        arbitrary_types_allowed = True


class UniquenessReport(BaseModel):
    """Outcome of the transform-equality gate and reconstruction comparison."""
    gate_passed: bool
    transform_discrepancy: float = Field(..., ge=0)
    reconstruction_discrepancy: Optional[float] = Field(default=None)

    @property
    def max_discrepancy(self) -> float:
        if self.gate_passed and self.reconstruction_discrepancy is not None:
            return self.reconstruction_discrepancy
        return self.transform_discrepancy
