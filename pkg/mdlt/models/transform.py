"""
Models for forward transforms and convergence-region analysis.
"""

import math
from enum import Enum
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from mdlt.config import settings


def parse_complex(value: Any) -> complex:
    """Accept a number, a [re, im] pair or a {"re": .., "im": ..} mapping."""
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float)):
        return complex(value, 0.0)
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"Cannot interpret {value!r} as a complex number")


class LaplacePoint(BaseModel):
    """An n-tuple of complex frequencies (lambda_1, ..., lambda_n)."""
    real: List[float] = Field(..., min_length=1, description="Real parts")
    imag: List[float] = Field(default_factory=list, description="Imaginary parts (default 0)")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple, np.ndarray)):
            values = [parse_complex(v) for v in data]
            return {"real": [v.real for v in values], "imag": [v.imag for v in values]}
        return data

    @model_validator(mode="after")
    def _check(self) -> "LaplacePoint":
        if not self.imag:
            self.imag = [0.0] * len(self.real)
        if len(self.imag) != len(self.real):
            raise ValueError("real and imag parts must have the same length")
        if not all(math.isfinite(v) for v in self.real + self.imag):
            raise ValueError("LaplacePoint components must be finite")
        return self

    @classmethod
    def of(cls, *values: complex) -> "LaplacePoint":
        return cls.model_validate(list(values))

    @property
    def dims(self) -> int:
        return len(self.real)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.real, dtype=float) + 1j * np.asarray(self.imag, dtype=float)


class Envelope(BaseModel):
    """
    Growth envelope |f(t)| <= M * prod_j (t_j^eta_j + t_j^zeta_j) e^{omega_j t_j}.
    """
    M: float = Field(default=1.0, ge=0, description="Envelope constant")
    omega: List[float] = Field(..., description="Per-axis exponential type")
    eta: List[float] = Field(..., description="Per-axis small-t power")
    zeta: List[float] = Field(..., description="Per-axis large-t power")

    @model_validator(mode="after")
    def _check(self) -> "Envelope":
        if not (len(self.omega) == len(self.eta) == len(self.zeta)):
            raise ValueError("envelope parameters must share one length")
        if any(e <= -1 for e in self.eta):
            raise ValueError("eta_j must exceed -1 for local integrability")
        return self

    @classmethod
    def uniform(cls, dims: int, M: float = 1.0, omega: float = 0.0,
                eta: float = 0.0, zeta: float = 0.0) -> "Envelope":
        return cls(M=M, omega=[omega] * dims, eta=[eta] * dims, zeta=[zeta] * dims)

    @property
    def dims(self) -> int:
        return len(self.omega)

    def bound(self, t: np.ndarray) -> np.ndarray:
        """Evaluate the majorant at points t of shape (N, n)."""
        t = np.atleast_2d(np.asarray(t, dtype=float))
        out = np.full(t.shape[0], self.M, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            for j in range(self.dims):
                tj = t[:, j]
                out *= (tj ** self.eta[j] + tj ** self.zeta[j]) * np.exp(self.omega[j] * tj)
        return out


class QuadratureMode(str, Enum):
    """Meaning of the Laplace integral."""
    ABSOLUTE = "absolute"
    ITERATED = "iterated"
    BOUNDED_PARTIAL = "bounded_partial"


class QuadratureRule(str, Enum):
    """Panel rule for the bulk of each axis."""
    GAUSS_LEGENDRE = "gauss_legendre"
    TANH_SINH = "tanh_sinh"


PerAxis = Union[float, List[float]]


class QuadratureConfig(BaseModel):
    """Quadrature parameters shared by transform_core and operational calculus."""
    mode: QuadratureMode = Field(default=QuadratureMode.ABSOLUTE, description="Integral mode")
    truncation: Optional[PerAxis] = Field(
        default=None,
        description="Per-axis truncation T_j (auto from the envelope when omitted)"
    )
    panels: Union[int, List[int]] = Field(default=8, description="Initial per-axis panel count")
    rule: QuadratureRule = Field(default=QuadratureRule.GAUSS_LEGENDRE, description="Panel rule")
    rel_tol: float = Field(
        default_factory=lambda: settings.default_rel_tol,
        gt=0,
        description="Target relative error"
    )
    order: int = Field(default=16, ge=2, le=128, description="Gauss-Legendre points per panel")
    tanh_sinh_level: int = Field(
        default=3, ge=1, le=8,
        description="Tanh-sinh step h = 2^-level on the panel touching t = 0"
    )
    adaptive: bool = Field(default=True, description="Double panels until rel_tol is met")
    max_refinements: int = Field(default=6, ge=1, le=12, description="Cap on panel doublings")
    max_doublings: int = Field(
        default=14, ge=3, le=30,
        description="Cap on interval doublings in iterated mode"
    )
    taper_fallback: bool = Field(
        default=True,
        description="Accept the smoothly tapered partial integral when the accelerated sequence stalls"
    )
    grading_levels: int = Field(
        default=10, ge=0, le=40,
        description="Geometric grading levels toward t = 0 for cumulative integration"
    )
    region_box: float = Field(default=4.0, gt=0, description="Smallest box T for region tests")
    region_tol: float = Field(default=1e-3, gt=0, description="Tail tolerance for region tests")
    region_nodes: int = Field(
        default=4_000_000, ge=10_000,
        description="Node budget of one region classification grid"
    )

    @field_validator("panels")
    @classmethod
    def _positive_panels(cls, v):
        values = v if isinstance(v, list) else [v]
        if any(p < 1 for p in values):
            raise ValueError("panels must be >= 1")
        return v

    def per_axis(self, value, dims: int) -> List:
        if isinstance(value, list):
            if len(value) != dims:
                raise ValueError(f"expected {dims} per-axis values, got {len(value)}")
            return list(value)
        return [value] * dims


class TransformResult(BaseModel):
    """Forward transform value with convergence diagnostics."""
    value: Any = Field(..., description="Value in C^m (numpy array)")
    mode_used: QuadratureMode = Field(..., description="Mode actually used")
    tail_estimate: List[float] = Field(..., description="Per-axis truncation error bound")
    converged: bool = Field(..., description="Whether the mode's convergence test passed")
    truncation: List[float] = Field(default_factory=list, description="Per-axis T_j used")

    class Config:
        arbitrary_types_allowed = True

    @field_validator("tail_estimate")
    @classmethod
    def _nonnegative(cls, v):
        if any(x < 0 for x in v):
            raise ValueError("tail estimates must be non-negative")
        return v


class MembershipVerdict(str, Enum):
    """Region membership of a Laplace point."""
    IN_OMEGA_ABS = "in_Ω_abs"
    IN_OMEGA_ONLY = "in_Ω_only"
    IN_OMEGA_B = "in_Ω_b"
    OUTSIDE = "outside"
    UNDETERMINED = "undetermined"


class PointClassification(BaseModel):
    """Verdict at one point plus the raw tests it was derived from."""
    point: LaplacePoint
    verdict: MembershipVerdict
    absolutely_convergent: bool = Field(..., description="Boxed absolute integrals are Cauchy")
    bounded: bool = Field(..., description="Boxed partial integrals stay inside the 10^3 window")
    iterated_converged: Optional[bool] = Field(
        default=None, description="Iterated limit stabilized (None when not attempted)"
    )


class ConvergenceReport(BaseModel):
    """Abscissa estimates and membership verdicts."""
    abs_abscissa: List[float] = Field(default_factory=list, description="Per-axis abscissa estimate")
    memberships: List[PointClassification] = Field(default_factory=list)


class FunctionRef(BaseModel):
    """Reference to a registry entry."""
    name: str = Field(..., description="Registry name")
    dims: int = Field(default=2, ge=1, le=6, description="Number of time variables")
    params: Dict[str, Any] = Field(default_factory=dict, description="Factory parameters")

    class Config:
        json_schema_extra = {
            "example": {"name": "ml_pair", "dims": 2,
                        "params": {"alpha": 1.0, "beta": 1.0, "omega": 1.0}}
        }
