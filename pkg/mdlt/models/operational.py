"""
Models for the operational rules of the transform.
"""

import math
from typing import Any, List

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from mdlt.models.transform import parse_complex


class ShiftVector(BaseModel):
    """Non-negative shift h used by the shift and delay rules."""
    h: List[float] = Field(..., min_length=1, description="Per-axis shift h_j >= 0")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple, np.ndarray)):
            return {"h": [float(v) for v in data]}
        return data

    @field_validator("h")
    @classmethod
    def _nonnegative(cls, v):
        if any(x < 0 or not math.isfinite(x) for x in v):
            raise ValueError("shift components must be finite and >= 0")
        return v

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.h, dtype=float)


class DampingVector(BaseModel):
    """Complex damping z for e^{-z.t} f."""
    z: List[Any] = Field(..., min_length=1, description="Per-axis complex damping")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple, np.ndarray)):
            return {"z": list(data)}
        return data

    @field_validator("z")
    @classmethod
    def _finite(cls, v):
        values = [parse_complex(x) for x in v]
        if not all(math.isfinite(x.real) and math.isfinite(x.imag) for x in values):
            raise ValueError("damping components must be finite")
        return values

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.z, dtype=complex)


class MultiIndex(BaseModel):
    """Multi-index v of non-negative integers."""
    v: List[int] = Field(..., min_length=1, description="Per-axis order")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple, np.ndarray)):
            return {"v": [int(x) for x in data]}
        return data

    @field_validator("v")
    @classmethod
    def _nonnegative(cls, v):
        if any(x < 0 for x in v):
            raise ValueError("multi-index entries must be >= 0")
        return v

    @property
    def order(self) -> int:
        return sum(self.v)

    def as_tuple(self) -> tuple:
        return tuple(self.v)


class IdentityCheck(BaseModel):
    """Two independently computed sides of an operational identity."""
    lhs: Any = Field(..., description="Left side in C^m")
    rhs: Any = Field(..., description="Right side in C^m")
    residual: float = Field(..., ge=0, description="||lhs - rhs|| / (1 + ||lhs||)")

    class Config:
        arbitrary_types_allowed = True
