"""
Models for CLI runs: run configuration, per-command requests and output tables.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from mdlt.models.inversion import ContourConfig, PostWidderConfig
from mdlt.models.problems import FractionalProblem2D, SecondOrderProblem, VolterraProblem
from mdlt.models.transform import FunctionRef, LaplacePoint, QuadratureConfig, QuadratureMode


class Command(str, Enum):
    """CLI commands."""
    TRANSFORM = "transform"
    INVERT = "invert"
    REGION = "region"
    PAIRS = "pairs"
    SOLVE = "solve"
    SCHEDULE = "schedule"


class OutputFormat(str, Enum):
    """Output table format."""
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """One CLI invocation."""
    command: Command
    input: Path = Field(..., description="Path to the JSON input document")
    output: Path = Field(..., description="Path of the table to write")
    format: OutputFormat = Field(default=OutputFormat.CSV)
    seed: int = Field(default=0, ge=0, description="Seed for randomized grids")

    @field_validator("input")
    @classmethod
    def _readable(cls, v: Path) -> Path:
        if not v.is_file():
            raise ValueError(f"input file {v} is not readable")
        return v


class ResultTable(BaseModel):
    """Rows written by a command; complex values are already split into re/im."""
    command: Command
    columns: List[str]
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
    exit_code: int = Field(default=0, ge=0, le=2, exclude=True)


class TransformRequest(BaseModel):
    """Input of `mdlt transform`."""
    function: FunctionRef
    points: List[LaplacePoint] = Field(..., min_length=1)
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)

    class Config:
        json_schema_extra = {
            "example": {
                "function": {"name": "fresnel2d", "dims": 2},
                "points": [[0.0, 0.0]],
                "quadrature": {"mode": "iterated", "rel_tol": 1e-6}
            }
        }


class InversionMethod(str, Enum):
    """Inversion algorithm."""
    POST_WIDDER = "post_widder"
    BROMWICH = "bromwich"


class InvertRequest(BaseModel):
    """Input of `mdlt invert`."""
    transform: FunctionRef
    method: InversionMethod
    points: List[List[float]] = Field(..., min_length=1, description="Time points t with t_j > 0")
    contour: ContourConfig = Field(default_factory=ContourConfig)
    post_widder: PostWidderConfig = Field(default_factory=PostWidderConfig)

    @field_validator("points")
    @classmethod
    def _positive(cls, v):
        if any(len(p) == 0 or any(x <= 0 for x in p) for p in v):
            raise ValueError("time points need t_j > 0")
        return v

    class Config:
        json_schema_extra = {
            "example": {
                "transform": {"name": "sep_pole", "dims": 2, "params": {"order": 2}},
                "method": "bromwich",
                "points": [[2.0, 3.0]],
                "contour": {"shape": "vertical_line", "offsets": [1.0, 1.0], "half_length": 200.0}
            }
        }


class RegionRequest(BaseModel):
    """Input of `mdlt region`."""
    function: FunctionRef
    probes: List[LaplacePoint] = Field(..., min_length=1)
    quadrature: QuadratureConfig = Field(
        default_factory=lambda: QuadratureConfig(mode=QuadratureMode.ITERATED, rel_tol=1e-5)
    )
    probe_grid: Optional[List[float]] = Field(
        default=None, description="Sorted real grid for per-axis abscissa estimates"
    )

    @field_validator("probe_grid")
    @classmethod
    def _sorted(cls, v):
        if v is not None and (len(v) < 3 or any(b <= a for a, b in zip(v, v[1:]))):
            raise ValueError("probe_grid must be strictly ascending with >= 3 points")
        return v


class PairKind(str, Enum):
    """Transform pairs verified by `mdlt pairs`."""
    ML = "ml"
    WRIGHT = "wright"


class PairsRequest(BaseModel):
    """Input of `mdlt pairs`."""
    pair: PairKind
    params: Dict[str, Any] = Field(default_factory=dict)
    dims: int = Field(default=2, ge=1, le=4)
    points: List[LaplacePoint] = Field(..., min_length=1)
    tolerance: float = Field(default=1e-5, gt=0, description="Declared relative tolerance")
    quadrature: QuadratureConfig = Field(default_factory=lambda: QuadratureConfig(rel_tol=1e-9))


class ProblemKind(str, Enum):
    """Solver selected by `mdlt solve`."""
    SECOND_ORDER = "second_order"
    VOLTERRA = "volterra"
    FRACTIONAL = "fractional"


class SolveRequest(BaseModel):
    """Input of `mdlt solve`: the problem document is validated against the model of its kind."""
    kind: ProblemKind
    problem: Dict[str, Any] = Field(default_factory=dict, description="Problem fields")

    @model_validator(mode="after")
    def _valid_problem(self) -> "SolveRequest":
        self.build()
        return self

    def build(self):
        model = {
            ProblemKind.SECOND_ORDER: SecondOrderProblem,
            ProblemKind.VOLTERRA: VolterraProblem,
            ProblemKind.FRACTIONAL: FractionalProblem2D,
        }[self.kind]
        return model.model_validate(self.problem)

    class Config:
        json_schema_extra = {
            "example": {
                "kind": "volterra",
                "problem": {
                    "A": [[1.0]],
                    "omega": [1.0, 1.0],
                    "grid": [{"start": 1.0, "stop": 1.0, "count": 1}, {"start": 1.0, "stop": 1.0, "count": 1}]
                }
            }
        }


class ScheduleRequest(BaseModel):
    """Input of `mdlt schedule`."""
    alpha: List[int] = Field(..., min_length=1, description="Multi-index")
    axis_order: Optional[List[int]] = Field(
        default=None, description="Elimination rank of each axis (default n, ..., 1)"
    )
    extra_alphas: List[List[int]] = Field(
        default_factory=list, description="Further multi-indices merged into one schedule"
    )

    @model_validator(mode="after")
    def _lengths(self) -> "ScheduleRequest":
        n = len(self.alpha)
        if any(len(a) != n for a in self.extra_alphas):
            raise ValueError("all multi-indices must share one length")
        if self.axis_order is not None and sorted(self.axis_order) != list(range(1, n + 1)):
            raise ValueError(f"axis_order must be a permutation of 1..{n}")
        return self
