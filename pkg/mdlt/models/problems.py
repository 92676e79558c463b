"""
Models for transform-domain solvers and the initial-condition schedule.
"""

import math
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from mdlt.models.inversion import ContourConfig, ContourShape
from mdlt.models.transform import FunctionRef, parse_complex


MatrixOp = List[List[Any]]


def matrix_array(value: Optional[MatrixOp], size: int) -> np.ndarray:
    """Row-major nested list (entries real or [re, im]) to a complex m x m array."""
    if value is None:
        return np.zeros((size, size), dtype=complex)
    return np.array([[parse_complex(x) for x in row] for row in value], dtype=complex)


def _check_matrix(value: Optional[MatrixOp]) -> Optional[MatrixOp]:
    if value is None:
        return value
    size = len(value)
    if size == 0 or any(len(row) != size for row in value):
        raise ValueError("matrices must be square and non-empty")
    for row in value:
        for x in row:
            z = parse_complex(x)
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError("matrix entries must be finite")
    return value


class GridSpec(BaseModel):
    """Uniform 1D grid {start, stop, count}."""
    start: float = Field(..., gt=0, description="First node (> 0)")
    stop: float = Field(..., gt=0, description="Last node")
    count: int = Field(..., ge=1, le=512, description="Number of nodes")

    @model_validator(mode="after")
    def _ordered(self) -> "GridSpec":
        if self.stop < self.start:
            raise ValueError("grid stop must be >= start")
        return self

    def nodes(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


def tensor_grid(specs: List[GridSpec]) -> np.ndarray:
    """Tensor product of 1D grids as points of shape (P, n), last axis fastest."""
    axes = [s.nodes() for s in specs]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _default_grid() -> List[GridSpec]:
    return [GridSpec(start=0.5, stop=1.5, count=3), GridSpec(start=0.5, stop=1.5, count=3)]


def _sector_contour() -> ContourConfig:
    return ContourConfig(shape=ContourShape.SECTOR_RAYS)


class InitialDataLayout(str, Enum):
    """Which traces carry the initial data of the second-order problem."""
    STANDARD = "standard"          # u, u_x, u_y on y = 0; u, u_x on x = 0
    Y_TRACES = "y_traces"          # u, u_y on y = 0; u, u_y, u_x on x = 0


STANDARD_KEYS = ("f1", "f2", "f3", "g1", "g2")
Y_TRACE_KEYS = ("f1", "f2", "g1", "g2", "g3")


class SecondOrderProblem(BaseModel):
    """
    A u_xx + B u_xy + C u_yy + D u_x + E u_y + F u = f on [0,inf)^2.

    Standard layout data: f1 = u(x,0), f2 = u_x(x,0), f3 = u_y(x,0),
    g1 = u(0,y), g2 = u_x(0,y).
    """
    A: Optional[MatrixOp] = Field(default=None, description="Coefficient of u_xx")
    B: Optional[MatrixOp] = Field(default=None, description="Coefficient of u_xy")
    C: Optional[MatrixOp] = Field(default=None, description="Coefficient of u_yy")
    D: Optional[MatrixOp] = Field(default=None, description="Coefficient of u_x")
    E: Optional[MatrixOp] = Field(default=None, description="Coefficient of u_y")
    F: Optional[MatrixOp] = Field(default=None, description="Coefficient of u")
    source: FunctionRef = Field(
        default_factory=lambda: FunctionRef(name="zero", dims=2),
        description="2D source f"
    )
    data: Dict[str, FunctionRef] = Field(default_factory=dict, description="1D initial data")
    layout: InitialDataLayout = Field(default=InitialDataLayout.STANDARD)
    grid: List[GridSpec] = Field(default_factory=_default_grid, description="Solution grid (2 axes)")
    contour: ContourConfig = Field(default_factory=_sector_contour)
    omega: List[float] = Field(default_factory=lambda: [0.0, 0.0], description="Per-axis abscissa of G")
    decay_eps: float = Field(default=0.0, ge=0, description="Decay exponent tested for G")
    fd_step: float = Field(default=0.01, gt=0, description="Finite-difference step of the residual")
    strict_decay: Optional[bool] = Field(default=None, description="Override settings.strict_decay")

    @field_validator("A", "B", "C", "D", "E", "F")
    @classmethod
    def _square_matrices(cls, v):
        return _check_matrix(v)

    @model_validator(mode="after")
    def _consistent(self) -> "SecondOrderProblem":
        sizes = {len(m) for m in (self.A, self.B, self.C, self.D, self.E, self.F) if m is not None}
        if len(sizes) > 1:
            raise ValueError("coefficient matrices must share one size")
        keys = STANDARD_KEYS if self.layout == InitialDataLayout.STANDARD else Y_TRACE_KEYS
        unknown = set(self.data) - set(keys)
        if unknown:
            raise ValueError(f"unknown data keys {sorted(unknown)} for layout {self.layout.value}")
        if len(self.grid) != 2:
            raise ValueError("second-order problems need a 2-axis grid")
        if len(self.omega) != 2:
            raise ValueError("omega needs one entry per axis")
        return self

    @property
    def size(self) -> int:
        for m in (self.A, self.B, self.C, self.D, self.E, self.F):
            if m is not None:
                return len(m)
        return 1

    def matrices(self) -> Dict[str, np.ndarray]:
        m = self.size
        return {name: matrix_array(getattr(self, name), m) for name in "ABCDEF"}


class VolterraProblem(BaseModel):
    """B u = A (a *0 u) + C f with scalar kernel a (data key "kernel")."""
    A: Optional[MatrixOp] = Field(default=None)
    B: Optional[MatrixOp] = Field(default=None, description="Defaults to the identity")
    C: Optional[MatrixOp] = Field(default=None, description="Defaults to the identity")
    source: FunctionRef = Field(default_factory=lambda: FunctionRef(name="one", dims=2))
    data: Dict[str, FunctionRef] = Field(
        default_factory=lambda: {"kernel": FunctionRef(name="one", dims=2)}
    )
    omega: List[float] = Field(default_factory=lambda: [0.0, 0.0], description="Per-axis abscissa")
    eps: List[float] = Field(default_factory=lambda: [0.0, 0.0], description="Per-axis decay exponent")
    grid: List[GridSpec] = Field(default_factory=_default_grid)
    contour: ContourConfig = Field(default_factory=_sector_contour)
    residual_points: int = Field(default=3, ge=1, description="Subsample size of the mild residual")
    strict_decay: Optional[bool] = Field(default=None)

    @field_validator("A", "B", "C")
    @classmethod
    def _square_matrices(cls, v):
        return _check_matrix(v)

    @model_validator(mode="after")
    def _consistent(self) -> "VolterraProblem":
        if "kernel" not in self.data:
            raise ValueError('Volterra problems need data["kernel"]')
        sizes = {len(m) for m in (self.A, self.B, self.C) if m is not None}
        if len(sizes) > 1:
            raise ValueError("coefficient matrices must share one size")
        if len(self.omega) != len(self.grid) or len(self.eps) != len(self.grid):
            raise ValueError("omega and eps need one entry per grid axis")
        return self

    @property
    def size(self) -> int:
        for m in (self.A, self.B, self.C):
            if m is not None:
                return len(m)
        return 1

    def matrices(self) -> Dict[str, np.ndarray]:
        m = self.size
        eye = np.eye(m, dtype=complex)
        return {
            "A": matrix_array(self.A, m),
            "B": eye if self.B is None else matrix_array(self.B, m),
            "C": eye if self.C is None else matrix_array(self.C, m),
        }


class FractionalKind(str, Enum):
    """Fractional derivative convention."""
    RIEMANN_LIOUVILLE = "riemann_liouville"
    CAPUTO = "caputo"


class FractionalProblem2D(BaseModel):
    """
    D^{alpha1}_{t1} D^{alpha2}_{t2} u = A u + f with m2 traces f_k (along t1)
    and m1 traces h_k (along t2), m_j = ceil(alpha_j).
    """
    alpha1: float = Field(..., ge=0, lt=2)
    alpha2: float = Field(..., ge=0, lt=2)
    kind: FractionalKind = Field(default=FractionalKind.RIEMANN_LIOUVILLE)
    A: Optional[MatrixOp] = Field(default=None)
    source: FunctionRef = Field(default_factory=lambda: FunctionRef(name="zero", dims=2))
    data: Dict[str, List[FunctionRef]] = Field(default_factory=dict, description='{"f": [...], "h": [...]}')
    grid: List[GridSpec] = Field(default_factory=_default_grid)
    contour: ContourConfig = Field(default_factory=_sector_contour)
    omega: Optional[List[float]] = Field(
        default=None,
        description="Per-axis abscissa of the resolvent (from the spectral radius of A when omitted)"
    )
    decay_eps: float = Field(default=0.0, ge=0)
    strict_decay: Optional[bool] = Field(default=None)

    @field_validator("A")
    @classmethod
    def _square_matrices(cls, v):
        return _check_matrix(v)

    @model_validator(mode="after")
    def _consistent(self) -> "FractionalProblem2D":
        unknown = set(self.data) - {"f", "h"}
        if unknown:
            raise ValueError(f"unknown data keys {sorted(unknown)}")
        if len(self.data.get("f", [])) > self.m2:
            raise ValueError(f"at most m2 = {self.m2} traces f_k are allowed")
        if len(self.data.get("h", [])) > self.m1:
            raise ValueError(f"at most m1 = {self.m1} traces h_k are allowed")
        if len(self.grid) != 2:
            raise ValueError("fractional problems need a 2-axis grid")
        if self.omega is not None and len(self.omega) != 2:
            raise ValueError("omega needs one entry per axis")
        return self

    @property
    def m1(self) -> int:
        return int(math.ceil(self.alpha1))

    @property
    def m2(self) -> int:
        return int(math.ceil(self.alpha2))

    @property
    def size(self) -> int:
        return 1 if self.A is None else len(self.A)

    def matrix(self) -> np.ndarray:
        return matrix_array(self.A, self.size)


class DecayCheckReport(BaseModel):
    """Numerical check of |G| * prod |lambda_j|^{1+eps} on a log-spaced real grid."""
    passed: bool
    fitted_M: float = Field(..., ge=0)
    worst_ratio: float = Field(..., ge=0)
    samples: int = Field(..., ge=1)


class SolveResult(BaseModel):
    """Solution grid with residual diagnostics."""
    points: Any = Field(..., description="Grid points, shape (P, 2)")
    values: Any = Field(..., description="Solution values, shape (P, m)")
    residuals: Any = Field(..., description="Per-point residual norm, shape (P,) (NaN when not computed)")
    residual_max: float = Field(..., description="Largest computed residual")
    decay_check: Optional[DecayCheckReport] = None
    best_effort: bool = Field(default=False, description="True when the decay check failed")

    class Config:
        arbitrary_types_allowed = True


class ScheduleEntry(BaseModel):
    """One required initial trace u^(derivative) with t_{zeroed_axis} = 0."""
    derivative: List[int]
    zeroed_axis: int = Field(..., ge=1, description="1-based index of the vanishing variable")

    def text(self) -> str:
        order = ",".join(str(d) for d in self.derivative)
        args = ",".join("0" if j + 1 == self.zeroed_axis else f"t{j + 1}"
                        for j in range(len(self.derivative)))
        return f"u^({order})({args})"


class InitialConditionSchedule(BaseModel):
    """Ordered list of required initial traces."""
    entries: List[ScheduleEntry] = Field(default_factory=list)

    def lines(self) -> List[str]:
        return [e.text() for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)
