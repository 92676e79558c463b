"""
Time-domain vector functions and their transforms.

A VectorFunction is a batch callable t (N, n) -> (N, m) with a declared
growth envelope. A TransformFunction is a batch callable lambda (N, n)
complex -> (N, m) with a declared decay. Separable members carry per-axis
factors so tensor grids are evaluated as outer products.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from mdlt.config import settings
from mdlt.core.quadrature import contract, contract_points
from mdlt.models.inversion import Decay
from mdlt.models.transform import Envelope


Factor = Callable[[np.ndarray], np.ndarray]
FactorPartial = Callable[[int, np.ndarray], np.ndarray]


def _as_rows(values: np.ndarray, count: int, codim: int) -> np.ndarray:
    values = np.asarray(values)
    if values.ndim == 1 and codim == 1:
        values = values[:, None]
    if values.shape != (count, codim):
        raise ValueError(f"function returned shape {values.shape}, expected {(count, codim)}")
    return values


def _mesh(axes: Sequence[np.ndarray]) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def _outer(columns: Sequence[np.ndarray]) -> np.ndarray:
    out = columns[0]
    for col in columns[1:]:
        out = np.multiply.outer(out, col)
    return out


class _GridEvaluator(BaseModel):
    """Shared batching logic for functions of n variables."""
    name: str
    dims: int = Field(..., ge=1)
    codim: int = Field(default=1, ge=1)
    func: Callable
    factors: Optional[List[Callable]] = None
    coefficient: Optional[List[complex]] = None
    grid_func: Optional[Callable] = Field(
        default=None, description="Direct tensor-grid evaluator axes -> (K_1, ..., K_n, m)"
    )

    class Config:
        arbitrary_types_allowed = True

    @model_validator(mode="after")
    def _check_factors(self):
        if self.factors is not None and len(self.factors) != self.dims:
            raise ValueError("one factor per axis is required")
        return self

    @property
    def separable(self) -> bool:
        return self.factors is not None

    def coefficient_vector(self) -> np.ndarray:
        if self.coefficient is None:
            return np.ones(self.codim, dtype=complex)
        return np.asarray(self.coefficient, dtype=complex)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.dims:
            raise ValueError(f"{self.name} expects {self.dims} coordinates, got {pts.shape[1]}")
        out = self._evaluate(pts)
        return out[0] if single else out

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        chunk = settings.chunk_size
        if pts.shape[0] <= chunk:
            return _as_rows(self.func(pts), pts.shape[0], self.codim)
        pieces = [pts[i:i + chunk] for i in range(0, pts.shape[0], chunk)]
        if settings.threads > 1:
            with ThreadPoolExecutor(max_workers=settings.threads) as pool:
                parts = list(pool.map(self.func, pieces))
        else:
            parts = [self.func(p) for p in pieces]
        return np.concatenate([_as_rows(v, p.shape[0], self.codim) for v, p in zip(parts, pieces)])

    def on_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Values on the tensor grid axes[0] x ... x axes[n-1], shape (K_1, ..., K_n, m)."""
        axes = [np.asarray(a) for a in axes]
        shape = tuple(a.size for a in axes)
        if self.grid_func is not None:
            return np.asarray(self.grid_func(axes)).reshape(shape + (self.codim,))
        if self.separable:
            columns = [np.asarray(f(a)) for f, a in zip(self.factors, axes)]
            return np.multiply.outer(_outer(columns), self.coefficient_vector())
        return self._evaluate(_mesh(axes)).reshape(shape + (self.codim,))

    def _row_chunks(self, axes: Sequence[np.ndarray]):
        """Yield (row slice, values) slabs along the first axis within the chunk budget."""
        inner = int(np.prod([a.size for a in axes[1:]])) if len(axes) > 1 else 1
        rows = max(1, settings.chunk_size // max(inner, 1))
        first = axes[0]
        for start in range(0, first.size, rows):
            sl = slice(start, min(start + rows, first.size))
            yield sl, self.on_grid([first[sl]] + list(axes[1:]))

    def integrate_tensor(self, axes: Sequence[np.ndarray], weights: Sequence[np.ndarray]) -> np.ndarray:
        """Tensor-product quadrature sum, shape (m,)."""
        return self.integrate_tensor_many(axes, [weights])[0]

    def integrate_tensor_many(
        self,
        axes: Sequence[np.ndarray],
        weight_sets: Sequence[Sequence[np.ndarray]],
        reducer: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> List[np.ndarray]:
        """
        Several tensor sums over one grid evaluation.

        reducer maps a values slab (..., m) to another slab (..., m') before
        contraction (e.g. the max-abs norm for absolute integrals).
        """
        if self.separable and reducer is None:
            out = []
            columns = [np.asarray(f(a)) for f, a in zip(self.factors, axes)]
            for weights in weight_sets:
                prod = np.prod([np.dot(w, c) for w, c in zip(weights, columns)])
                out.append(prod * self.coefficient_vector())
            return out

        totals: List[Optional[np.ndarray]] = [None] * len(weight_sets)
        for sl, slab in self._row_chunks(axes):
            if reducer is not None:
                slab = reducer(slab)
            for i, weights in enumerate(weight_sets):
                part = contract(slab, [weights[0][sl]] + list(weights[1:]))
                totals[i] = part if totals[i] is None else totals[i] + part
        return totals

    def contract_kernels(self, axes: Sequence[np.ndarray], kernels: Sequence[np.ndarray]) -> np.ndarray:
        """Point-wise kernel contraction over a tensor grid, shape (P, m)."""
        if self.separable:
            columns = [np.asarray(f(a)) for f, a in zip(self.factors, axes)]
            prod = np.ones(kernels[0].shape[0], dtype=complex)
            for kernel, col in zip(kernels, columns):
                prod = prod * (kernel @ col)
            return prod[:, None] * self.coefficient_vector()[None, :]
        total = None
        for sl, slab in self._row_chunks(axes):
            part = contract_points(slab, [kernels[0][:, sl]] + list(kernels[1:]))
            total = part if total is None else total + part
        return total


class VectorFunction(_GridEvaluator):
    """f : [0, inf)^n -> C^m with a polynomial-exponential envelope."""
    envelope: Envelope
    kinks: Optional[List[List[float]]] = Field(
        default=None, description="Per-axis abscissae where f is not smooth (panel breakpoints)"
    )

    @model_validator(mode="after")
    def _check_envelope(self):
        if self.envelope.dims != self.dims:
            raise ValueError("envelope dimension must match dims")
        return self

    def spot_check_envelope(self, samples: int = 64, seed: int = 0, upper: float = 8.0) -> float:
        """Largest |f| / bound over random points in (0, upper]^n (<= 1 when the envelope holds)."""
        rng = np.random.default_rng(seed)
        pts = rng.uniform(1e-3, upper, size=(samples, self.dims))
        values = np.max(np.abs(self(pts)), axis=1)
        bound = self.envelope.bound(pts)
        ratio = float(np.max(values / bound))
        if ratio > 1.0:
            logger.warning(f"{self.name}: envelope exceeded by factor {ratio:.3g}")
        return ratio


class TransformFunction(_GridEvaluator):
    """F : C^n -> C^m with declared decay and optional analytic partials."""
    decay: Decay
    partials: Optional[Callable] = None
    factor_partials: Optional[List[Callable]] = None
    source: Optional[VectorFunction] = None
    sector_angle: Optional[float] = Field(
        default=None, description="Half-opening beyond pi/2 on which F is analytic"
    )

    @model_validator(mode="after")
    def _check_decay(self):
        if self.decay.dims != self.dims:
            raise ValueError("decay dimension must match dims")
        return self

    def has_partials(self) -> bool:
        return self.partials is not None or self.factor_partials is not None

    def partial(self, orders: Sequence[int], lam: np.ndarray) -> np.ndarray:
        """Mixed partial d^v F at points lam (N, n), shape (N, m)."""
        lam = np.atleast_2d(np.asarray(lam, dtype=complex))
        if self.factor_partials is not None:
            prod = np.ones(lam.shape[0], dtype=complex)
            for j, (fp, v) in enumerate(zip(self.factor_partials, orders)):
                prod = prod * fp(int(v), lam[:, j])
            return prod[:, None] * self.coefficient_vector()[None, :]
        if self.partials is None:
            raise ValueError(f"{self.name} has no analytic partials")
        return _as_rows(self.partials(tuple(int(v) for v in orders), lam), lam.shape[0], self.codim)

    def divided_by_lambda(self) -> "TransformFunction":
        """F(lambda) / (lambda_1 ... lambda_n): the transform of the box antiderivative."""
        decay = Decay(M=self.decay.M, omega=[max(w, 0.0) for w in self.decay.omega],
                      eps=[e + 1.0 for e in self.decay.eps])
        if self.separable:
            factors = [(lambda f: (lambda x: f(x) / x))(f) for f in self.factors]
            return TransformFunction(name=f"{self.name}/prod(lambda)", dims=self.dims, codim=self.codim,
                                     func=lambda lam: self.func(lam) / np.prod(lam, axis=1)[:, None],
                                     factors=factors, coefficient=self.coefficient,
                                     decay=decay, sector_angle=self.sector_angle)

        def func(lam):
            return _as_rows(self.func(lam), lam.shape[0], self.codim) / np.prod(lam, axis=1)[:, None]

        return TransformFunction(name=f"{self.name}/prod(lambda)", dims=self.dims, codim=self.codim,
                                 func=func, decay=decay, sector_angle=self.sector_angle)


class TransformPair(BaseModel):
    """Time-domain function with its closed-form transform, if known."""
    function: VectorFunction
    transform: Optional[TransformFunction] = None
    abscissa: List[float] = Field(..., description="Per-axis abscissa of absolute convergence")

    class Config:
        arbitrary_types_allowed = True


def separable_function(name: str, factors: Sequence[Factor], envelope: Envelope,
                       coefficient: Optional[Sequence[complex]] = None,
                       kinks: Optional[List[List[float]]] = None) -> VectorFunction:
    """Product function c * prod_j phi_j(t_j)."""
    factors = list(factors)
    coeff = np.ones(1, dtype=complex) if coefficient is None else np.asarray(coefficient, dtype=complex)

    def func(t):
        prod = np.ones(t.shape[0], dtype=complex)
        for j, f in enumerate(factors):
            prod = prod * f(t[:, j])
        return prod[:, None] * coeff[None, :]

    return VectorFunction(name=name, dims=len(factors), codim=coeff.size, func=func,
                          factors=factors, coefficient=list(coeff), envelope=envelope, kinks=kinks)


def separable_transform(name: str, factors: Sequence[Factor], decay: Decay,
                        factor_partials: Optional[Sequence[FactorPartial]] = None,
                        coefficient: Optional[Sequence[complex]] = None,
                        sector_angle: Optional[float] = None,
                        source: Optional[VectorFunction] = None) -> TransformFunction:
    """Product transform c * prod_j Phi_j(lambda_j)."""
    factors = list(factors)
    coeff = np.ones(1, dtype=complex) if coefficient is None else np.asarray(coefficient, dtype=complex)

    def func(lam):
        prod = np.ones(lam.shape[0], dtype=complex)
        for j, f in enumerate(factors):
            prod = prod * f(lam[:, j])
        return prod[:, None] * coeff[None, :]

    return TransformFunction(name=name, dims=len(factors), codim=coeff.size, func=func,
                             factors=factors, coefficient=list(coeff), decay=decay,
                             factor_partials=None if factor_partials is None else list(factor_partials),
                             sector_angle=sector_angle, source=source)


def linear_combination(a: complex, f: VectorFunction, b: complex, g: VectorFunction) -> VectorFunction:
    """a f + b g with the envelope of the larger growth."""
    if (f.dims, f.codim) != (g.dims, g.codim):
        raise ValueError("linear combinations need matching dims and codim")
    env = Envelope(
        M=abs(a) * f.envelope.M + abs(b) * g.envelope.M,
        omega=[max(x, y) for x, y in zip(f.envelope.omega, g.envelope.omega)],
        eta=[min(x, y) for x, y in zip(f.envelope.eta, g.envelope.eta)],
        zeta=[max(x, y) for x, y in zip(f.envelope.zeta, g.envelope.zeta)],
    )
    return VectorFunction(name=f"{a}*{f.name}+{b}*{g.name}", dims=f.dims, codim=f.codim,
                          func=lambda t: a * f(t) + b * g(t), envelope=env)


def matrix_applied(T: np.ndarray, f: VectorFunction) -> VectorFunction:
    """t -> T f(t) for an m x m matrix T."""
    T = np.asarray(T, dtype=complex)
    if T.shape != (f.codim, f.codim):
        raise ValueError(f"operator must be {f.codim}x{f.codim}")
    norm = float(np.max(np.sum(np.abs(T), axis=1))) or 1.0
    env = f.envelope.model_copy(update={"M": f.envelope.M * norm})
    return VectorFunction(name=f"T*{f.name}", dims=f.dims, codim=f.codim,
                          func=lambda t: f(t) @ T.T, envelope=env)
