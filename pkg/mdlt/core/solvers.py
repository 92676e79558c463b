"""
Transform-domain solvers: second-order problems with matrix coefficients,
Volterra inclusions with a scalar kernel, two-dimensional fractional
problems and the initial-condition schedule.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from mdlt.config import settings
from mdlt.core.errors import (
    ConfigurationError, DecayCheckError, DomainError, SingularPencilError,
)
from mdlt.core.functions import TransformFunction, VectorFunction
from mdlt.core.inversion import InversionEngine, inversion_engine
from mdlt.core.operational import operational_calculus
from mdlt.core.registry import pair_registry
from mdlt.models.inversion import ContourConfig, Decay
from mdlt.models.operational import MultiIndex
from mdlt.models.problems import (
    DecayCheckReport, FractionalKind, FractionalProblem2D, InitialConditionSchedule,
    InitialDataLayout, ScheduleEntry, SecondOrderProblem, SolveResult, VolterraProblem,
    tensor_grid,
)
from mdlt.models.transform import FunctionRef, LaplacePoint, QuadratureConfig


_MIN_SINGULAR_VALUE = 1e-10
_DECAY_SLACK = 10.0
_DECAY_GRID = np.logspace(0.0, 3.0, 16)
_RESIDUAL_RAY_DECAY = 20.0
_RESIDUAL_LEVELS = 4

Batch = Callable[[np.ndarray], np.ndarray]


def _solve(P: np.ndarray, rhs: np.ndarray, label: str) -> np.ndarray:
    """Batched P[i] x[i] = rhs[i]; P (N, m, m), rhs (N, m)."""
    if P.shape[-1] == 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = rhs / P[:, :, 0]
        bad = ~np.isfinite(out).all(axis=1)
        if np.any(bad):
            raise SingularPencilError(f"{label}: singular at a contour node", condition=float("inf"))
        return out
    try:
        return np.linalg.solve(P, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as e:
        raise SingularPencilError(f"{label}: singular matrix at a contour node ({e})") from e


def _check_injective(P: np.ndarray, lam: np.ndarray, label: str):
    """Smallest singular value of every P[i] must exceed the injectivity threshold."""
    s = np.linalg.svd(P, compute_uv=False)
    smallest = s[:, -1]
    worst = int(np.argmin(smallest))
    if smallest[worst] < _MIN_SINGULAR_VALUE:
        condition = float(s[worst, 0] / smallest[worst]) if smallest[worst] > 0 else float("inf")
        raise SingularPencilError(
            f"{label}: matrix pencil is singular at lambda={tuple(lam[worst])} "
            f"(smallest singular value {smallest[worst]:.3g})",
            point=tuple(lam[worst]), condition=condition,
        )


def _decay_grid(omega: Sequence[float]) -> np.ndarray:
    axes = [max(w, 0.0) + _DECAY_GRID for w in omega]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1).astype(complex)


class ResolventSolver:
    """
    Resolvent-based solvers for matrix problems in two time variables.

    Features:
    - Second-order problems in both initial-data layouts
    - Volterra inclusions B u = A (a *0 u) + C f with a mild-solution residual
    - Riemann-Liouville and Caputo fractional problems
    - Numerical decay and injectivity checks of resolvents
    - Initial-condition schedules for multi-index problems
    """

    def __init__(self, inverter: InversionEngine = inversion_engine):
        self.inverter = inverter

    # ------------------------------------------------------------------
    # Data
    # ------------------------------------------------------------------

    @staticmethod
    def _closed_form(ref: FunctionRef, dims: int, size: int, role: str):
        pair = pair_registry.build(ref.model_copy(update={"dims": dims}))
        if pair.transform is None:
            raise ConfigurationError(f"{role} {ref.name!r} needs a closed-form transform")
        if pair.transform.codim != size:
            raise ConfigurationError(
                f"{role} {ref.name!r} has {pair.transform.codim} components, the problem has {size}"
            )
        return pair

    def _data_transforms(self, data: Dict[str, FunctionRef], keys: Sequence[str],
                         size: int) -> Dict[str, Batch]:
        """1D data transforms as callables lambda (N,) -> (N, m); missing keys are zero."""
        out = {}
        for key in keys:
            if key in data:
                F = self._closed_form(data[key], 1, size, f"data {key}").transform
                out[key] = (lambda F: (lambda x: F(np.asarray(x)[:, None])))(F)
            else:
                out[key] = lambda x: np.zeros((np.asarray(x).size, size), dtype=complex)
        return out

    @staticmethod
    def _apply(M: np.ndarray, v: np.ndarray) -> np.ndarray:
        return v @ M.T

    def decay_check(self, G: Batch, omega: Sequence[float], eps: float, label: str,
                    strict: Optional[bool] = None) -> DecayCheckReport:
        """
        ||G|| prod |lambda_j|^{1+eps} on a 16 x 16 log-spaced real grid.

        M is fitted on the inner quarter of the grid; the check fails when
        the ratio anywhere exceeds 10 M.
        """
        lam = _decay_grid(omega)
        values = np.max(np.abs(G(lam)), axis=1)
        ratio = values * np.prod(np.abs(lam) ** (1.0 + eps), axis=1)
        inner = np.all(np.abs(lam) - np.asarray([max(w, 0.0) for w in omega]) <= _DECAY_GRID[7] + 1e-9, axis=1)
        fitted = float(np.max(ratio[inner]))
        top = float(np.max(ratio))
        worst = top / fitted if fitted > 0 else (0.0 if top == 0 else float("inf"))
        report = DecayCheckReport(passed=bool(worst <= _DECAY_SLACK), fitted_M=fitted,
                                  worst_ratio=worst, samples=int(lam.shape[0]))
        if not report.passed:
            strict = settings.strict_decay if strict is None else strict
            message = f"{label}: resolvent fails the decay check (ratio {worst:.3g})"
            if strict:
                raise DecayCheckError(message)
            logger.warning(f"{message}; continuing best-effort")
        return report

    def _as_transform(self, name: str, G: Batch, size: int, omega: Sequence[float], eps: float,
                      report: DecayCheckReport) -> TransformFunction:
        decay = Decay(M=max(report.fitted_M, 1e-300), omega=list(omega), eps=[eps] * len(omega))
        return TransformFunction(name=name, dims=len(omega), codim=size, func=G, decay=decay)

    @staticmethod
    def _points(grid, t_grid) -> np.ndarray:
        if t_grid is not None:
            return np.atleast_2d(np.asarray(t_grid, dtype=float))
        return tensor_grid(grid)

    def _invert(self, G: TransformFunction, pts: np.ndarray, cfg: ContourConfig):
        return self.inverter.bromwich_grid(G, pts, cfg.model_copy(update={"check_decay": False}))

    # ------------------------------------------------------------------
    # Second-order problems
    # ------------------------------------------------------------------

    def _second_order_parts(self, prob: SecondOrderProblem):
        m = prob.size
        mats = prob.matrices()
        source = self._closed_form(prob.source, 2, m, "source")
        if prob.layout == InitialDataLayout.STANDARD:
            d = self._data_transforms(prob.data, ("f1", "f2", "f3", "g1", "g2"), m)
        else:
            d = self._data_transforms(prob.data, ("f1", "f2", "g1", "g2", "g3"), m)

        def pencil(lam: np.ndarray) -> np.ndarray:
            l1, l2 = lam[:, 0, None, None], lam[:, 1, None, None]
            return (l1 ** 2 * mats["A"] + l1 * l2 * mats["B"] + l2 ** 2 * mats["C"]
                    + l1 * mats["D"] + l2 * mats["E"] + mats["F"])

        def numerator(lam: np.ndarray) -> np.ndarray:
            l1, l2 = lam[:, 0], lam[:, 1]
            c1, c2 = l1[:, None], l2[:, None]
            f1, g1 = d["f1"](l1), d["g1"](l2)
            rhs = source.transform(lam)
            if prob.layout == InitialDataLayout.STANDARD:
                rhs = rhs + self._apply(mats["A"], c1 * g1 + d["g2"](l2))
                rhs = rhs + self._apply(mats["B"], c2 * g1 + d["f2"](l1))
                rhs = rhs + self._apply(mats["C"], c2 * f1 + d["f3"](l1))
            else:
                rhs = rhs + self._apply(mats["A"], c1 * g1 + d["g3"](l2))
                rhs = rhs + self._apply(mats["B"], c1 * f1 + d["g2"](l2))
                rhs = rhs + self._apply(mats["C"], c2 * f1 + d["f2"](l1))
            return rhs + self._apply(mats["D"], g1) + self._apply(mats["E"], f1)

        def resolvent(lam: np.ndarray) -> np.ndarray:
            lam = np.asarray(lam, dtype=complex)
            return _solve(pencil(lam), numerator(lam), "second-order pencil")

        return pencil, resolvent, source.function, mats

    def build_resolvent_second_order(self, prob: SecondOrderProblem, p: LaplacePoint) -> np.ndarray:
        """
        G = P(lambda)^{-1} {L f + A[lambda_1 Lg1 + Lg2] + B[lambda_2 Lg1 + Lf2]
        + C[lambda_2 Lf1 + Lf3] + D Lg1 + E Lf1} (standard layout).
        """
        if p.dims != 2:
            raise DomainError("second-order resolvents live on two variables")
        pencil, resolvent, _, _ = self._second_order_parts(prob)
        lam = p.values[None, :]
        _check_injective(pencil(lam), lam, "second-order pencil")
        return resolvent(lam)[0]

    def _finite_difference_residual(self, prob: SecondOrderProblem, pts: np.ndarray, G: TransformFunction,
                                    source: VectorFunction, mats: Dict[str, np.ndarray],
                                    cfg: ContourConfig) -> np.ndarray:
        h = prob.fd_step
        usable = np.all(pts > h, axis=1)
        residuals = np.full(pts.shape[0], np.nan)
        if not np.any(usable):
            logger.warning(f"fd_step={h} leaves no grid point for the residual")
            return residuals
        offsets = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]
        base = pts[usable]
        stencil = np.concatenate([base + h * np.array(o) for o in offsets])
        u = self._invert(G, stencil, cfg).values.reshape(len(offsets), base.shape[0], -1)
        at = {o: u[i] for i, o in enumerate(offsets)}

        u0 = at[(0, 0)]
        uxx = (at[(1, 0)] - 2.0 * u0 + at[(-1, 0)]) / h ** 2
        uyy = (at[(0, 1)] - 2.0 * u0 + at[(0, -1)]) / h ** 2
        uxy = (at[(1, 1)] - at[(1, -1)] - at[(-1, 1)] + at[(-1, -1)]) / (4.0 * h ** 2)
        ux = (at[(1, 0)] - at[(-1, 0)]) / (2.0 * h)
        uy = (at[(0, 1)] - at[(0, -1)]) / (2.0 * h)
        lhs = sum(self._apply(mats[k], v) for k, v in
                  (("A", uxx), ("B", uxy), ("C", uyy), ("D", ux), ("E", uy), ("F", u0)))
        residuals[usable] = np.max(np.abs(lhs - source(base)), axis=1)
        return residuals

    def solve_second_order(self, prob: SecondOrderProblem, t_grid=None,
                           inv_cfg: Optional[ContourConfig] = None) -> SolveResult:
        """u = Bromwich inverse of G on the grid, with a finite-difference PDE residual."""
        cfg = inv_cfg or prob.contour
        pts = self._points(prob.grid, t_grid)
        pencil, resolvent, source, mats = self._second_order_parts(prob)
        logger.info(f"Solving second-order problem (m={prob.size}) on {len(pts)} points")

        lam = _decay_grid(prob.omega)
        _check_injective(pencil(lam), lam, "second-order pencil")
        report = self.decay_check(resolvent, prob.omega, prob.decay_eps, "second-order resolvent",
                                  prob.strict_decay)
        G = self._as_transform("second_order_resolvent", resolvent, prob.size, prob.omega,
                               prob.decay_eps, report)
        values = self._invert(G, pts, cfg).values
        residuals = self._finite_difference_residual(prob, pts, G, source, mats, cfg)
        finite = residuals[np.isfinite(residuals)]
        return SolveResult(points=pts, values=values, residuals=residuals,
                           residual_max=float(finite.max()) if finite.size else float("nan"),
                           decay_check=report, best_effort=not report.passed)

    # ------------------------------------------------------------------
    # Volterra inclusions
    # ------------------------------------------------------------------

    def volterra_resolvent(self, prob: VolterraProblem) -> Tuple[Batch, Callable, VectorFunction, VectorFunction]:
        """(B - (L a) A)^{-1} C L f as a batch callable, plus its pencil and the time-domain data."""
        m = prob.size
        n = len(prob.grid)
        mats = prob.matrices()
        kernel = self._closed_form(prob.data["kernel"], n, 1, "kernel")
        source = self._closed_form(prob.source, n, m, "source")

        def pencil(lam: np.ndarray) -> np.ndarray:
            La = kernel.transform(lam)[:, 0]
            return mats["B"][None, :, :] - La[:, None, None] * mats["A"][None, :, :]

        def resolvent(lam: np.ndarray) -> np.ndarray:
            lam = np.asarray(lam, dtype=complex)
            return _solve(pencil(lam), self._apply(mats["C"], source.transform(lam)), "Volterra pencil")

        return resolvent, pencil, kernel.function, source.function

    def solve_volterra(self, prob: VolterraProblem, t_grid=None,
                       inv_cfg: Optional[ContourConfig] = None) -> SolveResult:
        """
        u = Bromwich inverse of (B - (L a) A)^{-1} C L f, with the mild residual
        ||B u - A (a *0 u) - C f|| on a subsample of the grid.
        """
        cfg = inv_cfg or prob.contour
        pts = self._points(prob.grid, t_grid)
        mats = prob.matrices()
        resolvent, pencil, kernel, source = self.volterra_resolvent(prob)
        eps = min(prob.eps)
        logger.info(f"Solving Volterra problem (m={prob.size}) on {len(pts)} points")

        lam = _decay_grid(prob.omega)
        _check_injective(pencil(lam), lam, "Volterra pencil")
        report = self.decay_check(resolvent, prob.omega, eps, "Volterra resolvent", prob.strict_decay)
        U = self._as_transform("volterra_resolvent", resolvent, prob.size, prob.omega, eps, report)
        values = self._invert(U, pts, cfg).values

        residual_cfg = cfg.model_copy(update={"check_decay": False,
                                              "ray_decay": min(cfg.ray_decay, _RESIDUAL_RAY_DECAY)})
        u = self.inverter.bromwich_function(U, residual_cfg, t_max=list(pts.max(axis=0)),
                                            levels=_RESIDUAL_LEVELS)
        picks = np.unique(np.linspace(0, len(pts) - 1, min(prob.residual_points, len(pts))).round().astype(int))
        quad = QuadratureConfig(adaptive=False)
        residuals = np.full(len(pts), np.nan)
        for i in picks:
            conv = operational_calculus.faltung_convolve(kernel, u, pts[i], quad)
            mild = (self._apply(mats["B"], values[i][None, :]) - self._apply(mats["A"], conv[None, :])
                    - self._apply(mats["C"], source(pts[i][None, :])))
            residuals[i] = float(np.max(np.abs(mild)))
            logger.debug(f"mild residual at {tuple(pts[i])}: {residuals[i]:.3e}")
        return SolveResult(points=pts, values=values, residuals=residuals,
                           residual_max=float(np.nanmax(residuals)),
                           decay_check=report, best_effort=not report.passed)

    # ------------------------------------------------------------------
    # Fractional problems
    # ------------------------------------------------------------------

    def fractional_resolvent(self, prob: FractionalProblem2D) -> Tuple[Batch, Callable]:
        """Transform of the solution of D^{alpha1} D^{alpha2} u = A u + f with its pencil."""
        m = prob.size
        A = prob.matrix()
        source = self._closed_form(prob.source, 2, m, "source")
        f_traces = [self._closed_form(r, 1, m, f"f_{k}").transform for k, r in enumerate(prob.data.get("f", []))]
        h_traces = [self._closed_form(r, 1, m, f"h_{k}").transform for k, r in enumerate(prob.data.get("h", []))]
        a1, a2 = prob.alpha1, prob.alpha2
        caputo = prob.kind == FractionalKind.CAPUTO

        def pencil(lam: np.ndarray) -> np.ndarray:
            power = lam[:, 0] ** a1 * lam[:, 1] ** a2
            return power[:, None, None] * np.eye(m)[None, :, :] - A[None, :, :]

        def resolvent(lam: np.ndarray) -> np.ndarray:
            lam = np.asarray(lam, dtype=complex)
            l1, l2 = lam[:, 0], lam[:, 1]
            rhs = source.transform(lam)
            for k, F in enumerate(f_traces):
                power = (a2 - k - 1.0) if caputo else (prob.m2 - k - 1.0)
                rhs = rhs + (l1 ** a1 * l2 ** power)[:, None] * F(l1[:, None])
            for k, F in enumerate(h_traces):
                power = (a1 - 1.0 - k) if caputo else (prob.m1 - 1.0 - k)
                rhs = rhs + (l1 ** power * l2 ** a2)[:, None] * F(l2[:, None])
            return _solve(pencil(lam), rhs, "fractional resolvent")

        return resolvent, pencil

    @staticmethod
    def fractional_abscissa(prob: FractionalProblem2D) -> List[float]:
        """Common shift s with s^{alpha1 + alpha2} = 2 rho(A), unless omega is given."""
        if prob.omega is not None:
            return list(prob.omega)
        total = prob.alpha1 + prob.alpha2
        radius = float(np.max(np.abs(np.linalg.eigvals(prob.matrix()))))
        if total == 0 or radius == 0:
            return [0.0, 0.0]
        s = (2.0 * radius) ** (1.0 / total)
        return [s, s]

    def solve_fractional_2d(self, prob: FractionalProblem2D, t_grid=None,
                            inv_cfg: Optional[ContourConfig] = None) -> SolveResult:
        """u = Bromwich inverse of the fractional resolvent (principal branch powers)."""
        cfg = inv_cfg or prob.contour
        pts = self._points(prob.grid, t_grid)
        resolvent, pencil = self.fractional_resolvent(prob)
        logger.info(f"Solving {prob.kind.value} problem alpha=({prob.alpha1}, {prob.alpha2}) "
                    f"on {len(pts)} points")

        omega = self.fractional_abscissa(prob)
        lam = _decay_grid(omega)
        _check_injective(pencil(lam), lam, "fractional pencil")
        report = self.decay_check(resolvent, omega, prob.decay_eps, "fractional resolvent",
                                  prob.strict_decay)
        U = self._as_transform("fractional_resolvent", resolvent, prob.size, omega,
                               prob.decay_eps, report)
        values = self._invert(U, pts, cfg).values
        return SolveResult(points=pts, values=values, residuals=np.full(len(pts), np.nan),
                           residual_max=float("nan"), decay_check=report,
                           best_effort=not report.passed)

    # ------------------------------------------------------------------
    # Initial-condition schedules
    # ------------------------------------------------------------------

    @staticmethod
    def _ranks(dims: int, axis_order: Optional[Sequence[int]]) -> List[int]:
        if axis_order is None:
            return list(range(dims, 0, -1))
        ranks = [int(r) for r in axis_order]
        if sorted(ranks) != list(range(1, dims + 1)):
            raise DomainError(f"axis order {ranks} is not a permutation of 1..{dims}")
        return ranks

    def initial_condition_schedule(self, alpha: MultiIndex,
                                   axis_order: Optional[Sequence[int]] = None) -> InitialConditionSchedule:
        """
        Initial traces required by the multi-index alpha.

        axis_order[j] is the elimination step of variable j+1 (default: the
        last variable first). At each step with alpha_j > 0 the derivative
        index on axis j runs over 0..alpha_j-1, already eliminated axes are
        reset to 0 and the remaining ones keep alpha.
        """
        orders = alpha.as_tuple()
        if alpha.order == 0:
            raise DomainError("the multi-index must have a positive component")
        ranks = self._ranks(len(orders), axis_order)
        current = list(orders)
        entries = []
        for axis in sorted(range(len(orders)), key=lambda j: ranks[j]):
            for index in range(orders[axis]):
                derivative = list(current)
                derivative[axis] = index
                entries.append(ScheduleEntry(derivative=derivative, zeroed_axis=axis + 1))
            current[axis] = 0
        return InitialConditionSchedule(entries=entries)

    def multi_index_schedule(self, alphas: Sequence[MultiIndex],
                             axis_order: Optional[Sequence[int]] = None) -> InitialConditionSchedule:
        """Union of the schedules of several multi-indices (duplicates collapsed)."""
        if not alphas:
            raise DomainError("at least one multi-index is required")
        if len({len(a.v) for a in alphas}) != 1:
            raise DomainError("multi-indices must share one length")
        seen = set()
        entries = []
        for alpha in alphas:
            if alpha.order == 0:
                continue
            for entry in self.initial_condition_schedule(alpha, axis_order).entries:
                key = (tuple(entry.derivative), entry.zeroed_axis)
                if key not in seen:
                    seen.add(key)
                    entries.append(entry)
        if not entries:
            raise DomainError("the multi-indices must have a positive component")
        return InitialConditionSchedule(entries=entries)


# Global solver instance
resolvent_solver = ResolventSolver()
