"""
Inversion of n-dimensional Laplace transforms.

Post-Widder reconstruction from high-order mixed partials, Bromwich contour
quadrature on vertical lines or sector contours, Tauberian limits and the
uniqueness check.
"""

import itertools
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import special

from mdlt.core.errors import (
    ConfigurationError, DecayViolationError, DomainError, OverflowGuardError,
)
from mdlt.core.functions import TransformFunction, VectorFunction
from mdlt.core.operational import OperationalCalculus, operational_calculus
from mdlt.core.quadrature import concatenate_rules, contract_points, gl_panels, tanh_sinh, taper
from mdlt.core.transform_core import transform_engine
from mdlt.models.inversion import (
    ContourConfig, ContourShape, DerivativeSource, InversionResult, PostWidderConfig,
    TauberianResult, UniquenessReport,
)
from mdlt.models.operational import MultiIndex
from mdlt.models.transform import Envelope, LaplacePoint, QuadratureConfig


_LOG_OVERFLOW = 700.0
_BUCKET_RATIO = 4.0
_CLUSTER_LEVEL = 4
_DECAY_SLACK = 10.0
_CACHE_NODES = 16_000_000
_DEFAULT_INITIAL_PROBE = (10.0, 20.0, 40.0, 80.0, 160.0, 320.0)
_DEFAULT_FINAL_PROBE = (0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125)


def _norm(value) -> float:
    value = np.asarray(value)
    return float(np.max(np.abs(value))) if value.size else 0.0


def _as_points(points, dims: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != dims:
        raise DomainError(f"expected points with {dims} coordinates, got {pts.shape[1]}")
    if np.any(~np.isfinite(pts)) or np.any(pts <= 0):
        raise DomainError("inversion needs t_j > 0 in every coordinate")
    return pts


@dataclass(frozen=True)
class AxisContour:
    """Quadrature on one contour: nodes lambda_k and weights including d lambda / (2 pi i).

    tail(t, eps) bounds the dropped part of the contour for |F| <= |lambda|^{-1-eps}.
    """
    nodes: np.ndarray
    weights: np.ndarray
    tail: Callable[[np.ndarray, float], np.ndarray]

    @property
    def size(self) -> int:
        return self.nodes.size

    def kernel(self, t: np.ndarray) -> np.ndarray:
        """K[p, k] = w_k exp(lambda_k t_p)."""
        t = np.asarray(t, dtype=float)
        with np.errstate(under="ignore"):
            return self.weights[None, :] * np.exp(np.outer(t, self.nodes))

    def mass(self, t: np.ndarray, eps: float) -> np.ndarray:
        """sum_k |w_k exp(lambda_k t)| |lambda_k|^{-1-eps} per t."""
        return np.abs(self.kernel(t)) @ (np.abs(self.nodes) ** (-1.0 - eps))


def vertical_contour(c: float, half_length: float, order: int, t_max: float) -> AxisContour:
    """
    Line Re lambda = c, |Im lambda| <= L, with a smooth taper on [L/2, L].

    The two panels touching Im lambda = 0 use tanh-sinh rules, so nodes
    cluster at the real axis; the rest are Gauss-Legendre panels.
    """
    width = min(2.0, 2.0 * math.pi / t_max)
    panels = max(8, int(math.ceil(2.0 * half_length / width)))
    panels += panels % 2
    breaks = np.linspace(-half_length, half_length, panels + 1)
    mid = panels // 2
    rule = concatenate_rules([
        gl_panels(breaks[:mid], order),
        tanh_sinh(breaks[mid - 1], 0.0, _CLUSTER_LEVEL),
        tanh_sinh(0.0, breaks[mid + 1], _CLUSTER_LEVEL),
        gl_panels(breaks[mid + 1:], order),
    ])
    weights = rule.weights * taper(rule.nodes / half_length) / (2.0 * math.pi)

    def tail(t, eps):
        if eps <= 0:
            return np.full(np.shape(t), np.inf)
        return np.exp(c * np.asarray(t)) * (0.5 * half_length) ** (-eps) / (math.pi * eps)

    return AxisContour(c + 1j * rule.nodes, weights.astype(complex), tail)


def sector_contour(sigma: float, radius: float, gamma: float, rho_max: float,
                   order: int, t_max: float) -> AxisContour:
    """
    sigma + (ray from infinity at angle -theta, arc of radius r, ray to
    infinity at angle theta), theta = pi/2 + gamma, rays cut at rho_max.
    """
    theta = 0.5 * math.pi + gamma
    width = min(max(radius, 1.0), 4.0 * math.pi / t_max)
    ray_panels = max(2, int(math.ceil((rho_max - radius) / width)))
    ray = gl_panels(np.linspace(radius, rho_max, ray_panels + 1), order)
    arc_panels = max(4, int(math.ceil(2.0 * theta * radius * t_max / math.pi)) + 2)
    arc = gl_panels(np.linspace(-theta, theta, arc_panels + 1), order)

    up, down = np.exp(1j * theta), np.exp(-1j * theta)
    nodes = np.concatenate([
        sigma + ray.nodes[::-1] * down,
        sigma + radius * np.exp(1j * arc.nodes),
        sigma + ray.nodes * up,
    ])
    weights = np.concatenate([
        -down * ray.weights[::-1],
        1j * radius * np.exp(1j * arc.nodes) * arc.weights,
        up * ray.weights,
    ]) / (2j * math.pi)
    slope = math.sin(gamma)

    def tail(t, eps):
        t = np.asarray(t, dtype=float)
        return (np.exp((sigma - rho_max * slope) * t) * rho_max ** (-1.0 - eps)
                / (math.pi * slope * t))

    return AxisContour(nodes, weights, tail)


def _contract_tensor(values: np.ndarray, kernels: Sequence[np.ndarray]) -> np.ndarray:
    """out[a_1..a_n, :] = sum_k prod_j kernels[j][a_j, k_j] values[k, :]."""
    out = values
    for j, kernel in enumerate(kernels):
        out = np.moveaxis(np.tensordot(kernel, out, axes=(1, j)), 0, j)
    return out


def _neville_limit(h: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, List[float]]:
    """
    Polynomial extrapolation to h = 0 using the trailing points.

    Returns the estimate from all points and the increments between
    estimates built from 2, 3, ... trailing points.
    """
    estimates = []
    count = h.size
    for size in range(2, count + 1):
        xs = h[count - size:]
        p = [v.copy() for v in values[count - size:]]
        for m in range(1, size):
            for i in range(size - m):
                p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i])
        estimates.append(p[0])
    increments = [_norm(b - a) for a, b in zip(estimates[:-1], estimates[1:])]
    return estimates[-1], increments


class InversionEngine:
    """
    Engine for transform inversion.

    Features:
    - Post-Widder formula for f and for the antiderivative G, in log space
    - Mixed partials from analytic callbacks or the moment route through f
    - Bromwich quadrature on tapered vertical lines or sector contours
    - Tensor-grid Bromwich functions for time-domain post-processing
    - Tauberian initial/final values and a uniqueness oracle
    """

    def __init__(self, calculus: OperationalCalculus = operational_calculus):
        self.calculus = calculus

    # ------------------------------------------------------------------
    # Post-Widder
    # ------------------------------------------------------------------

    @staticmethod
    def _post_widder_scale(orders: Sequence[int], t: np.ndarray) -> Tuple[float, float, np.ndarray]:
        """Sign, log of prod_j (k_j/t_j)^{k_j+1} / k_j! and the evaluation point k/t."""
        k = np.asarray(orders, dtype=float)
        lam = k / t
        if np.any(lam > 1e300):
            raise OverflowGuardError(f"k/t = {lam.max():.3g} leaves the floating point range")
        log_scale = float(np.sum((k + 1.0) * np.log(lam) - special.gammaln(k + 1.0)))
        sign = -1.0 if int(np.sum(orders)) % 2 else 1.0
        return sign, log_scale, lam

    @staticmethod
    def _apply_scale(sign: float, log_scale: float, partial: np.ndarray) -> np.ndarray:
        partial = np.asarray(partial, dtype=complex)
        if not np.all(np.isfinite(partial)):
            raise OverflowGuardError("mixed partial of F overflowed")
        size = _norm(partial)
        if size > 0 and log_scale + math.log(size) > _LOG_OVERFLOW:
            raise OverflowGuardError(
                f"Post-Widder scaling exp({log_scale:.1f}) times |partial| {size:.3g} overflows"
            )
        return sign * np.exp(log_scale) * partial

    def _moment_config(self, cfg: PostWidderConfig) -> QuadratureConfig:
        return QuadratureConfig(rel_tol=cfg.moment_rel_tol)

    def _require_source(self, F: TransformFunction) -> VectorFunction:
        if F.source is None:
            raise ConfigurationError(
                f"{F.name}: the moment route needs the time-domain function behind F"
            )
        return F.source

    def _partial(self, F: TransformFunction, orders: Sequence[int], lam: np.ndarray,
                 cfg: PostWidderConfig) -> np.ndarray:
        if cfg.derivative_source == DerivativeSource.ANALYTIC_CALLBACK:
            if not F.has_partials():
                raise ConfigurationError(
                    f"{F.name} has no analytic partials; use derivative_source=moment_quadrature"
                )
            return F.partial(orders, lam[None, :])[0]
        source = self._require_source(F)
        return self.calculus.transform_derivative(
            source, MultiIndex(v=list(orders)), LaplacePoint.of(*lam), self._moment_config(cfg))

    def _flag_low_order(self, orders: Sequence[int]) -> bool:
        if min(orders) < 4:
            logger.warning(f"Post-Widder order {min(orders)} < 4: expect poor accuracy")
            return True
        return False

    def post_widder_invert(self, F: TransformFunction, t: Sequence[float],
                           cfg: Optional[PostWidderConfig] = None) -> np.ndarray:
        """
        f(t) ~ prod_j [(-1)^{k_j} / k_j! (k_j/t_j)^{k_j+1}] d^k F(k_1/t_1, ..., k_n/t_n).
        """
        cfg = cfg or PostWidderConfig()
        point = _as_points(t, F.dims)[0]
        orders = cfg.orders(F.dims)
        self._flag_low_order(orders)
        sign, log_scale, lam = self._post_widder_scale(orders, point)
        return self._apply_scale(sign, log_scale, self._partial(F, orders, lam, cfg))

    def _leibniz_partial(self, F: TransformFunction, orders: Sequence[int], lam: np.ndarray,
                         cfg: PostWidderConfig) -> np.ndarray:
        """d^k [F(lambda) / (lambda_1 ... lambda_n)] by the Leibniz rule."""
        if cfg.derivative_source == DerivativeSource.MOMENT_QUADRATURE:
            qcfg = self._moment_config(cfg)
            primitive = transform_engine.antiderivative_function(self._require_source(F), qcfg)
            return self.calculus.transform_derivative(
                primitive, MultiIndex(v=list(orders)), LaplacePoint.of(*lam), qcfg)
        if not F.has_partials():
            raise ConfigurationError(
                f"{F.name} has no analytic partials; use derivative_source=moment_quadrature"
            )

        # d^r (1/lambda) = (-1)^r r! lambda^{-1-r}; C(k, r) r! = k! / (k - r)!
        def weight(k: int, r: int, x: complex) -> complex:
            log_ratio = special.gammaln(k + 1.0) - special.gammaln(k - r + 1.0)
            return (-1) ** r * math.exp(log_ratio) * x ** (-1.0 - r)

        if F.factor_partials is not None:
            prod = 1.0 + 0.0j
            for j, (fp, k) in enumerate(zip(F.factor_partials, orders)):
                x = lam[j]
                prod *= sum(weight(k, r, x) * complex(np.asarray(fp(k - r, np.array([x])))[0])
                            for r in range(k + 1))
            return prod * F.coefficient_vector()

        total = np.zeros(F.codim, dtype=complex)
        for rs in itertools.product(*[range(k + 1) for k in orders]):
            coeff = np.prod([weight(k, r, x) for k, r, x in zip(orders, rs, lam)])
            rest = [k - r for k, r in zip(orders, rs)]
            total += coeff * F.partial(rest, lam[None, :])[0]
        return total

    def post_widder_invert_antiderivative(self, F: TransformFunction, t: Sequence[float],
                                          cfg: Optional[PostWidderConfig] = None) -> np.ndarray:
        """Post-Widder for G, whose transform is F(lambda) / (lambda_1 ... lambda_n)."""
        cfg = cfg or PostWidderConfig()
        point = _as_points(t, F.dims)[0]
        orders = cfg.orders(F.dims)
        self._flag_low_order(orders)
        sign, log_scale, lam = self._post_widder_scale(orders, point)
        return self._apply_scale(sign, log_scale, self._leibniz_partial(F, orders, lam, cfg))

    def post_widder_grid(self, F: TransformFunction, points, cfg: Optional[PostWidderConfig] = None,
                         antiderivative: bool = False) -> InversionResult:
        """
        Post-Widder at a batch of points.

        The error estimate is |f_k - f_{k/2}|, the leading O(1/k) error at order k.
        """
        cfg = cfg or PostWidderConfig()
        pts = _as_points(points, F.dims)
        orders = cfg.orders(F.dims)
        invert = self.post_widder_invert_antiderivative if antiderivative else self.post_widder_invert
        warning = self._flag_low_order(orders)
        half = cfg.model_copy(update={"k": [max(1, k // 2) for k in orders]})

        values, errors = [], []
        for t in pts:
            value = invert(F, t, cfg)
            values.append(value)
            if min(orders) >= 2:
                errors.append(_norm(value - invert(F, t, half)))
            else:
                errors.append(float("nan"))
        logger.info(f"Post-Widder inversion of {F.name} at {len(pts)} points (k={orders})")
        return InversionResult(points=pts, values=np.array(values), error_estimate=np.array(errors),
                               accuracy_warning=warning, method="post_widder")

    # ------------------------------------------------------------------
    # Bromwich contours
    # ------------------------------------------------------------------

    def _offsets(self, F: TransformFunction, cfg: ContourConfig, lo: np.ndarray) -> List[float]:
        if cfg.offsets is None:
            return [w + 1.0 + 1.0 / t for w, t in zip(F.decay.omega, lo)]
        offsets = cfg.per_axis(cfg.offsets, F.dims)
        bad = [j + 1 for j, (c, w) in enumerate(zip(offsets, F.decay.omega)) if not c > w]
        if bad:
            raise ConfigurationError(f"contour offsets must exceed omega_j on axes {bad}")
        return offsets

    def axis_contours(self, F: TransformFunction, cfg: ContourConfig,
                      lo: Sequence[float], hi: Sequence[float]) -> List[AxisContour]:
        """Per-axis contours adapted to t_j in [lo_j, hi_j]."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        offsets = self._offsets(F, cfg, lo)
        if cfg.shape == ContourShape.VERTICAL_LINE:
            lengths = cfg.per_axis(cfg.half_length, F.dims)
            return [vertical_contour(c, L, cfg.nodes, t) for c, L, t in zip(offsets, lengths, hi)]

        angles = cfg.per_axis(cfg.angle, F.dims)
        if F.sector_angle is not None and max(angles) > F.sector_angle:
            logger.debug(f"{F.name}: sector angle clamped to {F.sector_angle:.3f}")
            angles = [min(a, F.sector_angle) for a in angles]
        contours = []
        for j in range(F.dims):
            sigma = max(F.decay.omega[j], 0.0)
            radius = max(offsets[j] - sigma, 1.0 / lo[j])
            rho_max = radius + cfg.ray_decay / (lo[j] * math.sin(angles[j]))
            contours.append(sector_contour(sigma, radius, angles[j], rho_max, cfg.nodes, hi[j]))
        return contours

    def check_decay(self, F: TransformFunction, offsets: Sequence[float],
                    half_length: float = 200.0, raise_on_violation: bool = True,
                    samples: int = 4096) -> float:
        """
        Largest ||F|| / (M prod |lambda_j|^{-1-eps_j}) on the lines Re lambda_j = c_j.

        Raises DecayViolationError above 10x unless raise_on_violation is off.
        """
        heights = [0.0]
        y = 1.0
        while y < half_length:
            heights += [y, -y]
            y *= 4.0
        heights += [half_length, -half_length]
        axes = [c + 1j * np.asarray(heights) for c in offsets]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        if pts.shape[0] > samples:
            pick = np.random.default_rng(0).choice(pts.shape[0], size=samples, replace=False)
            pts = pts[pick]

        values = np.max(np.abs(F(pts)), axis=1)
        bound = F.decay.M * np.prod(np.abs(pts) ** (-1.0 - np.asarray(F.decay.eps)), axis=1)
        ratio = float(np.max(values / bound))
        if ratio > _DECAY_SLACK:
            message = f"{F.name}: |F| exceeds its declared decay by {ratio:.3g}x"
            if raise_on_violation:
                raise DecayViolationError(message, ratio=ratio)
            logger.warning(message)
        return ratio

    def _error_bound(self, F: TransformFunction, contours: List[AxisContour], pts: np.ndarray) -> np.ndarray:
        """Declared-decay bound of the contour truncation, per point."""
        eps = F.decay.eps
        masses = [c.mass(pts[:, j], eps[j]) for j, c in enumerate(contours)]
        tails = [c.tail(pts[:, j], eps[j]) for j, c in enumerate(contours)]
        total = np.zeros(pts.shape[0])
        for j in range(F.dims):
            others = np.prod([masses[i] for i in range(F.dims) if i != j], axis=0) if F.dims > 1 else 1.0
            total = total + tails[j] * others
        return F.decay.M * total

    def _branch_check(self, F: TransformFunction, contours: List[AxisContour]):
        for j, c in enumerate(contours):
            if np.any((np.abs(c.nodes.imag) < 1e-14) & (c.nodes.real < 0)):
                logger.warning(f"{F.name}: contour {j + 1} touches the negative real axis")

    def bromwich_grid(self, F: TransformFunction, points,
                      cfg: Optional[ContourConfig] = None) -> InversionResult:
        """(2 pi i)^{-n} integral over Gamma_1 x ... x Gamma_n of e^{lambda.t} F(lambda) at each point."""
        cfg = cfg or ContourConfig()
        pts = _as_points(points, F.dims)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        contours = self.axis_contours(F, cfg, lo, hi)
        self._branch_check(F, contours)
        if cfg.check_decay:
            self.check_decay(F, self._offsets(F, cfg, lo), float(max(cfg.per_axis(cfg.half_length, F.dims))))

        kernels = [c.kernel(pts[:, j]) for j, c in enumerate(contours)]
        values = F.contract_kernels([c.nodes for c in contours], kernels)
        errors = self._error_bound(F, contours, pts)
        warning = cfg.shape == ContourShape.VERTICAL_LINE and min(F.decay.eps) == 0
        if warning:
            logger.warning(f"{F.name}: decay exponent 0, tapered line integral without an error bound")
        logger.info(f"Bromwich inversion of {F.name} at {len(pts)} points "
                    f"({cfg.shape.value}, {'x'.join(str(c.size) for c in contours)} nodes)")
        return InversionResult(points=pts, values=values, error_estimate=errors,
                               accuracy_warning=bool(warning), method="bromwich")

    def bromwich_invert(self, F: TransformFunction, t: Sequence[float],
                        cfg: Optional[ContourConfig] = None) -> np.ndarray:
        """Bromwich inversion at one point t."""
        return self.bromwich_grid(F, [list(t)], cfg).values[0]

    def bromwich_function(self, F: TransformFunction, cfg: Optional[ContourConfig] = None,
                          t_max: Union[float, Sequence[float]] = 1.0, levels: int = 4) -> VectorFunction:
        """
        The inverse of F as a VectorFunction.

        Each axis is split into scale bands [t_max 4^{-b-1}, t_max 4^{-b}]
        with a contour per band; t below t_max 4^{-levels} is evaluated at
        that floor. Tensor grids are evaluated by per-axis contractions.
        """
        cfg = cfg or ContourConfig()
        n = F.dims
        top = np.asarray(t_max if isinstance(t_max, (list, tuple, np.ndarray)) else [t_max] * n, dtype=float)
        floor = top * _BUCKET_RATIO ** (-levels)
        if cfg.check_decay:
            self.check_decay(F, self._offsets(F, cfg, floor),
                             float(max(cfg.per_axis(cfg.half_length, n))))
        contour_cache = {}
        grid_cache: "OrderedDict[tuple, np.ndarray]" = OrderedDict()

        def band(j: int, t: np.ndarray) -> np.ndarray:
            ratio = top[j] / np.maximum(t, floor[j])
            return np.minimum(np.floor(np.log(ratio) / math.log(_BUCKET_RATIO) + 1e-12), levels - 1).astype(int)

        def contour(j: int, b: int) -> AxisContour:
            key = (j, b)
            if key not in contour_cache:
                hi = top[j] * _BUCKET_RATIO ** (-b)
                lo_j = hi / _BUCKET_RATIO
                lo = [lo_j if i == j else 1.0 for i in range(n)]
                his = [hi if i == j else 1.0 for i in range(n)]
                contour_cache[key] = self.axis_contours(F, cfg, lo, his)[j]
            return contour_cache[key]

        def values_on(bands: tuple) -> np.ndarray:
            if bands in grid_cache:
                grid_cache.move_to_end(bands)
                return grid_cache[bands]
            grid = F.on_grid([contour(j, b).nodes for j, b in enumerate(bands)])
            grid_cache[bands] = grid
            while sum(v.size for v in grid_cache.values()) > _CACHE_NODES and len(grid_cache) > 1:
                grid_cache.popitem(last=False)
            return grid

        def on_axes(axes: Sequence[np.ndarray]) -> np.ndarray:
            axes = [np.maximum(np.asarray(a, dtype=float), f) for a, f in zip(axes, floor)]
            out = np.zeros(tuple(a.size for a in axes) + (F.codim,), dtype=complex)
            labels = [band(j, a) for j, a in enumerate(axes)]
            for bands in itertools.product(*[np.unique(l) for l in labels]):
                index = [np.nonzero(l == b)[0] for l, b in zip(labels, bands)]
                cs = [contour(j, int(b)) for j, b in enumerate(bands)]
                kernels = [c.kernel(a[i]) for c, a, i in zip(cs, axes, index)]
                if F.separable:
                    block = self._separable_block(F, cs, kernels)
                else:
                    block = _contract_tensor(values_on(tuple(int(b) for b in bands)), kernels)
                out[np.ix_(*index)] = block
            return out

        def at_points(pts: np.ndarray) -> np.ndarray:
            pts = np.maximum(np.asarray(pts, dtype=float), floor[None, :])
            out = np.zeros((pts.shape[0], F.codim), dtype=complex)
            labels = np.stack([band(j, pts[:, j]) for j in range(n)], axis=1)
            for bands in np.unique(labels, axis=0):
                rows = np.nonzero(np.all(labels == bands, axis=1))[0]
                cs = [contour(j, int(b)) for j, b in enumerate(bands)]
                kernels = [c.kernel(pts[rows, j]) for j, c in enumerate(cs)]
                if F.separable:
                    out[rows] = F.contract_kernels([c.nodes for c in cs], kernels)
                else:
                    out[rows] = contract_points(values_on(tuple(int(b) for b in bands)), kernels)
            return out

        envelope = Envelope(M=F.decay.M, omega=[max(w, 0.0) for w in F.decay.omega],
                            eta=[0.0] * n, zeta=list(F.decay.eps))
        return VectorFunction(name=f"inverse({F.name})", dims=n, codim=F.codim,
                              func=at_points, grid_func=on_axes, envelope=envelope)

    @staticmethod
    def _separable_block(F: TransformFunction, contours: List[AxisContour],
                         kernels: List[np.ndarray]) -> np.ndarray:
        columns = [k @ np.asarray(f(c.nodes)) for f, c, k in zip(F.factors, contours, kernels)]
        out = columns[0]
        for col in columns[1:]:
            out = np.multiply.outer(out, col)
        return np.multiply.outer(out, F.coefficient_vector())

    # ------------------------------------------------------------------
    # Tauberian limits and uniqueness
    # ------------------------------------------------------------------

    def _diagonal(self, F: TransformFunction, probe: Sequence[float]) -> np.ndarray:
        x = np.asarray(probe, dtype=float)
        lam = np.repeat(x[:, None], F.dims, axis=1).astype(complex)
        return F(lam) * (x ** F.dims)[:, None]

    @staticmethod
    def _tauberian(h: np.ndarray, values: np.ndarray, label: str) -> TauberianResult:
        value, increments = _neville_limit(h, values)
        last = increments[-1]
        converged = last <= 1e-13 * max(_norm(value), 1.0) or last <= increments[-2]
        if not converged:
            logger.warning(f"{label}: extrapolation increments are not decreasing")
        return TauberianResult(value=value, error_estimate=float(last), converged=bool(converged))

    def tauberian_initial(self, F: TransformFunction,
                          probe: Optional[Sequence[float]] = None) -> TauberianResult:
        """lim lambda_1...lambda_n F(lambda) as lambda -> +inf along the diagonal (the value f(0+))."""
        probe = list(_DEFAULT_INITIAL_PROBE if probe is None else probe)
        if len(probe) < 4:
            raise DomainError("Tauberian probes need at least 4 points")
        if any(b <= a for a, b in zip(probe[:-1], probe[1:])) or probe[0] <= 0:
            raise DomainError("initial-value probes must be positive and increasing")
        x = np.asarray(probe, dtype=float)
        return self._tauberian(1.0 / x, self._diagonal(F, x), f"{F.name} initial value")

    def tauberian_final(self, F: TransformFunction,
                        probe: Optional[Sequence[float]] = None) -> TauberianResult:
        """lim lambda_1...lambda_n F(lambda) as lambda -> 0+ along the diagonal (the value at infinity)."""
        probe = list(_DEFAULT_FINAL_PROBE if probe is None else probe)
        if len(probe) < 4:
            raise DomainError("Tauberian probes need at least 4 points")
        if any(b >= a for a, b in zip(probe[:-1], probe[1:])) or probe[-1] <= 0:
            raise DomainError("final-value probes must be positive and decreasing")
        x = np.asarray(probe, dtype=float)
        return self._tauberian(x, self._diagonal(F, x), f"{F.name} final value")

    def uniqueness_check(self, F1: TransformFunction, F2: TransformFunction, grid: Sequence[float],
                         t_grid, cfg: Optional[PostWidderConfig] = None,
                         tol_in: float = 1e-8) -> UniquenessReport:
        """
        Gate on max ||F1 - F2|| over the real tensor grid, then compare the
        Post-Widder reconstructions on t_grid.
        """
        if (F1.dims, F1.codim) != (F2.dims, F2.codim):
            raise DomainError("transforms must share dims and codim")
        axis = np.asarray(grid, dtype=float)
        mesh = np.meshgrid(*([axis] * F1.dims), indexing="ij")
        lam = np.stack([m.ravel() for m in mesh], axis=-1).astype(complex)
        gap = _norm(F1(lam) - F2(lam))
        if not gap < tol_in:
            logger.info(f"uniqueness gate rejected {F1.name} vs {F2.name}: {gap:.3g}")
            return UniquenessReport(gate_passed=False, transform_discrepancy=gap)
        pts = _as_points(t_grid, F1.dims)
        worst = max(_norm(self.post_widder_invert(F1, t, cfg) - self.post_widder_invert(F2, t, cfg))
                    for t in pts)
        return UniquenessReport(gate_passed=True, transform_discrepancy=gap,
                                reconstruction_discrepancy=worst)


# Global inversion engine instance
inversion_engine = InversionEngine()
