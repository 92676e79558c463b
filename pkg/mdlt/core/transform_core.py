"""
Forward n-dimensional Laplace transform, antiderivative G and
convergence-region analysis.
"""

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import special
from scipy.optimize import brentq

from mdlt.core.errors import ConfigurationError, DivergenceError, DomainError, QuadratureError
from mdlt.core.functions import VectorFunction
from mdlt.core.quadrature import (
    axis_rule, cumulative_operator, geometric_tail, gl_panels, graded_breakpoints,
    smooth_step, uniform_breakpoints, wynn_epsilon,
)
from mdlt.models.transform import (
    ConvergenceReport, Envelope, LaplacePoint, MembershipVerdict, PointClassification,
    QuadratureConfig, QuadratureMode, QuadratureRule, TransformResult,
)


_ABS_FLOOR = 1e-15
_BOUNDED_WINDOW = 1e3
_REGION_PANEL_ORDER = 8
_DIVERGENCE_JUMP = 1e12
_DIVERGENCE_GROWTH = 100.0
_DIVERGENCE_LEVEL = 1e6
_ACCELERATION_TERMS = 7


def _norm(value: np.ndarray) -> float:
    value = np.asarray(value)
    return float(np.max(np.abs(value))) if value.size else 0.0


def _close(new: np.ndarray, old: np.ndarray, rel_tol: float, scale: float = 0.0) -> bool:
    return _norm(new - old) <= rel_tol * max(_norm(new), scale) + _ABS_FLOOR


def _settled(history: Sequence[np.ndarray], rel_tol: float) -> bool:
    """Last 3 entries agree to rel_tol."""
    return len(history) >= 3 and all(_close(history[-1], history[-1 - i], rel_tol) for i in (1, 2))


def _contracting(partials: Sequence[np.ndarray]) -> bool:
    """Increments of the last 4 partial integrals shrink; rules out anti-limits of divergent sums."""
    if len(partials) < 4:
        return False
    last, middle, early = (_norm(partials[-i] - partials[-i - 1]) for i in (1, 2, 3))
    return last <= middle <= early


def _power_integral(power: float, delta: float, start: float = 0.0) -> float:
    """integral_start^inf s^power e^{-delta s} ds."""
    a = power + 1.0
    if start <= 0:
        return math.exp(special.gammaln(a) - a * math.log(delta))
    return float(special.gammaincc(a, delta * start)) * math.exp(special.gammaln(a) - a * math.log(delta))


def _envelope_integrals(envelope: Envelope, j: int, delta: float, start: float = 0.0) -> float:
    return (_power_integral(envelope.eta[j], delta, start)
            + _power_integral(envelope.zeta[j], delta, start))


def antiderivative_envelope(envelope: Envelope) -> Envelope:
    """Envelope of G from the envelope of f."""
    scale = float(np.prod([1.0 / min(e + 1.0, z + 1.0) for e, z in zip(envelope.eta, envelope.zeta)]))
    return Envelope(
        M=envelope.M * scale,
        omega=[max(w, 0.0) for w in envelope.omega],
        eta=[e + 1.0 for e in envelope.eta],
        zeta=[z + 1.0 for z in envelope.zeta],
    )


def truncation_from_envelope(envelope: Envelope, real_parts: Sequence[float],
                             rel_tol: float) -> Tuple[List[float], List[float]]:
    """
    Per-axis T_j with envelope tail <= rel_tol / 10 of the full envelope integral,
    and the resulting absolute truncation bound per axis.
    """
    deltas = [re - w for re, w in zip(real_parts, envelope.omega)]
    full = [_envelope_integrals(envelope, j, d) for j, d in enumerate(deltas)]
    truncation = []
    for j, d in enumerate(deltas):
        target = 0.1 * rel_tol * full[j]

        def excess(x, j=j, d=d, target=target):
            return _envelope_integrals(envelope, j, d, x) - target

        hi = max(1.0 / d, 1.0)
        while excess(hi) > 0:
            hi *= 2.0
            if hi > 1e7:
                raise ConfigurationError(f"axis {j + 1}: envelope tail does not reach rel_tol")
        lo = hi / 2.0
        truncation.append(brentq(excess, lo, hi, xtol=1e-6 * hi) if excess(lo) > 0 else hi)

    tails = []
    for j, T in enumerate(truncation):
        others = float(np.prod([full[i] for i in range(len(full)) if i != j]))
        tails.append(envelope.M * _envelope_integrals(envelope, j, deltas[j], T) * others)
    return truncation, tails


def _taper_window(x: float) -> Callable[[np.ndarray], np.ndarray]:
    """psi(s / x): 1 up to x, smoothly 0 at 2x."""
    return lambda s: 1.0 - smooth_step(np.asarray(s) / x - 1.0)


class TransformEngine:
    """
    Engine for forward Laplace integrals.

    Features:
    - Absolute mode with envelope-driven truncation and panel doubling
    - Iterated improper integrals with epsilon-accelerated interval doubling
    - Bounded partial integrals over boxes
    - Antiderivative G and the L f = lambda_1...lambda_n L G check
    - Abscissa estimates and region classification
    """

    # ------------------------------------------------------------------
    # Box integrals
    # ------------------------------------------------------------------

    def _axis_rules(self, f: VectorFunction, lower: Sequence[float], upper: Sequence[float],
                    panels: Sequence[int], cfg: QuadratureConfig):
        rules = []
        for j, (a, b, p) in enumerate(zip(lower, upper, panels)):
            kinks = f.kinks[j] if f.kinks is not None else ()
            rules.append(axis_rule(a, b, p, cfg.order, cfg.tanh_sinh_level, origin_singular=True,
                                   all_tanh_sinh=cfg.rule == QuadratureRule.TANH_SINH, kinks=kinks))
        return rules

    def box_integral(self, f: VectorFunction, upper: Sequence[float], cfg: QuadratureConfig,
                     lam: Optional[np.ndarray] = None,
                     lower: Optional[Sequence[float]] = None) -> Tuple[np.ndarray, bool]:
        """
        integral over prod_j [lower_j, upper_j] of e^{-lambda.t} f(t) dt (no kernel when lam is None).

        Panels double until successive values agree to rel_tol. Returns
        (value, converged).
        """
        n = f.dims
        lower = [0.0] * n if lower is None else list(lower)
        upper = list(upper)
        panels = cfg.per_axis(cfg.panels, n)
        active = [b > a for a, b in zip(lower, upper)]
        if not all(active):
            return np.zeros(f.codim, dtype=complex), True

        previous = None
        value = None
        for _ in range(cfg.max_refinements + 1):
            rules = self._axis_rules(f, lower, upper, panels, cfg)
            weights = [r.weights if lam is None else r.weights * np.exp(-lam[j] * r.nodes)
                       for j, r in enumerate(rules)]
            value = f.integrate_tensor([r.nodes for r in rules], weights)
            if not cfg.adaptive:
                return value, True
            if previous is not None and _close(value, previous, cfg.rel_tol):
                logger.debug(f"{f.name}: box integral settled at panels={panels}")
                return value, True
            previous = value
            panels = [2 * p for p in panels]
        return value, False

    # ------------------------------------------------------------------
    # Forward transform
    # ------------------------------------------------------------------

    def laplace_nd(self, f: VectorFunction, p: LaplacePoint,
                   cfg: Optional[QuadratureConfig] = None) -> TransformResult:
        """
        Laplace integral of f at p in the mode cfg.mode.

        absolute: requires Re lambda_j > omega_j; iterated: nested improper
        integrals, innermost axis n first; bounded_partial: partial integral
        over prod [0, T_j].
        """
        cfg = cfg or QuadratureConfig()
        if p.dims != f.dims:
            raise DomainError(f"{f.name} has {f.dims} variables, point has {p.dims}")
        if cfg.truncation is not None and any(T <= 0 for T in cfg.per_axis(cfg.truncation, f.dims)):
            raise ConfigurationError("truncation lengths must be > 0")
        lam = p.values

        if cfg.mode == QuadratureMode.ABSOLUTE:
            return self._absolute(f, lam, cfg)
        if cfg.mode == QuadratureMode.BOUNDED_PARTIAL:
            T = cfg.per_axis(cfg.truncation if cfg.truncation is not None else cfg.region_box, f.dims)
            value, converged = self.box_integral(f, T, cfg, lam)
            return TransformResult(value=value, mode_used=cfg.mode, tail_estimate=[0.0] * f.dims,
                                   converged=converged, truncation=[float(x) for x in T])
        return self._iterated(f, lam, cfg)

    def _absolute(self, f: VectorFunction, lam: np.ndarray, cfg: QuadratureConfig) -> TransformResult:
        env = f.envelope
        below = [j + 1 for j in range(f.dims) if not lam[j].real > env.omega[j]]
        if below:
            raise DivergenceError(
                f"{f.name}: Re lambda_j <= omega_j on axes {below}; the absolute integral is not finite"
            )
        auto_T, tails = truncation_from_envelope(env, lam.real, cfg.rel_tol)
        T = auto_T if cfg.truncation is None else cfg.per_axis(cfg.truncation, f.dims)
        if cfg.truncation is not None:
            deltas = [lam[j].real - env.omega[j] for j in range(f.dims)]
            full = [_envelope_integrals(env, j, d) for j, d in enumerate(deltas)]
            tails = [env.M * _envelope_integrals(env, j, deltas[j], T[j])
                     * float(np.prod([full[i] for i in range(f.dims) if i != j]))
                     for j in range(f.dims)]

        value, converged = self.box_integral(f, T, cfg, lam)
        if not converged:
            raise QuadratureError(
                f"{f.name}: absolute quadrature did not reach rel_tol={cfg.rel_tol} "
                f"within {cfg.max_refinements} refinements"
            )
        return TransformResult(value=value, mode_used=QuadratureMode.ABSOLUTE,
                               tail_estimate=[float(t) for t in tails], converged=True,
                               truncation=[float(x) for x in T])

    # ------------------------------------------------------------------
    # Iterated improper integrals
    # ------------------------------------------------------------------

    def _refine_window(self, g: Callable, a: float, b: float, panels: int, cfg: QuadratureConfig,
                       tapers: Sequence[Optional[Callable]], scale: float):
        """Integrals of g * taper over [a, b] with panel doubling."""
        previous = None
        current = None
        for _ in range(cfg.max_refinements + 1):
            rule = axis_rule(a, b, panels, cfg.order, cfg.tanh_sinh_level, origin_singular=True,
                             all_tanh_sinh=cfg.rule == QuadratureRule.TANH_SINH)
            values = g(rule.nodes)
            current = [
                np.einsum("k,bkm->bm", rule.weights if t is None else rule.weights * t(rule.nodes), values)
                for t in tapers
            ]
            if not cfg.adaptive:
                break
            if previous is not None and all(_close(c, q, cfg.rel_tol, scale) for c, q in zip(current, previous)):
                break
            previous = current
            panels *= 2
        return current, panels

    def improper_integral(self, g: Callable, start: float, cfg: QuadratureConfig,
                          label: str = "") -> Tuple[np.ndarray, bool, float]:
        """
        Batched one-dimensional integral_0^inf g(s) ds.

        g maps nodes (K,) to values (B, K, m). Windows [X, 2X] double from
        X = start. The partial integrals up to 2X are accelerated with the
        epsilon algorithm over the last few doublings; the limit is accepted
        once 3 successive accelerated values agree to rel_tol while the
        plain increments shrink. With
        cfg.taper_fallback the smoothly tapered partial integral (plain up
        to X, tapered over [X, 2X]) is accepted under the same test when the
        accelerated sequence has not settled. Returns (value, converged,
        last increment).
        """
        panels = cfg.panels if isinstance(cfg.panels, int) else max(cfg.panels)
        (base,), panels = self._refine_window(g, 0.0, start, panels, cfg, [None], 0.0)
        partials: List[np.ndarray] = [base]
        accelerated: List[np.ndarray] = []
        smoothed: List[np.ndarray] = []
        X = start
        first = None
        jumps = 0
        for _ in range(cfg.max_doublings):
            scale = max(_norm(base), _norm(smoothed[-1]) if smoothed else 0.0)
            (plain, tapered), panels = self._refine_window(
                g, X, 2.0 * X, panels, cfg, [None, _taper_window(X)], scale)
            candidate = base + tapered
            size = _norm(candidate)
            if not np.all(np.isfinite(candidate)) or not np.all(np.isfinite(plain)):
                raise DivergenceError(f"{label}: non-finite partial integrals at X={X:g}")
            if first is None:
                first = max(1.0, size)
            if size > _DIVERGENCE_JUMP * first:
                raise DivergenceError(f"{label}: partial integrals exceed {_DIVERGENCE_JUMP:g} x their start")
            if smoothed and size >= _DIVERGENCE_GROWTH * max(_norm(smoothed[-1]), np.finfo(float).tiny):
                jumps += 1
            else:
                jumps = 0
            if jumps >= 2 and size > _DIVERGENCE_LEVEL * first:
                raise DivergenceError(f"{label}: partial integrals grow geometrically")

            base = base + plain
            partials.append(base)
            smoothed.append(candidate)
            accelerated.append(wynn_epsilon(partials[-_ACCELERATION_TERMS:]))
            if _settled(accelerated, cfg.rel_tol) and _contracting(partials):
                logger.debug(f"{label}: accelerated partial integrals settled at X={2.0 * X:g}")
                return accelerated[-1], True, _norm(accelerated[-1] - accelerated[-2])
            if cfg.taper_fallback and _settled(smoothed, cfg.rel_tol):
                logger.debug(f"{label}: tapered partial integrals settled at X={X:g}")
                return smoothed[-1], True, _norm(smoothed[-1] - smoothed[-2])
            X *= 2.0

        logger.warning(f"{label}: iterated limit did not settle within {cfg.max_doublings} doublings")
        history = smoothed if cfg.taper_fallback else accelerated
        increment = _norm(history[-1] - history[-2]) if len(history) > 1 else float("inf")
        return history[-1], False, increment

    def _iterated(self, f: VectorFunction, lam: np.ndarray, cfg: QuadratureConfig) -> TransformResult:
        n = f.dims
        starts = cfg.per_axis(cfg.truncation, n) if cfg.truncation is not None else [1.0] * n
        tails = [0.0] * n

        if f.separable:
            value = f.coefficient_vector()
            converged = True
            for j in range(n):
                factor = f.factors[j]

                def g(s, factor=factor, j=j):
                    return (np.asarray(factor(s), dtype=complex) * np.exp(-lam[j] * s))[None, :, None]

                part, ok, tails[j] = self.improper_integral(g, starts[j], cfg, f"{f.name}[axis {j + 1}]")
                value = value * part[0, 0]
                converged &= ok
            return TransformResult(value=value, mode_used=QuadratureMode.ITERATED,
                                   tail_estimate=[abs(x) for x in tails], converged=converged,
                                   truncation=[float(x) for x in starts])

        status = {"converged": True}

        def inner(level: int, outer: np.ndarray) -> np.ndarray:
            if level == n:
                return f(outer)
            batch = outer.shape[0]

            def g(s):
                pts = np.concatenate([np.repeat(outer, s.size, axis=0),
                                      np.tile(s, batch)[:, None]], axis=1)
                vals = inner(level + 1, pts).reshape(batch, s.size, f.codim)
                return vals * np.exp(-lam[level] * s)[None, :, None]

            value, ok, tail = self.improper_integral(g, starts[level], cfg, f"{f.name}[axis {level + 1}]")
            status["converged"] &= ok
            tails[level] = max(tails[level], tail)
            return value

        value = inner(0, np.zeros((1, 0)))[0]
        return TransformResult(value=value, mode_used=QuadratureMode.ITERATED,
                               tail_estimate=[abs(x) for x in tails], converged=status["converged"],
                               truncation=[float(x) for x in starts])

    # ------------------------------------------------------------------
    # Antiderivative G
    # ------------------------------------------------------------------

    def antiderivative_G(self, f: VectorFunction, t: Sequence[float],
                         cfg: Optional[QuadratureConfig] = None) -> np.ndarray:
        """G(t) = integral of f over the box [0, t_1] x ... x [0, t_n]."""
        cfg = cfg or QuadratureConfig()
        t = [float(x) for x in t]
        if len(t) != f.dims:
            raise DomainError(f"{f.name} has {f.dims} variables, got {len(t)}")
        if any(x < 0 for x in t):
            raise DomainError("antiderivative_G needs t_j >= 0")
        value, converged = self.box_integral(f, t, cfg)
        if not converged:
            raise QuadratureError(
                f"{f.name}: box integral did not reach rel_tol={cfg.rel_tol} within "
                f"{cfg.max_refinements} refinements"
            )
        return value

    def antiderivative_function(self, f: VectorFunction,
                                cfg: Optional[QuadratureConfig] = None) -> VectorFunction:
        """G as a VectorFunction evaluated with a fixed composite rule scaled to each box."""
        cfg = cfg or QuadratureConfig()
        panels = max(cfg.per_axis(cfg.panels, f.dims))
        ref = axis_rule(0.0, 1.0, panels, cfg.order, cfg.tanh_sinh_level, origin_singular=True)

        def primitive(factor):
            def g(t):
                t = np.asarray(t, dtype=float)
                nodes = t[:, None] * ref.nodes[None, :]
                vals = np.asarray(factor(nodes.ravel())).reshape(nodes.shape)
                return (vals * ref.weights[None, :]).sum(axis=1) * t
            return g

        envelope = antiderivative_envelope(f.envelope)
        if f.separable:
            factors = [primitive(factor) for factor in f.factors]

            def func(t):
                prod = np.ones(t.shape[0], dtype=complex)
                for j, g in enumerate(factors):
                    prod = prod * g(t[:, j])
                return prod[:, None] * f.coefficient_vector()[None, :]

            return VectorFunction(name=f"G[{f.name}]", dims=f.dims, codim=f.codim, func=func,
                                  factors=factors, coefficient=f.coefficient, envelope=envelope)

        def func(t):
            out = np.empty((t.shape[0], f.codim), dtype=complex)
            for i, point in enumerate(t):
                axes = [point[j] * ref.nodes for j in range(f.dims)]
                weights = [point[j] * ref.weights for j in range(f.dims)]
                out[i] = f.integrate_tensor(axes, weights)
            return out

        return VectorFunction(name=f"G[{f.name}]", dims=f.dims, codim=f.codim, func=func,
                              envelope=envelope)

    def antiderivative_transform(self, f: VectorFunction, p: LaplacePoint,
                                 cfg: Optional[QuadratureConfig] = None) -> TransformResult:
        """
        (L G)(p) from G sampled on graded Gauss-Legendre grids through the
        Legendre cumulative-integration matrix.
        """
        cfg = cfg or QuadratureConfig()
        lam = p.values
        env = antiderivative_envelope(f.envelope)
        bad = [j + 1 for j in range(f.dims) if not lam[j].real > env.omega[j]]
        if bad:
            raise DivergenceError(f"L G needs Re lambda_j > max(omega_j, 0); fails on axes {bad}")
        T, tails = truncation_from_envelope(env, lam.real, cfg.rel_tol)
        if cfg.truncation is not None:
            T = cfg.per_axis(cfg.truncation, f.dims)

        panels = cfg.per_axis(cfg.panels, f.dims)
        previous = None
        value = None
        for _ in range(cfg.max_refinements + 1):
            ops = [cumulative_operator(graded_breakpoints(T[j], panels[j], cfg.grading_levels), cfg.order)
                   for j in range(f.dims)]
            nodes = [rule.nodes for rule, _ in ops]
            weights = [rule.weights * np.exp(-lam[j] * rule.nodes) for j, (rule, _) in enumerate(ops)]
            if f.separable:
                prod = 1.0 + 0j
                for j, (rule, K) in enumerate(ops):
                    prod *= weights[j] @ (K @ np.asarray(f.factors[j](nodes[j]), dtype=complex))
                value = prod * np.asarray(f.coefficient, dtype=complex)
            else:
                grid = f.on_grid(nodes)
                for j, (_, K) in enumerate(ops):
                    grid = np.moveaxis(np.tensordot(K, grid, axes=(1, j)), 0, j)
                value = grid
                for w in weights:
                    value = np.tensordot(w, value, axes=(0, 0))
            if not cfg.adaptive or (previous is not None and _close(value, previous, cfg.rel_tol)):
                break
            previous = value
            panels = [2 * q for q in panels]
        else:
            raise QuadratureError(f"{f.name}: L G did not reach rel_tol={cfg.rel_tol}")

        return TransformResult(value=value, mode_used=QuadratureMode.ABSOLUTE,
                               tail_estimate=[float(x) for x in tails], converged=True,
                               truncation=[float(x) for x in T])

    def check_LG_relation(self, f: VectorFunction, p: LaplacePoint,
                          cfg: Optional[QuadratureConfig] = None) -> float:
        """||L f(p) - lambda_1...lambda_n (L G)(p)|| / (1 + ||L f(p)||)."""
        cfg = (cfg or QuadratureConfig()).model_copy(update={"mode": QuadratureMode.ABSOLUTE})
        lam = p.values
        if not all(lam[j].real > max(f.envelope.omega[j], 0.0) for j in range(f.dims)):
            raise DomainError("check_LG_relation needs Re lambda_j > max(omega_j, 0)")
        lf = self.laplace_nd(f, p, cfg).value
        lg = self.antiderivative_transform(f, p, cfg).value
        residual = _norm(lf - np.prod(lam) * lg) / (1.0 + _norm(lf))
        logger.debug(f"{f.name}: L f vs lambda L G residual {residual:.3e}")
        return residual

    # ------------------------------------------------------------------
    # Convergence regions
    # ------------------------------------------------------------------

    def estimate_abscissa(self, f: VectorFunction, axis: int, probe_grid: Sequence[float],
                          region_tol: float = 1e-3) -> float:
        """
        Smallest probe sigma at which integral_0^inf |f| e^{-sigma t_axis} dt_axis
        (other variables at 1.0) converges numerically; -inf if every probe
        converges, +inf if none does.
        """
        grid = [float(x) for x in probe_grid]
        if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigurationError("probe_grid must be strictly ascending with >= 3 points")
        if not 0 <= axis < f.dims:
            raise DomainError(f"axis {axis} out of range for {f.dims} variables")

        edges = 4.0 * 2.0 ** np.arange(5)
        rule = gl_panels(np.concatenate([[0.0]] + [np.linspace(lo, hi, 65)[1:] for lo, hi in
                                                    zip(np.concatenate([[0.0], edges[:-1]]), edges)]),
                         _REGION_PANEL_ORDER)
        pts = np.ones((rule.size, f.dims))
        pts[:, axis] = rule.nodes
        magnitude = np.max(np.abs(f(pts)), axis=1)
        masks = [rule.nodes <= e for e in edges]

        def converges(sigma: float) -> bool:
            with np.errstate(over="ignore", invalid="ignore"):
                integrand = rule.weights * magnitude * np.exp(-sigma * rule.nodes)
                partials = [float(np.sum(integrand[m])) for m in masks]
            ok, tail = geometric_tail(partials)
            return ok and tail <= region_tol * max(partials[-1], np.finfo(float).tiny)

        if converges(grid[0]):
            return -math.inf
        if not converges(grid[-1]):
            return math.inf
        lo, hi = 0, len(grid) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if converges(grid[mid]):
                hi = mid
            else:
                lo = mid
        logger.debug(f"{f.name}: abscissa on axis {axis + 1} in ({grid[lo]}, {grid[hi]}]")
        return grid[hi]

    def _region_rules(self, n: int, cfg: QuadratureConfig, box: float):
        per_axis = int(cfg.region_nodes ** (1.0 / n))
        panels = max(8, (per_axis // _REGION_PANEL_ORDER) // 8 * 8)
        unit = panels // 8
        breaks = np.concatenate([
            uniform_breakpoints(0.0, box, unit),
            uniform_breakpoints(box, 2 * box, unit)[1:],
            uniform_breakpoints(2 * box, 4 * box, 2 * unit)[1:],
            uniform_breakpoints(4 * box, 8 * box, 4 * unit)[1:],
        ])
        return gl_panels(breaks, _REGION_PANEL_ORDER)

    def classify_point(self, f: VectorFunction, p: LaplacePoint,
                       cfg: Optional[QuadratureConfig] = None) -> PointClassification:
        """
        Membership verdict at p from boxed integrals over [0, 2^k T]^n, k = 0..3.

        Absolute integrals that form a converging sequence give in_Ω_abs; else
        a settled iterated limit gives in_Ω_only; else partial integrals
        staying below 10^3 x the absolute integral over the first box give
        in_Ω_b.
        """
        cfg = cfg or QuadratureConfig(mode=QuadratureMode.ITERATED)
        lam = p.values
        box = cfg.region_box
        rule = self._region_rules(f.dims, cfg, box)
        edges = box * 2.0 ** np.arange(4)
        axes = [rule.nodes] * f.dims

        with np.errstate(over="ignore", invalid="ignore"):
            signed_sets, abs_sets = [], []
            for e in edges:
                mask = rule.nodes <= e + 1e-12
                signed_sets.append([rule.weights * mask * np.exp(-lam[j] * rule.nodes) for j in range(f.dims)])
                abs_sets.append([rule.weights * mask * np.exp(-lam[j].real * rule.nodes) for j in range(f.dims)])
            partial = f.integrate_tensor_many(axes, signed_sets)
            absolute = f.integrate_tensor_many(
                axes, abs_sets, reducer=lambda slab: np.max(np.abs(slab), axis=-1, keepdims=True))

        totals = [float(np.real(a[0])) for a in absolute]
        converging, tail = geometric_tail(totals)
        absolutely = converging and tail <= cfg.region_tol * max(totals[-1], np.finfo(float).tiny)

        sizes = [_norm(s) for s in partial]
        reference = max(totals[0], sizes[0], np.finfo(float).tiny)
        bounded = all(math.isfinite(s) for s in sizes) and max(sizes) < _BOUNDED_WINDOW * reference

        iterated: Optional[bool] = None
        diverged = False
        if not absolutely:
            try:
                result = self.laplace_nd(f, p, cfg.model_copy(update={"mode": QuadratureMode.ITERATED}))
                iterated = result.converged
            except (DivergenceError, QuadratureError) as e:
                logger.debug(f"{f.name} at {lam}: {e}")
                iterated, diverged = False, True

        if absolutely:
            verdict = MembershipVerdict.IN_OMEGA_ABS
        elif iterated:
            verdict = MembershipVerdict.IN_OMEGA_ONLY
        elif bounded:
            verdict = MembershipVerdict.IN_OMEGA_B
        elif diverged or not all(math.isfinite(s) for s in sizes):
            verdict = MembershipVerdict.OUTSIDE
        elif max(sizes) >= _BOUNDED_WINDOW * reference and sizes[-1] >= sizes[-2]:
            verdict = MembershipVerdict.OUTSIDE
        else:
            verdict = MembershipVerdict.UNDETERMINED

        logger.info(f"{f.name} at {np.round(lam, 6).tolist()}: {verdict.value}")
        return PointClassification(point=p, verdict=verdict, absolutely_convergent=absolutely,
                                   bounded=bounded, iterated_converged=iterated)

    def convergence_report(self, f: VectorFunction, points: Sequence[LaplacePoint],
                           cfg: Optional[QuadratureConfig] = None,
                           probe_grid: Optional[Sequence[float]] = None) -> ConvergenceReport:
        """Verdicts at several points plus per-axis abscissa estimates when probe_grid is given."""
        cfg = cfg or QuadratureConfig(mode=QuadratureMode.ITERATED)
        memberships = [self.classify_point(f, p, cfg) for p in points]
        abscissa = []
        if probe_grid is not None:
            abscissa = [self.estimate_abscissa(f, j, probe_grid, cfg.region_tol) for j in range(f.dims)]
        return ConvergenceReport(abs_abscissa=abscissa, memberships=memberships)


# Global engine instance
transform_engine = TransformEngine()
