"""
Operational calculus of the n-dimensional Laplace transform.

Each rule is exposed as a checked identity: both sides are computed
independently and compared in the max-abs norm.
"""

import math
from itertools import combinations
from typing import Optional, Sequence, Union

import numpy as np
from loguru import logger
from scipy import special

from mdlt.core.errors import DomainError
from mdlt.core.functions import TransformFunction, VectorFunction, matrix_applied
from mdlt.core.quadrature import tanh_sinh
from mdlt.core.special_functions import gamma_kernel
from mdlt.core.transform_core import TransformEngine, transform_engine, truncation_from_envelope
from mdlt.models.operational import DampingVector, IdentityCheck, MultiIndex, ShiftVector
from mdlt.models.transform import Envelope, LaplacePoint, QuadratureConfig, QuadratureMode


_MAX_EXTRA_LEVELS = 3


def _norm(value) -> float:
    return float(np.max(np.abs(np.asarray(value))))


def _identity(lhs: np.ndarray, rhs: np.ndarray) -> IdentityCheck:
    return IdentityCheck(lhs=lhs, rhs=rhs, residual=_norm(lhs - rhs) / (1.0 + _norm(lhs)))


def _absolute(cfg: Optional[QuadratureConfig]) -> QuadratureConfig:
    return (cfg or QuadratureConfig()).model_copy(update={"mode": QuadratureMode.ABSOLUTE})


def _derive(f: VectorFunction, name: str, func, envelope: Envelope, factors=None,
            kinks=None) -> VectorFunction:
    return VectorFunction(name=name, dims=f.dims, codim=f.codim, func=func, envelope=envelope,
                          factors=factors, coefficient=f.coefficient if factors is not None else None,
                          kinks=kinks)


def shifted(f: VectorFunction, h: np.ndarray) -> VectorFunction:
    """f_h(t) = f(t + h)."""
    env = f.envelope
    scale, eta, zeta = env.M, [], []
    for j, hj in enumerate(h):
        if hj == 0:
            eta.append(env.eta[j])
            zeta.append(env.zeta[j])
            continue
        # (t + h)^p <= c (1 + t^max(p, 0)) for p > -1 and h > 0
        grow = 2.0 * (1.0 + hj)
        c = sum(hj ** p if p < 0 else grow ** p for p in (env.eta[j], env.zeta[j]))
        scale *= c * math.exp(env.omega[j] * hj)
        eta.append(0.0)
        zeta.append(max(env.zeta[j], 0.0))
    envelope = Envelope(M=scale, omega=list(env.omega), eta=eta, zeta=zeta)
    factors = None
    if f.separable:
        factors = [(lambda phi, s: (lambda t: phi(np.asarray(t) + s)))(phi, hj)
                   for phi, hj in zip(f.factors, h)]
    kinks = None
    if f.kinks is not None:
        kinks = [[k - hj for k in ks if k > hj] for ks, hj in zip(f.kinks, h)]
    return _derive(f, f"{f.name}(t+h)", lambda t: f(t + h[None, :]), envelope, factors, kinks)


def delayed(f: VectorFunction, h: np.ndarray) -> VectorFunction:
    """f_{h-}(t) = f(t - h) where t >= h componentwise, 0 elsewhere."""
    env = f.envelope
    envelope = Envelope(
        M=env.M * math.exp(-float(np.dot(env.omega, h))),
        omega=list(env.omega),
        eta=[min(e, 0.0) for e in env.eta],
        zeta=[max(z, 0.0) for z in env.zeta],
    )

    def cut(phi, s):
        def factor(t):
            t = np.asarray(t, dtype=float)
            out = np.zeros(t.shape, dtype=complex)
            inside = t >= s
            out[inside] = phi(t[inside] - s)
            return out
        return factor

    def func(t):
        out = np.zeros((t.shape[0], f.codim), dtype=complex)
        inside = np.all(t >= h[None, :], axis=1)
        if np.any(inside):
            out[inside] = f(t[inside] - h[None, :])
        return out

    factors = [cut(phi, hj) for phi, hj in zip(f.factors, h)] if f.separable else None
    kinks = [sorted(set(([k + hj for k in f.kinks[j]] if f.kinks else []) + ([hj] if hj > 0 else [])))
             for j, hj in enumerate(h)]
    return _derive(f, f"{f.name}(t-h)", func, envelope, factors, kinks)


def damped(f: VectorFunction, z: np.ndarray) -> VectorFunction:
    """e^{-z.t} f(t)."""
    env = f.envelope
    envelope = env.model_copy(update={"omega": [w - zj.real for w, zj in zip(env.omega, z)]})
    factors = None
    if f.separable:
        factors = [(lambda phi, s: (lambda t: phi(t) * np.exp(-s * np.asarray(t))))(phi, zj)
                   for phi, zj in zip(f.factors, z)]
    return _derive(f, f"exp(-z.t){f.name}", lambda t: f(t) * np.exp(-(t @ z))[:, None],
                   envelope, factors, f.kinks)


def moment(f: VectorFunction, v: Sequence[int]) -> VectorFunction:
    """t^v f(t) = t_1^{v_1} ... t_n^{v_n} f(t)."""
    env = f.envelope
    envelope = Envelope(M=env.M, omega=list(env.omega),
                        eta=[e + k for e, k in zip(env.eta, v)],
                        zeta=[z + k for z, k in zip(env.zeta, v)])
    powers = np.asarray(v, dtype=float)
    factors = None
    if f.separable:
        factors = [(lambda phi, k: (lambda t: phi(t) * np.asarray(t, dtype=float) ** k))(phi, k)
                   for phi, k in zip(f.factors, v)]
    return _derive(f, f"t^v {f.name}", lambda t: f(t) * np.prod(t ** powers, axis=1)[:, None],
                   envelope, factors, f.kinks)


class OperationalCalculus:
    """
    Operational rules of the transform as checked identities.

    Features:
    - Shift rule with inclusion-exclusion over the complement of [h, inf)
    - Delay, damping and bounded-operator rules with quadrature cross-checks
    - Mixed partials of transforms as moment transforms
    - Riemann-Liouville fractional integrals and Faltung convolution
    - Convolution theorem and the one-dimensional derivative rule
    """

    def __init__(self, engine: TransformEngine = transform_engine):
        self.engine = engine

    # ------------------------------------------------------------------
    # Shift, delay, damping
    # ------------------------------------------------------------------

    def shift_transform(self, f: VectorFunction, h: ShiftVector, p: LaplacePoint,
                        cfg: Optional[QuadratureConfig] = None) -> IdentityCheck:
        """
        lhs = L f_h (p); rhs = e^{lambda.h} (L f(p) - integral over [0,inf)^n minus H),
        H = prod [h_j, inf).
        """
        cfg = _absolute(cfg)
        hv = h.values
        if hv.size != f.dims:
            raise DomainError(f"shift has {hv.size} components, {f.name} has {f.dims} variables")
        lam = p.values
        lhs = self.engine.laplace_nd(shifted(f, hv), p, cfg).value
        full = self.engine.laplace_nd(f, p, cfg)

        # complement by inclusion-exclusion over axes held below h_j
        T, _ = truncation_from_envelope(f.envelope, lam.real, cfg.rel_tol)
        T = [max(Tj, hj) for Tj, hj in zip(T, hv)]
        complement = np.zeros(f.codim, dtype=complex)
        for size in range(1, f.dims + 1):
            for subset in combinations(range(f.dims), size):
                if any(hv[j] == 0 for j in subset):
                    continue
                upper = [hv[j] if j in subset else T[j] for j in range(f.dims)]
                part, _ = self.engine.box_integral(f, upper, cfg, lam)
                complement += (-1) ** (size + 1) * part

        rhs = np.exp(np.dot(lam, hv)) * (full.value - complement)
        check = _identity(lhs, rhs)
        logger.debug(f"shift rule for {f.name}: residual {check.residual:.3e}")
        return check

    def delay_transform(self, f: VectorFunction, h: ShiftVector, p: LaplacePoint,
                        cfg: Optional[QuadratureConfig] = None) -> np.ndarray:
        """e^{-lambda.h} (L f)(p)."""
        lam = p.values
        return np.exp(-np.dot(lam, h.values)) * self.engine.laplace_nd(f, p, cfg).value

    def delay_residual(self, f: VectorFunction, h: ShiftVector, p: LaplacePoint,
                       cfg: Optional[QuadratureConfig] = None) -> IdentityCheck:
        """Delay rule against direct quadrature of the delayed function."""
        cfg = _absolute(cfg)
        rhs = self.delay_transform(f, h, p, cfg)
        lhs = self.engine.laplace_nd(delayed(f, h.values), p, cfg).value
        return _identity(lhs, rhs)

    def damping_transform(self, f: VectorFunction, z: DampingVector, p: LaplacePoint,
                          cfg: Optional[QuadratureConfig] = None) -> np.ndarray:
        """(L f)(lambda + z)."""
        moved = LaplacePoint.of(*(p.values + z.values))
        return self.engine.laplace_nd(f, moved, cfg).value

    def damping_residual(self, f: VectorFunction, z: DampingVector, p: LaplacePoint,
                         cfg: Optional[QuadratureConfig] = None) -> IdentityCheck:
        """Damping rule against direct quadrature of e^{-z.t} f."""
        cfg = _absolute(cfg)
        rhs = self.damping_transform(f, z, p, cfg)
        lhs = self.engine.laplace_nd(damped(f, z.values), p, cfg).value
        return _identity(lhs, rhs)

    def damped_transform(self, F: TransformFunction, z: DampingVector) -> TransformFunction:
        """lambda -> F(lambda + z) with shifted partials: the closed-form transform of e^{-z.t} f."""
        shift = z.values
        if shift.size != F.dims:
            raise DomainError(f"damping has {shift.size} components, {F.name} has {F.dims} variables")
        decay = F.decay.model_copy(
            update={"omega": [w - s.real for w, s in zip(F.decay.omega, shift)]})
        factors = factor_partials = partials = None
        if F.separable:
            factors = [(lambda g, s: (lambda lam: g(np.asarray(lam) + s)))(g, s)
                       for g, s in zip(F.factors, shift)]
        if F.factor_partials is not None:
            factor_partials = [(lambda fp, s: (lambda v, lam: fp(v, np.asarray(lam) + s)))(fp, s)
                               for fp, s in zip(F.factor_partials, shift)]
        elif F.partials is not None:
            partials = lambda orders, lam: F.partials(orders, lam + shift[None, :])
        return TransformFunction(
            name=f"{F.name}(lambda+z)", dims=F.dims, codim=F.codim,
            func=lambda lam: F(np.asarray(lam) + shift[None, :]),
            factors=factors, coefficient=F.coefficient if factors is not None else None,
            decay=decay, partials=partials, factor_partials=factor_partials,
            source=damped(F.source, shift) if F.source is not None else None,
        )

    def operator_rule_residual(self, f: VectorFunction, T: np.ndarray, p: LaplacePoint,
                               cfg: Optional[QuadratureConfig] = None) -> IdentityCheck:
        """T (L f)(p) against L(T f)(p) for an m x m matrix T."""
        cfg = _absolute(cfg)
        T = np.asarray(T, dtype=complex)
        lhs = T @ self.engine.laplace_nd(f, p, cfg).value
        rhs = self.engine.laplace_nd(matrix_applied(T, f), p, cfg).value
        return _identity(lhs, rhs)

    # ------------------------------------------------------------------
    # Derivatives of transforms
    # ------------------------------------------------------------------

    def transform_derivative(self, f: VectorFunction, v: MultiIndex, p: LaplacePoint,
                             cfg: Optional[QuadratureConfig] = None) -> np.ndarray:
        """Mixed partial d^v (L f)(p) = (-1)^{|v|} L[t^v f](p)."""
        if len(v.v) != f.dims:
            raise DomainError(f"multi-index has {len(v.v)} entries, {f.name} has {f.dims} variables")
        cfg = _absolute(cfg)
        if v.order == 0:
            return self.engine.laplace_nd(f, p, cfg).value
        return (-1) ** v.order * self.engine.laplace_nd(moment(f, v.v), p, cfg).value

    def higher_derivative_transform_1d(self, f: Union[VectorFunction, TransformFunction],
                                       initial: Sequence, m: int, lam: complex,
                                       cfg: Optional[QuadratureConfig] = None) -> np.ndarray:
        """
        L[f^(m)](lambda) = lambda^m F(lambda) - sum_k lambda^{m-1-k} f^(k)(0).

        F comes from the closed form when f is a TransformFunction, otherwise
        from laplace_nd.
        """
        if m < 1:
            raise DomainError(f"derivative order must be >= 1, got {m}")
        if len(initial) != m:
            raise DomainError(f"need f(0), ..., f^({m - 1})(0): got {len(initial)} values")
        if f.dims != 1:
            raise DomainError("the derivative rule is one-dimensional")
        lam = complex(lam)
        if isinstance(f, TransformFunction):
            F = f(np.array([[lam]]))[0]
        else:
            F = self.engine.laplace_nd(f, LaplacePoint.of(lam), _absolute(cfg)).value
        value = lam ** m * F
        for k, fk in enumerate(initial):
            value = value - lam ** (m - 1 - k) * np.asarray(fk, dtype=complex)
        return value

    # ------------------------------------------------------------------
    # Fractional integrals and convolution
    # ------------------------------------------------------------------

    def fractional_integral(self, f: VectorFunction, axis: int, alpha: float, t: Sequence[float],
                            cfg: Optional[QuadratureConfig] = None) -> np.ndarray:
        """(J^alpha_{t_axis} f)(t) = integral_0^{t_axis} g_alpha(t_axis - s) f(.., s, ..) ds."""
        cfg = cfg or QuadratureConfig()
        point = np.asarray(t, dtype=float)
        self._check_fractional(f, axis, alpha, point)
        previous = None
        value = None
        top = cfg.tanh_sinh_level + (_MAX_EXTRA_LEVELS + 2 if cfg.adaptive else 1)
        for level in range(cfg.tanh_sinh_level, top):
            value = self._fractional_batch(f, axis, alpha, point[None, :], level)[0]
            if previous is not None and _norm(value - previous) <= cfg.rel_tol * max(_norm(value), 1e-300):
                break
            previous = value
        return value

    @staticmethod
    def _check_fractional(f: VectorFunction, axis: int, alpha: float, t: np.ndarray):
        if not alpha > 0:
            raise DomainError(f"fractional order must be > 0, got {alpha}")
        if not 0 <= axis < f.dims:
            raise DomainError(f"axis {axis} out of range for {f.dims} variables")
        if np.any(t < 0):
            raise DomainError("fractional integrals need t >= 0")

    @staticmethod
    def _fractional_batch(f: VectorFunction, axis: int, alpha: float, points: np.ndarray,
                          level: int) -> np.ndarray:
        """J^alpha at a batch of points with one tanh-sinh panel per point."""
        unit = tanh_sinh(0.0, 1.0, level)
        x = points[:, axis]
        lag = x[:, None] * unit.dist_left[None, :]
        source = x[:, None] * unit.dist_right[None, :]
        pts = np.repeat(points, unit.size, axis=0)
        pts[:, axis] = source.ravel()
        values = f(pts).reshape(points.shape[0], unit.size, f.codim)
        kernel = gamma_kernel(alpha, lag) * unit.weights[None, :] * x[:, None]
        return np.einsum("pk,pkm->pm", kernel, values)

    def fractional_integral_function(self, f: VectorFunction, axis: int, alpha: float,
                                     cfg: Optional[QuadratureConfig] = None) -> VectorFunction:
        """J^alpha_{t_axis} f as a VectorFunction."""
        cfg = cfg or QuadratureConfig()
        self._check_fractional(f, axis, alpha, np.zeros(f.dims))
        level = cfg.tanh_sinh_level + 2
        env = f.envelope
        ratio = max(math.exp(special.gammaln(e + 1.0) - special.gammaln(e + 1.0 + alpha))
                    for e in (env.eta[axis], env.zeta[axis]))
        envelope = Envelope(
            M=env.M * ratio,
            omega=[max(w, 0.0) if j == axis else w for j, w in enumerate(env.omega)],
            eta=[e + alpha if j == axis else e for j, e in enumerate(env.eta)],
            zeta=[z + alpha if j == axis else z for j, z in enumerate(env.zeta)],
        )

        factors = None
        if f.separable:
            phi = f.factors[axis]
            unit = tanh_sinh(0.0, 1.0, level)

            def integrated(t):
                t = np.asarray(t, dtype=float)
                lag = t[:, None] * unit.dist_left[None, :]
                vals = np.asarray(phi((t[:, None] * unit.dist_right[None, :]).ravel())).reshape(lag.shape)
                return (gamma_kernel(alpha, lag) * vals * unit.weights[None, :]).sum(axis=1) * t

            factors = [integrated if j == axis else fj for j, fj in enumerate(f.factors)]

        return _derive(f, f"J^{alpha}_{axis + 1} {f.name}",
                       lambda t: self._fractional_batch(f, axis, alpha, np.asarray(t, dtype=float), level),
                       envelope, factors)

    def faltung_convolve(self, a: VectorFunction, f: VectorFunction, t: Sequence[float],
                         cfg: Optional[QuadratureConfig] = None) -> np.ndarray:
        """(a *0 f)(t) = integral over [0, t] of a(t - s) f(s) ds."""
        cfg = cfg or QuadratureConfig()
        point = np.asarray(t, dtype=float)
        self._check_convolution(a, f, point)
        previous = None
        value = None
        top = cfg.tanh_sinh_level + (_MAX_EXTRA_LEVELS + 1 if cfg.adaptive else 1)
        for level in range(cfg.tanh_sinh_level, top):
            value = self._convolve_batch(a, f, point[None, :], level)[0]
            if previous is not None and _norm(value - previous) <= cfg.rel_tol * max(_norm(value), 1e-300):
                break
            previous = value
        return value

    @staticmethod
    def _check_convolution(a: VectorFunction, f: VectorFunction, t: np.ndarray):
        if a.codim != 1:
            raise DomainError("the convolution kernel a must be scalar valued")
        if a.dims != f.dims:
            raise DomainError("kernel and function need the same number of variables")
        if t.shape[-1] != f.dims or np.any(t < 0):
            raise DomainError("convolution points need t_j >= 0 in every variable")

    @staticmethod
    def _convolve_batch(a: VectorFunction, f: VectorFunction, points: np.ndarray, level: int) -> np.ndarray:
        """
        Tensor tanh-sinh rule on each box [0, t]: s = t (1 + x) / 2 and
        t - s = t (1 - x) / 2 are formed without cancellation.
        """
        unit = tanh_sinh(0.0, 1.0, level)
        out = np.empty((points.shape[0], f.codim), dtype=complex)
        for i, t in enumerate(points):
            if np.any(t == 0):
                out[i] = 0.0
                continue
            kernel = a.on_grid([tj * unit.dist_right for tj in t])[..., 0]
            values = f.on_grid([tj * unit.dist_left for tj in t])
            weights = [tj * unit.weights for tj in t]
            total = kernel[..., None] * values
            for w in weights:
                total = np.tensordot(w, total, axes=(0, 0))
            out[i] = total
        return out

    def convolution_function(self, a: VectorFunction, f: VectorFunction,
                             cfg: Optional[QuadratureConfig] = None) -> VectorFunction:
        """a *0 f as a VectorFunction; separable when both factors are."""
        cfg = cfg or QuadratureConfig()
        self._check_convolution(a, f, np.zeros(f.dims))
        level = cfg.tanh_sinh_level + 2
        ea, ef = a.envelope, f.envelope
        eta, zeta, scale = [], [], ea.M * ef.M
        for j in range(f.dims):
            exps = [(p, q) for p in (ea.eta[j], ea.zeta[j]) for q in (ef.eta[j], ef.zeta[j])]
            eta.append(min(p + q + 1.0 for p, q in exps))
            zeta.append(max(p + q + 1.0 for p, q in exps))
            scale *= sum(special.beta(p + 1.0, q + 1.0) for p, q in exps)
        envelope = Envelope(M=scale, omega=[max(x, y) for x, y in zip(ea.omega, ef.omega)],
                            eta=eta, zeta=zeta)

        factors = None
        coefficient = None
        if a.separable and f.separable:
            unit = tanh_sinh(0.0, 1.0, level)

            def convolved(ka, kf):
                def factor(t):
                    t = np.asarray(t, dtype=float)
                    lag = (t[:, None] * unit.dist_right[None, :]).ravel()
                    src = (t[:, None] * unit.dist_left[None, :]).ravel()
                    shape = (t.size, unit.size)
                    vals = (np.asarray(ka(lag)).reshape(shape) * np.asarray(kf(src)).reshape(shape))
                    return (vals * unit.weights[None, :]).sum(axis=1) * t
                return factor

            factors = [convolved(ka, kf) for ka, kf in zip(a.factors, f.factors)]
            coefficient = list(a.coefficient_vector()[0] * f.coefficient_vector())

        return VectorFunction(
            name=f"{a.name}*{f.name}", dims=f.dims, codim=f.codim,
            func=lambda t: self._convolve_batch(a, f, np.asarray(t, dtype=float), level),
            envelope=envelope, factors=factors, coefficient=coefficient,
        )

    def convolution_theorem_check(self, a: VectorFunction, f: VectorFunction, p: LaplacePoint,
                                  cfg: Optional[QuadratureConfig] = None) -> float:
        """Relative discrepancy between L(a *0 f)(p) and (L a)(p) (L f)(p)."""
        cfg = _absolute(cfg)
        lhs = self.engine.laplace_nd(self.convolution_function(a, f, cfg), p, cfg).value
        rhs = self.engine.laplace_nd(a, p, cfg).value[0] * self.engine.laplace_nd(f, p, cfg).value
        residual = _norm(lhs - rhs) / max(_norm(lhs), _norm(rhs), 1e-300)
        logger.debug(f"convolution theorem {a.name} * {f.name}: residual {residual:.3e}")
        return residual


# Global operational calculus instance
operational_calculus = OperationalCalculus()
