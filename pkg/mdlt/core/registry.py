"""
Registry of named test functions and transform pairs.

Every entry is a factory taking (dims, params) and returning a
TransformPair. Separable entries are products of one-axis factors, with an
optional constant vector "coefficient" making them C^m valued.
"""

import math
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from loguru import logger
from scipy import special

from mdlt.core.errors import RegistryError
from mdlt.core.functions import (
    TransformPair, VectorFunction, separable_function, separable_transform,
)
from mdlt.core.special_functions import mittag_leffler, wright
from mdlt.models.inversion import Decay
from mdlt.models.special import MLParams, WrightParams
from mdlt.models.transform import Envelope, FunctionRef, parse_complex


Factory = Callable[[int, Dict[str, Any]], TransformPair]

_ANALYTIC_SECTOR = 0.45 * math.pi


def _per_axis(params: Dict[str, Any], key: str, default: Any, dims: int) -> List[float]:
    value = params.get(key, default)
    if isinstance(value, (list, tuple)):
        if len(value) != dims:
            raise RegistryError(f"parameter {key!r} needs {dims} entries, got {len(value)}")
        return [float(v) for v in value]
    return [float(value)] * dims


def _coefficient(params: Dict[str, Any], scale: float = 1.0) -> List[complex]:
    raw = params.get("coefficient", [1.0])
    if not isinstance(raw, (list, tuple)) or not raw:
        raise RegistryError("coefficient must be a non-empty list")
    return [scale * parse_complex(c) for c in raw]


def _power_factor(shift: float, order: float) -> Callable:
    """lambda -> (lambda + shift)^(-order), principal branch."""
    def factor(lam):
        return np.power(np.asarray(lam, dtype=complex) + shift, -order)
    return factor


def _power_partial(shift: float, order: float) -> Callable:
    """v-th derivative of (lambda + shift)^(-order)."""
    def partial(v: int, lam):
        base = np.asarray(lam, dtype=complex) + shift
        return (-1) ** v * special.poch(order, v) * np.power(base, -order - v)
    return partial


def _monomial_exp(power: float, rate: float, norm: float) -> Callable:
    """t -> norm * t^power e^{-rate t} (0 at t = 0 when power > 0)."""
    def factor(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = norm * np.power(t, power) * np.exp(-rate * t)
        if power == 0:
            out = np.where(t == 0, norm, out)
        return np.where(np.isfinite(out), out, 0.0)
    return factor


def _power_exp_pair(name: str, dims: int, powers: List[float], rates: List[float],
                    params: Dict[str, Any], scale: float = 1.0) -> TransformPair:
    """prod_j t^p e^{-a t} / Gamma(p+1) <-> prod_j (lambda + a)^{-(p+1)}, times scale."""
    if any(p <= -1 for p in powers):
        raise RegistryError(f"{name}: powers must exceed -1")
    coeff = _coefficient(params, scale)
    norms = [1.0 / special.gamma(p + 1.0) for p in powers]
    size = max(abs(c) for c in coeff)
    envelope = Envelope(
        M=size * float(np.prod(norms)),
        omega=[-a for a in rates],
        eta=list(powers),
        zeta=list(powers),
    )
    function = separable_function(
        name, [_monomial_exp(p, a, nrm) for p, a, nrm in zip(powers, rates, norms)],
        envelope, coeff,
    )
    # |lambda + a| >= |lambda| / (1 + |a|) on Re lambda >= max(-a, 0) + 1
    decay = Decay(
        M=(size or 1.0) * float(np.prod([(1.0 + abs(a)) ** (p + 1.0) for p, a in zip(powers, rates)])),
        omega=[max(-a, 0.0) for a in rates],
        eps=list(powers),
    )
    transform = separable_transform(
        f"L[{name}]", [_power_factor(a, p + 1.0) for p, a in zip(powers, rates)], decay,
        factor_partials=[_power_partial(a, p + 1.0) for p, a in zip(powers, rates)],
        coefficient=coeff,
        sector_angle=_ANALYTIC_SECTOR if all(a >= 0 for a in rates) else None,
        source=function,
    )
    return TransformPair(function=function, transform=transform, abscissa=[-a for a in rates])


class PairRegistry:
    """
    Named factories for functions with known envelopes and transforms.

    Features:
    - Separable power-exponential family with analytic transform partials
    - Mittag-Leffler and Wright transform pairs
    - Fresnel and Gaussian test functions without closed-form transforms
    - Box indicator and its antiderivative
    """

    def __init__(self):
        self._factories: Dict[str, Factory] = {}
        self._register_builtin()

    def register(self, name: str, factory: Factory):
        if name in self._factories:
            logger.warning(f"Replacing registry entry {name!r}")
        self._factories[name] = factory

    def names(self) -> List[str]:
        return sorted(self._factories)

    def build(self, ref: FunctionRef) -> TransformPair:
        """Instantiate a registry entry."""
        factory = self._factories.get(ref.name)
        if factory is None:
            raise RegistryError(f"unknown function {ref.name!r}; known: {', '.join(self.names())}")
        try:
            pair = factory(ref.dims, dict(ref.params))
        except RegistryError:
            raise
        except (ValueError, TypeError) as e:
            raise RegistryError(f"{ref.name}: {e}") from e
        logger.debug(f"Built registry entry {ref.name} (dims={ref.dims})")
        return pair

    def function(self, ref: FunctionRef) -> VectorFunction:
        return self.build(ref).function

    def transform(self, ref: FunctionRef):
        pair = self.build(ref)
        if pair.transform is None:
            raise RegistryError(f"{ref.name} has no closed-form transform")
        return pair.transform

    # ------------------------------------------------------------------
    # Built-in entries
    # ------------------------------------------------------------------

    def _register_builtin(self):
        self._factories.update({
            "one": self._one,
            "zero": self._zero,
            "exp_decay": self._exp_decay,
            "poly_exp": self._poly_exp,
            "gamma_kernel": self._gamma_kernel,
            "sep_pole": self._sep_pole,
            "sep_shifted_pole": self._sep_shifted_pole,
            "fresnel2d": self._fresnel,
            "gaussian": self._gaussian,
            "ml_pair": self._ml_pair,
            "wright_pair": self._wright_pair,
            "box_indicator": self._box_indicator,
            "box_antiderivative": self._box_antiderivative,
        })

    @staticmethod
    def _one(dims: int, params: Dict[str, Any]) -> TransformPair:
        return _power_exp_pair("one", dims, [0.0] * dims, [0.0] * dims, params)

    @staticmethod
    def _zero(dims: int, params: Dict[str, Any]) -> TransformPair:
        codim = int(params.get("codim", 1))
        return _power_exp_pair("zero", dims, [0.0] * dims, [0.0] * dims,
                               {"coefficient": [0.0] * codim})

    @staticmethod
    def _exp_decay(dims: int, params: Dict[str, Any]) -> TransformPair:
        rates = _per_axis(params, "rates", 1.0, dims)
        scale = float(params.get("scale", 1.0))
        return _power_exp_pair("exp_decay", dims, [0.0] * dims, rates, params, scale)

    @staticmethod
    def _poly_exp(dims: int, params: Dict[str, Any]) -> TransformPair:
        """scale * prod_j t^p_j e^{-a_j t} (not normalized by Gamma)."""
        powers = _per_axis(params, "powers", 1.0, dims)
        rates = _per_axis(params, "rates", 0.0, dims)
        scale = float(params.get("scale", 1.0))
        gammas = float(np.prod([special.gamma(p + 1.0) for p in powers]))
        return _power_exp_pair("poly_exp", dims, powers, rates, params, scale * gammas)

    @staticmethod
    def _gamma_kernel(dims: int, params: Dict[str, Any]) -> TransformPair:
        zetas = _per_axis(params, "zeta", 0.5, dims)
        if any(z <= 0 for z in zetas):
            raise RegistryError("gamma_kernel needs zeta > 0")
        return _power_exp_pair("gamma_kernel", dims, [z - 1.0 for z in zetas], [0.0] * dims, params)

    @staticmethod
    def _sep_pole(dims: int, params: Dict[str, Any]) -> TransformPair:
        orders = _per_axis(params, "order", 1.0, dims)
        if any(k <= 0 for k in orders):
            raise RegistryError("sep_pole needs order > 0")
        return _power_exp_pair("sep_pole", dims, [k - 1.0 for k in orders], [0.0] * dims, params)

    @staticmethod
    def _sep_shifted_pole(dims: int, params: Dict[str, Any]) -> TransformPair:
        orders = _per_axis(params, "order", 1.0, dims)
        shifts = _per_axis(params, "shifts", 1.0, dims)
        if any(k <= 0 for k in orders):
            raise RegistryError("sep_shifted_pole needs order > 0")
        return _power_exp_pair("sep_shifted_pole", dims, [k - 1.0 for k in orders], shifts, params)

    @staticmethod
    def _fresnel(dims: int, params: Dict[str, Any]) -> TransformPair:
        coeff = _coefficient(params)
        factors = [lambda t: np.sin(np.asarray(t, dtype=float) ** 2)] * dims
        envelope = Envelope.uniform(dims, M=max(abs(c) for c in coeff))
        function = separable_function("fresnel2d", factors, envelope, coeff)
        return TransformPair(function=function, abscissa=[0.0] * dims)

    @staticmethod
    def _gaussian(dims: int, params: Dict[str, Any]) -> TransformPair:
        coeff = _coefficient(params)
        size = max(abs(c) for c in coeff)
        function = separable_function(
            "gaussian", [lambda t: np.exp(-np.asarray(t, dtype=float) ** 2)] * dims,
            Envelope.uniform(dims, M=size), coeff,
        )
        half_sqrt_pi = 0.5 * math.sqrt(math.pi)
        transform = separable_transform(
            "L[gaussian]",
            [lambda lam: half_sqrt_pi * special.erfcx(0.5 * np.asarray(lam, dtype=complex))] * dims,
            Decay.uniform(dims, M=size),
            coefficient=coeff,
            source=function,
        )
        return TransformPair(function=function, transform=transform, abscissa=[-math.inf] * dims)

    @staticmethod
    def _ml_pair(dims: int, params: Dict[str, Any]) -> TransformPair:
        """t^{beta-1} E_{alpha,beta}(omega t^alpha) <-> lambda^{alpha-beta} / (lambda^alpha - omega)."""
        p = MLParams(alpha=float(params.get("alpha", 1.0)), beta=float(params.get("beta", 1.0)))
        omega = float(params.get("omega", 1.0))
        if p.beta <= 0:
            raise RegistryError("ml_pair needs beta > 0")
        if p.alpha > 2:
            raise RegistryError("ml_pair supports alpha <= 2")
        coeff = _coefficient(params)
        growth = omega ** (1.0 / p.alpha) if omega > 0 else 0.0

        def factor(t):
            t = np.asarray(t, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                power = np.where(t > 0, np.power(np.where(t > 0, t, 1.0), p.beta - 1.0), 0.0)
            if p.beta == 1.0:
                power = np.where(t == 0, 1.0, power)
            return power * mittag_leffler(p, omega * np.power(t, p.alpha))

        def transform_factor(lam):
            lam = np.asarray(lam, dtype=complex)
            return np.power(lam, p.alpha - p.beta) / (np.power(lam, p.alpha) - omega)

        envelope = Envelope(
            M=(2.0 / p.alpha) ** dims * max(abs(c) for c in coeff),
            omega=[growth] * dims,
            eta=[min(p.beta - 1.0, 0.0)] * dims,
            zeta=[0.0] * dims,
        )
        function = separable_function("ml_pair", [factor] * dims, envelope, coeff)
        decay = Decay.uniform(dims, M=2.0 * max(abs(c) for c in coeff), omega=growth,
                              eps=max(p.beta - 1.0, 0.0))
        transform = separable_transform("L[ml_pair]", [transform_factor] * dims, decay,
                                        coefficient=coeff, source=function)
        return TransformPair(function=function, transform=transform, abscissa=[growth] * dims)

    @staticmethod
    def _wright_pair(dims: int, params: Dict[str, Any]) -> TransformPair:
        """gamma s t^{-1-gamma} Phi_gamma(s t^{-gamma}) <-> exp(-s lambda^gamma)."""
        p = WrightParams(gamma=float(params.get("gamma", 0.5)))
        gamma = p.gamma
        scales = _per_axis(params, "s", 1.0, dims)
        if any(s <= 0 for s in scales):
            raise RegistryError("wright_pair needs s > 0")
        coeff = _coefficient(params)

        def density(s: float):
            def factor(t):
                t = np.asarray(t, dtype=float)
                out = np.zeros_like(t)
                pos = t > 0
                if np.any(pos):
                    tp = t[pos]
                    out[pos] = gamma * s * tp ** (-1.0 - gamma) * wright(p, s * tp ** (-gamma))
                return out
            return factor

        def exp_factor(s: float):
            def factor(lam):
                return np.exp(-s * np.power(np.asarray(lam, dtype=complex), gamma))
            return factor

        factors = [density(s) for s in scales]
        # the density peaks near t ~ s^{1/gamma}
        peaks = [float(np.max(f(np.geomspace(1e-3, 1e3, 400) * s ** (1.0 / gamma))))
                 for f, s in zip(factors, scales)]
        envelope = Envelope.uniform(dims, M=float(np.prod(peaks)) * max(abs(c) for c in coeff))
        function = separable_function("wright_pair", factors, envelope, coeff)

        order = 2.0 / gamma
        damping = math.cos(0.5 * gamma * math.pi)
        bound = float(np.prod([(order / (damping * s * math.e)) ** order for s in scales]))
        decay = Decay.uniform(dims, M=bound * max(abs(c) for c in coeff), eps=1.0)
        sector = min(_ANALYTIC_SECTOR, 0.9 * 0.5 * math.pi * (1.0 / gamma - 1.0))
        transform = separable_transform("L[wright_pair]", [exp_factor(s) for s in scales], decay,
                                        coefficient=coeff, sector_angle=sector, source=function)
        return TransformPair(function=function, transform=transform, abscissa=[0.0] * dims)

    @staticmethod
    def _box_indicator(dims: int, params: Dict[str, Any]) -> TransformPair:
        widths = _per_axis(params, "widths", 1.0, dims)
        coeff = _coefficient(params)

        def indicator(w: float):
            return lambda t: (np.asarray(t, dtype=float) < w).astype(float)

        def transform_factor(w: float):
            return lambda lam: -np.expm1(-w * np.asarray(lam, dtype=complex)) / np.asarray(lam, dtype=complex)

        function = separable_function("box_indicator", [indicator(w) for w in widths],
                                      Envelope.uniform(dims, M=max(abs(c) for c in coeff)), coeff,
                                      kinks=[[w] for w in widths])
        transform = separable_transform(
            "L[box_indicator]", [transform_factor(w) for w in widths],
            Decay.uniform(dims, M=2.0 ** dims * max(abs(c) for c in coeff)),
            coefficient=coeff, source=function,
        )
        return TransformPair(function=function, transform=transform, abscissa=[-math.inf] * dims)

    @staticmethod
    def _box_antiderivative(dims: int, params: Dict[str, Any]) -> TransformPair:
        """prod_j min(t_j, w_j) <-> prod_j (1 - e^{-w_j lambda_j}) / lambda_j^2."""
        widths = _per_axis(params, "widths", 1.0, dims)
        coeff = _coefficient(params)

        def ramp(w: float):
            return lambda t: np.minimum(np.asarray(t, dtype=float), w)

        def transform_factor(w: float):
            def factor(lam):
                lam = np.asarray(lam, dtype=complex)
                return -np.expm1(-w * lam) / lam ** 2
            return factor

        envelope = Envelope(M=max(abs(c) for c in coeff), omega=[0.0] * dims,
                            eta=[1.0] * dims, zeta=[0.0] * dims)
        function = separable_function("box_antiderivative", [ramp(w) for w in widths], envelope, coeff,
                                      kinks=[[w] for w in widths])
        transform = separable_transform(
            "L[box_antiderivative]", [transform_factor(w) for w in widths],
            Decay.uniform(dims, M=2.0 ** dims * max(abs(c) for c in coeff), eps=1.0),
            coefficient=coeff, source=function,
        )
        return TransformPair(function=function, transform=transform, abscissa=[0.0] * dims)


# Global registry instance
pair_registry = PairRegistry()
