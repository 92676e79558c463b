"""
Gamma kernel, two-parameter Mittag-Leffler and Wright functions.

All functions accept scalars or numpy arrays and return the same shape.
Reciprocal Gamma values come from scipy.special, so poles of Gamma
contribute exactly 0 (the 1/Gamma convention).
"""

from typing import Callable, Optional, Tuple

import numpy as np
from loguru import logger
from scipy import special
from scipy.integrate import quad_vec

from mdlt.core.errors import DomainError, SeriesNonConvergenceError
from mdlt.models.special import MLParams, SeriesAccuracy, WrightParams


ML_VALIDATED_RADIUS = 50.0

_EPS = np.finfo(float).eps
_CANCELLATION_SLACK = 16.0
_STOP_RUN = 3


def gamma_kernel(zeta: float, t):
    """g_zeta(t) = t^(zeta-1) / Gamma(zeta), with g_zeta(0) = 0 unless zeta = 1."""
    if not zeta > 0:
        raise DomainError(f"gamma_kernel needs zeta > 0, got {zeta}")
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("gamma_kernel is defined for t >= 0 only")

    out = np.zeros_like(t)
    positive = t > 0
    out[positive] = np.exp((zeta - 1.0) * np.log(t[positive]) - special.gammaln(zeta))
    if zeta == 1.0:
        out[~positive] = 1.0
    return float(out) if scalar else out


def _reciprocal_gamma_log(x: float) -> Tuple[float, float]:
    """(log|1/Gamma(x)|, sign) with sign 0 at the poles x in -N0."""
    if x <= 0 and float(x).is_integer():
        return 0.0, 0.0
    return -float(special.gammaln(x)), float(special.gammasgn(x))


def _sum_series(
    w: np.ndarray,
    direct: Callable[[int], float],
    logcoef: Callable[[int], Tuple[float, float]],
    acc: SeriesAccuracy,
    first_counted: int,
    label: str,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sum sum_k c_k w^k elementwise with compensated accumulation.

    Stops once _STOP_RUN consecutive non-increasing terms fall below
    rel_tol * |partial sum| for every element. Returns the sums and a mask
    of elements whose largest term makes the result unreliable at rel_tol.
    """
    w = np.asarray(w, dtype=complex)
    total = np.zeros_like(w)
    largest = np.zeros(w.shape)
    done = w == 0

    c0 = direct(0)
    total[done] = c0

    active = ~done
    if not np.any(active):
        return total, np.zeros(w.shape, dtype=bool)

    wa = w[active]
    log_w = np.log(wa)
    abs_log_w = np.log(np.abs(wa))
    sr = np.zeros(wa.shape)
    si = np.zeros(wa.shape)
    cr = np.zeros(wa.shape)
    ci = np.zeros(wa.shape)
    s = np.zeros_like(wa)
    big = np.zeros(wa.shape)
    eff = np.full(wa.shape, np.inf)
    streak = np.zeros(wa.shape, dtype=int)
    finished = np.zeros(wa.shape, dtype=bool)

    terms_used = 0
    for k in range(acc.max_terms):
        terms_used = k + 1
        coef = direct(k)
        if coef != 0 and np.isfinite(coef) and 1e-290 < abs(coef) < 1e290 and np.max(k * abs_log_w) < 650:
            term = coef * wa ** k
        else:
            log_c, sign = logcoef(k)
            if sign == 0:
                term = np.zeros_like(wa)
            else:
                with np.errstate(over="ignore", under="ignore"):
                    term = sign * np.exp(log_c + k * log_w)

        sr, cr = _neumaier(sr, cr, term.real)
        si, ci = _neumaier(si, ci, term.imag)
        s = sr + 1j * si

        magnitude = np.abs(term)
        if not np.all(np.isfinite(magnitude)):
            raise SeriesNonConvergenceError(f"{label}: terms overflow", terms=terms_used)
        big = np.maximum(big, magnitude)
        previous = eff
        eff = np.where(magnitude > 0, magnitude, eff)
        if k >= first_counted:
            small = (eff <= acc.rel_tol * np.abs(s + (cr + 1j * ci))) & (eff <= previous)
            streak = np.where(small, streak + 1, 0)
            finished |= streak >= _STOP_RUN
        if np.all(finished):
            break
    else:
        raise SeriesNonConvergenceError(
            f"{label}: tail bound not met within max_terms={acc.max_terms}", terms=acc.max_terms
        )

    total[active] = (sr + cr) + 1j * (si + ci)
    largest[active] = big
    unreliable = largest * _CANCELLATION_SLACK * _EPS > acc.rel_tol * np.abs(total)
    unreliable &= active
    logger.debug(f"{label}: summed {terms_used} terms for {wa.size} arguments")
    return total, unreliable


def _neumaier(total: np.ndarray, compensation: np.ndarray, term: np.ndarray):
    """One step of Neumaier (improved Kahan) summation."""
    new = total + term
    compensation = compensation + np.where(
        np.abs(total) >= np.abs(term), (total - new) + term, (term - new) + total
    )
    return new, compensation


def _finish(values: np.ndarray, like, scalar: bool):
    if np.isrealobj(like):
        values = values.real
    if scalar:
        return values.reshape(()).item()
    return values


def mittag_leffler(p: MLParams, z, acc: Optional[SeriesAccuracy] = None):
    """
    E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta) on |z| <= 50.

    Terms are accumulated with Neumaier compensation for every z. There is
    no double-double accumulator for large |z| with alpha < 1: on the
    negative axis the largest term grows like exp(|z|^(1/alpha)) while the
    value is O(1/|z|), so at alpha = 1/2, z = -12 the cancellation already
    exceeds 60 digits. Such arguments raise SeriesNonConvergenceError
    instead of returning a degraded value.
    """
    acc = acc or SeriesAccuracy()
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z)).astype(complex)
    if not np.all(np.isfinite(zz)):
        raise DomainError("mittag_leffler needs finite arguments")
    if np.any(np.abs(zz) > ML_VALIDATED_RADIUS):
        raise DomainError(f"mittag_leffler is validated on |z| <= {ML_VALIDATED_RADIUS} only")

    alpha, beta = p.alpha, p.beta
    first_counted = max(0, int(np.floor(-beta / alpha)) + 1)
    values, unreliable = _sum_series(
        zz.ravel(),
        direct=lambda k: float(special.rgamma(alpha * k + beta)),
        logcoef=lambda k: _reciprocal_gamma_log(alpha * k + beta),
        acc=acc,
        first_counted=first_counted,
        label=f"E_({alpha},{beta})",
    )
    if np.any(unreliable):
        bad = zz.ravel()[unreliable][0]
        raise SeriesNonConvergenceError(
            f"E_({alpha},{beta})({bad}) loses the requested accuracy to cancellation"
        )
    return _finish(values.reshape(zz.shape), z, scalar)


def _kanter(gamma: float, phi: np.ndarray) -> np.ndarray:
    power = 1.0 / (1.0 - gamma)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        ratio = np.sin(gamma * phi) / np.sin(phi)
        return ratio ** power * np.sin((1.0 - gamma) * phi) / np.sin(gamma * phi)


def _wright_levy(gamma: float, z: np.ndarray) -> np.ndarray:
    """Phi_gamma on z > 0 from the one-sided stable density representation."""
    power = 1.0 / (1.0 - gamma)
    scale = z ** power
    floor = gamma ** (gamma * power) * (1.0 - gamma)

    def integrand(phi):
        a = _kanter(gamma, phi)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            val = a * np.exp(-scale * (a - floor))
        return np.where(np.isfinite(val), val, 0.0)

    integral, _ = quad_vec(integrand, 0.0, np.pi, epsrel=1e-12, epsabs=0.0, norm="max", limit=400)
    prefactor = np.exp(gamma * power * np.log(z) - scale * floor) / (np.pi * (1.0 - gamma))
    return prefactor * integral


def wright(p: WrightParams, z, acc: Optional[SeriesAccuracy] = None):
    """Phi_gamma(z) = sum_k (-z)^k / (k! Gamma(1 - gamma - gamma k))."""
    acc = acc or SeriesAccuracy()
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z)).astype(complex)
    if not np.all(np.isfinite(zz)):
        raise DomainError("wright needs finite arguments")

    gamma = p.gamma
    flat = zz.ravel()
    values = np.zeros_like(flat)

    # on the positive axis the alternating series cancels like exp(c z^(1/(1-gamma)))
    on_axis = (np.abs(flat.imag) <= 1e-15 * np.abs(flat)) & (flat.real > 0)
    growth = (1.0 - gamma) * gamma ** (gamma / (1.0 - gamma)) * np.abs(flat) ** (1.0 / (1.0 - gamma))
    levy = on_axis & (growth > 2.0)
    series = ~levy

    if np.any(levy):
        values[levy] = _wright_levy(gamma, flat.real[levy])
    if not np.any(series):
        return _finish(values.reshape(zz.shape), z, scalar)

    part, unreliable = _sum_series(
        -flat[series],
        direct=lambda k: float(special.rgamma(1.0 - gamma - gamma * k) / special.factorial(k)),
        logcoef=lambda k: (
            _reciprocal_gamma_log(1.0 - gamma - gamma * k)[0] - float(special.gammaln(k + 1.0)),
            _reciprocal_gamma_log(1.0 - gamma - gamma * k)[1],
        ),
        acc=acc,
        first_counted=0,
        label=f"Phi_{gamma}",
    )
    if np.any(unreliable):
        bad = flat[series][unreliable][0]
        raise SeriesNonConvergenceError(f"Phi_{gamma}({bad}) loses accuracy to cancellation")
    values[series] = part
    logger.debug(f"Phi_{gamma}: {int(levy.sum())} arguments via the stable-density integral")
    return _finish(values.reshape(zz.shape), z, scalar)
