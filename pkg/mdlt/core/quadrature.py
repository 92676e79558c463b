"""
Quadrature building blocks: composite Gauss-Legendre panels, tanh-sinh
rules with exact endpoint distances, spectral cumulative integration and
tensor contractions.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import legendre

# tanh-sinh truncation of the u-axis; weights beyond are below 1e-60
TANH_SINH_UMAX = 4.5


@dataclass(frozen=True)
class AxisRule:
    """Nodes and weights along one axis.

    dist_left / dist_right hold node - a and b - node computed without
    cancellation (used for weakly singular kernels at the endpoints).
    """
    nodes: np.ndarray
    weights: np.ndarray
    dist_left: Optional[np.ndarray] = None
    dist_right: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.nodes.size

    def scaled(self, factor: np.ndarray) -> "AxisRule":
        return AxisRule(self.nodes, self.weights * factor, self.dist_left, self.dist_right)


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Reference Gauss-Legendre rule on [-1, 1]."""
    x, w = legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_panels(breakpoints: Sequence[float], order: int) -> AxisRule:
    """Composite Gauss-Legendre rule over consecutive breakpoints."""
    b = np.asarray(breakpoints, dtype=float)
    x, w = gauss_legendre(order)
    half = 0.5 * np.diff(b)
    mid = 0.5 * (b[1:] + b[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    left = (half[:, None] * (1.0 + x[None, :]) + (b[:-1] - b[0])[:, None]).ravel()
    right = (half[:, None] * (1.0 - x[None, :]) + (b[-1] - b[1:])[:, None]).ravel()
    return AxisRule(nodes, weights, left, right)


@lru_cache(maxsize=16)
def _tanh_sinh_reference(level: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weights and stable (1+x), (1-x) of the tanh-sinh rule on [-1, 1] with h = 2^-level."""
    h = 2.0 ** (-level)
    count = int(np.ceil(TANH_SINH_UMAX / h))
    u = h * np.arange(-count, count + 1)
    s = 0.5 * np.pi * np.sinh(u)
    cosh_s = np.cosh(s)
    weights = h * 0.5 * np.pi * np.cosh(u) / cosh_s ** 2
    one_plus = np.exp(s) / cosh_s
    one_minus = np.exp(-s) / cosh_s
    for arr in (weights, one_plus, one_minus):
        arr.setflags(write=False)
    return weights, one_plus, one_minus


def tanh_sinh(a: float, b: float, level: int) -> AxisRule:
    """Tanh-sinh rule on [a, b]; endpoint distances never round to zero."""
    w, one_plus, one_minus = _tanh_sinh_reference(level)
    half = 0.5 * (b - a)
    left = half * one_plus
    right = half * one_minus
    nodes = np.where(left <= right, a + left, b - right)
    return AxisRule(nodes, half * w, left, right)


def uniform_breakpoints(a: float, b: float, panels: int) -> np.ndarray:
    return np.linspace(a, b, panels + 1)


def graded_breakpoints(b: float, panels: int, levels: int, ratio: float = 0.15) -> np.ndarray:
    """Uniform panels on [0, b] with the first panel split geometrically toward 0."""
    uniform = uniform_breakpoints(0.0, b, panels)
    first = uniform[1]
    grading = first * ratio ** np.arange(levels, 0, -1)
    return np.concatenate([[0.0], grading, uniform[1:]])


def axis_rule(
    a: float,
    b: float,
    panels: int,
    order: int,
    level: int,
    origin_singular: bool,
    all_tanh_sinh: bool = False,
    kinks: Sequence[float] = (),
) -> AxisRule:
    """
    Composite rule on [a, b].

    The panel touching t = 0 uses tanh-sinh when origin_singular is set;
    with all_tanh_sinh every panel does. Kinks inside (a, b) become extra
    breakpoints.
    """
    breaks = uniform_breakpoints(a, b, panels)
    inside = [k for k in kinks if a < k < b]
    if inside:
        breaks = np.union1d(breaks, inside)
        panels = breaks.size - 1
    if all_tanh_sinh:
        parts = [tanh_sinh(lo, hi, level) for lo, hi in zip(breaks[:-1], breaks[1:])]
        return concatenate_rules(parts)
    if origin_singular and a == 0.0:
        head = tanh_sinh(breaks[0], breaks[1], level)
        if panels == 1:
            return head
        return concatenate_rules([head, gl_panels(breaks[1:], order)])
    return gl_panels(breaks, order)


def concatenate_rules(parts: Sequence[AxisRule]) -> AxisRule:
    nodes = np.concatenate([p.nodes for p in parts])
    weights = np.concatenate([p.weights for p in parts])
    return AxisRule(nodes, weights)


def smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        left = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        right = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return left / (left + right)


def taper(u: np.ndarray) -> np.ndarray:
    """Window equal to 1 on [0, 1/2], 0 beyond 1, smooth in between."""
    return 1.0 - smooth_step(2.0 * np.abs(u) - 1.0)


@lru_cache(maxsize=16)
def _legendre_cumulative(order: int) -> np.ndarray:
    """C[i, j] = integral from -1 to x_i of the j-th Lagrange basis polynomial."""
    x, _ = gauss_legendre(order)
    vander = legendre.legvander(x, order - 1)
    primitive = np.empty((order, order))
    for k in range(order):
        coeffs = np.zeros(order)
        coeffs[k] = 1.0
        primitive[:, k] = legendre.legval(x, legendre.legint(coeffs, lbnd=-1.0))
    matrix = primitive @ np.linalg.inv(vander)
    matrix.setflags(write=False)
    return matrix


def cumulative_operator(breakpoints: Sequence[float], order: int) -> Tuple[AxisRule, np.ndarray]:
    """
    Composite Gauss-Legendre rule plus the matrix K with
    (K @ values)[i] ~ integral_0^{node_i} of the sampled function.
    """
    rule = gl_panels(breakpoints, order)
    b = np.asarray(breakpoints, dtype=float)
    local = _legendre_cumulative(order)
    panels = b.size - 1
    size = panels * order
    matrix = np.zeros((size, size))
    _, w_ref = gauss_legendre(order)
    for p in range(panels):
        half = 0.5 * (b[p + 1] - b[p])
        rows = slice(p * order, (p + 1) * order)
        matrix[rows, rows] = half * local
        if p > 0:
            matrix[rows, : p * order] = np.tile(rule.weights[: p * order], (order, 1))
    return rule, matrix


def contract(values: np.ndarray, weights: Sequence[np.ndarray]) -> np.ndarray:
    """sum over k_1..k_n of w_1[k_1]...w_n[k_n] values[k_1, ..., k_n, :]."""
    out = values
    for w in weights:
        out = np.tensordot(w, out, axes=(0, 0))
    return out


def contract_points(values: np.ndarray, kernels: Sequence[np.ndarray]) -> np.ndarray:
    """
    Point-wise kernel contraction.

    values has shape (K_1, ..., K_n, m); kernels[j] has shape (P, K_j).
    Returns out[p] = sum_k prod_j kernels[j][p, k_j] values[k, :], shape (P, m).
    """
    out = np.einsum("pk,k...->p...", kernels[0], values)
    for kernel in kernels[1:]:
        out = np.einsum("pk,pk...->p...", kernel, out)
    return out


def geometric_tail(partials: Sequence[float]) -> Tuple[bool, float]:
    """
    Extrapolated tail of an increasing sequence of partial integrals.

    Returns (converging, tail estimate). Converging requires the last
    increment ratio r < 1; the tail is d r / (1 - r).
    """
    a = np.asarray(partials, dtype=float)
    if not np.all(np.isfinite(a)):
        return False, float("inf")
    d = np.diff(a)
    if d.size < 2:
        return False, float("inf")
    last, prev = abs(d[-1]), abs(d[-2])
    scale = max(abs(a[-1]), np.finfo(float).tiny)
    if last <= 1e-15 * scale:
        return True, last
    if prev == 0 or last >= prev:
        return False, float("inf")
    r = last / prev
    return True, last * r / (1.0 - r)


def wynn_epsilon(partials: Sequence[np.ndarray]) -> np.ndarray:
    """
    Epsilon-algorithm (iterated Shanks) limit of a sequence of partial sums.

    Works component-wise on arrays of any shape; the estimate is the last
    entry of the deepest even column. Components whose differences vanish
    keep the estimate reached before the table degenerates.
    """
    seq = np.asarray(partials, dtype=complex)
    count = seq.shape[0]
    flat = seq.reshape(count, -1)
    estimate = flat[-1].copy()
    if count < 3:
        return estimate.reshape(seq.shape[1:])

    frozen = np.zeros(flat.shape[1], dtype=bool)
    previous = np.zeros((count + 1, flat.shape[1]), dtype=complex)
    current = flat
    column = 0
    while current.shape[0] > 1:
        delta = current[1:] - current[:-1]
        stalled = np.abs(delta) <= 1e-15 * np.maximum(np.abs(current[1:]), np.finfo(float).tiny)
        frozen |= stalled.any(axis=0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            following = previous[1:current.shape[0]] + 1.0 / np.where(stalled, 1.0, delta)
        previous, current = current, following
        column += 1
        if column % 2 == 0:
            estimate = np.where(frozen, estimate, current[-1])
    estimate = np.where(np.isfinite(estimate), estimate, flat[-1])
    return estimate.reshape(seq.shape[1:])
