"""
End-to-end numerical checks on known transform pairs and oracles.
"""

import math

import numpy as np
import pytest

from mdlt.core.inversion import inversion_engine
from mdlt.core.operational import operational_calculus
from mdlt.core.solvers import resolvent_solver
from mdlt.core.transform_core import transform_engine
from mdlt.models.inversion import ContourConfig, ContourShape, PostWidderConfig
from mdlt.models.problems import GridSpec, SecondOrderProblem
from mdlt.models.transform import (
    FunctionRef, LaplacePoint, MembershipVerdict, QuadratureConfig, QuadratureMode,
)


pytestmark = pytest.mark.slow

SECTOR = ContourConfig(shape=ContourShape.SECTOR_RAYS)
REGION_CFG = QuadratureConfig(mode=QuadratureMode.ITERATED, rel_tol=1e-5)
PAIR_CFG = QuadratureConfig(rel_tol=1e-9)


def relative_error(numeric, closed) -> float:
    return float(np.max(np.abs(numeric - closed)) / np.max(np.abs(closed)))


class TestFresnel:
    def test_conditional_value(self, pair):
        f = pair("fresnel2d").function
        cfg = QuadratureConfig(mode=QuadratureMode.ITERATED, rel_tol=1e-6)
        value = transform_engine.laplace_nd(f, LaplacePoint.of(0.0, 0.0), cfg).value
        assert abs(value[0] - math.pi / 8.0) < 2e-3

    def test_regions(self, pair):
        f = pair("fresnel2d").function
        inside = transform_engine.classify_point(f, LaplacePoint.of(0.5, 0.5), REGION_CFG)
        boundary = transform_engine.classify_point(f, LaplacePoint.of(0.0, 0.0), REGION_CFG)
        assert inside.verdict == MembershipVerdict.IN_OMEGA_ABS
        assert boundary.verdict == MembershipVerdict.IN_OMEGA_ONLY


@pytest.mark.parametrize("alpha, beta, omega, points", [
    (1.0, 1.0, 1.0, [(1.6, 1.7), (2.0, 2.0), (2.5, 1.8 + 1.0j)]),
    (0.5, 1.0, 0.5, [(0.8, 0.9), (1.5, 1.2), (2.0, 2.0 - 1.0j)]),
    (1.0, 2.0, 1.0, [(1.6, 1.7), (2.0, 2.0), (2.5, 1.8 + 1.0j)]),
])
def test_mittag_leffler_pair(pair, alpha, beta, omega, points):
    p = pair("ml_pair", alpha=alpha, beta=beta, omega=omega)
    for lam in points:
        point = LaplacePoint.of(*lam)
        numeric = transform_engine.laplace_nd(p.function, point, PAIR_CFG).value
        closed = np.prod([lj ** (alpha - beta) / (lj ** alpha - omega) for lj in lam])
        assert relative_error(numeric, closed) < 1e-5


@pytest.mark.parametrize("lam", [(1.0, 1.0), (2.0, 1.0)])
def test_wright_pair(pair, lam):
    p = pair("wright_pair", gamma=0.5)
    numeric = transform_engine.laplace_nd(p.function, LaplacePoint.of(*lam), PAIR_CFG).value
    closed = np.prod([math.exp(-math.sqrt(lj)) for lj in lam])
    assert relative_error(numeric, closed) < 1e-3


@pytest.mark.parametrize("kernel, function, lam", [
    (("gamma_kernel", {"zeta": 0.5}), ("exp_decay", {}), (1.0, 1.0)),
    (("exp_decay", {"rates": [2.0, 1.0]}), ("poly_exp", {}), (1.0, 1.5)),
    (("sep_pole", {"order": 2.0}), ("exp_decay", {}), (1.5, 1.0 + 0.5j)),
])
def test_convolution_theorem(pair, kernel, function, lam):
    a = pair(kernel[0], **kernel[1]).function
    f = pair(function[0], **function[1]).function
    assert operational_calculus.convolution_theorem_check(a, f, LaplacePoint.of(*lam)) < 1e-5


@pytest.mark.parametrize("name, params", [
    ("exp_decay", {}),
    ("poly_exp", {"powers": [1.0, 2.0], "rates": [1.0, 0.5]}),
    ("gaussian", {}),
    ("sep_pole", {"order": 2.0}),
])
def test_antiderivative_relation(pair, name, params):
    f = pair(name, **params).function
    for lam in [(1.0, 2.0), (0.5 + 1.0j, 1.5), (2.0, 0.7)]:
        assert transform_engine.check_LG_relation(f, LaplacePoint.of(*lam)) < 1e-5


def test_post_widder_convergence(pair):
    F = pair("exp_decay").transform
    target = math.exp(-2.0)
    errors = {}
    for k in (8, 16, 32, 64):
        errors[k] = abs(inversion_engine.post_widder_invert(F, [1.0, 1.0], PostWidderConfig(k=k))[0] - target)
    assert errors[32] <= 0.05
    ks = sorted(errors)
    assert all(errors[b] <= 1.1 * errors[a] for a, b in zip(ks, ks[1:]))


class TestBromwichRoundTrip:
    GRID = np.array([[x, y] for x in (0.5, 1.25, 2.0) for y in (0.5, 1.25, 2.0)])

    def test_product(self, pair):
        result = inversion_engine.bromwich_grid(pair("sep_pole", order=2.0).transform, self.GRID, SECTOR)
        assert np.max(np.abs(result.values[:, 0] - self.GRID.prod(axis=1))) < 1e-4

    def test_exponential(self, pair):
        result = inversion_engine.bromwich_grid(pair("exp_decay").transform, self.GRID, SECTOR)
        assert np.max(np.abs(result.values[:, 0] - np.exp(-self.GRID.sum(axis=1)))) < 1e-4

    def test_wright_composition(self, pair):
        p = pair("wright_pair", gamma=0.5)
        t = np.array([[1.0, 1.0], [0.5, 2.0], [1.5, 0.75]])
        result = inversion_engine.bromwich_grid(p.transform, t, SECTOR)
        assert np.max(np.abs(result.values - p.function(t))) < 1e-3


@pytest.mark.parametrize("name, params, initial, final", [
    ("exp_decay", {}, 1.0, 0.0),
    ("one", {}, 1.0, 1.0),
    ("box_antiderivative", {"widths": 1.0}, 0.0, 1.0),
])
def test_tauberian_limits(pair, name, params, initial, final):
    F = pair(name, **params).transform
    assert abs(inversion_engine.tauberian_initial(F).value[0] - initial) < 1e-3
    assert abs(inversion_engine.tauberian_final(F).value[0] - final) < 1e-3


@pytest.mark.parametrize("name, params", [
    ("one", {}),
    ("exp_decay", {}),
    ("poly_exp", {"powers": [1.0, 0.5], "rates": [0.0, 1.0]}),
    ("sep_shifted_pole", {"shifts": [-0.5, -0.5]}),
    ("box_indicator", {}),
])
def test_up_set_property(pair, rng, name, params):
    f = pair(name, **params).function
    cfg = REGION_CFG.model_copy(update={"region_nodes": 20_000})
    violations = []
    for _ in range(20):
        p = rng.uniform(-1.5, 2.0, size=2)
        q = p + rng.uniform(0.25, 1.5, size=2)
        low = transform_engine.classify_point(f, LaplacePoint.of(*p), cfg)
        high = transform_engine.classify_point(f, LaplacePoint.of(*q), cfg)
        if low.absolutely_convergent and not high.absolutely_convergent:
            violations.append(("abs", tuple(p), tuple(q)))
        if low.bounded and not high.bounded:
            violations.append(("bounded", tuple(p), tuple(q)))
    assert violations == []


def test_second_order_manufactured_solution():
    exp1 = FunctionRef(name="exp_decay", dims=1)
    minus_exp1 = FunctionRef(name="exp_decay", dims=1, params={"scale": -1.0})
    prob = SecondOrderProblem(
        A=[[1.0]], C=[[1.0]], F=[[2.0]],
        source=FunctionRef(name="exp_decay", params={"scale": 4.0}),
        data={"f1": exp1, "f3": minus_exp1, "g1": exp1, "g2": minus_exp1},
        grid=[GridSpec(start=0.5, stop=1.5, count=2), GridSpec(start=0.5, stop=1.5, count=2)],
    )
    result = resolvent_solver.solve_second_order(prob)
    exact = np.exp(-result.points.sum(axis=1))
    assert np.max(np.abs(result.values[:, 0] - exact)) < 1e-3
    assert result.residual_max < 1e-2
    assert not result.best_effort
