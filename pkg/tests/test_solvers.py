import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mdlt.core.errors import ConfigurationError, DecayCheckError, DomainError, SingularPencilError
from mdlt.core.solvers import resolvent_solver
from mdlt.models.operational import MultiIndex
from mdlt.models.problems import (
    FractionalKind, FractionalProblem2D, GridSpec, SecondOrderProblem, VolterraProblem,
)
from mdlt.models.transform import FunctionRef, LaplacePoint


def single_point(t1: float, t2: float):
    return [GridSpec(start=t1, stop=t1, count=1), GridSpec(start=t2, stop=t2, count=1)]


def bessel_series(x: float) -> float:
    """sum_k x^k / (k!)^2."""
    total, term, k = 0.0, 1.0, 0
    while term > 1e-17 * max(total, 1.0):
        total += term
        k += 1
        term *= x / (k * k)
    return total


def manufactured_problem(layout: str = "standard", **extra) -> SecondOrderProblem:
    """u_xx + u_yy + 2u = 4 e^{-x-y}, solved by u = e^{-x-y}."""
    exp1 = FunctionRef(name="exp_decay", dims=1)
    minus_exp1 = FunctionRef(name="exp_decay", dims=1, params={"scale": -1.0})
    if layout == "standard":
        data = {"f1": exp1, "f3": minus_exp1, "g1": exp1, "g2": minus_exp1}
    else:
        data = {"f1": exp1, "f2": minus_exp1, "g1": exp1, "g3": minus_exp1}
    return SecondOrderProblem(
        A=[[1.0]], C=[[1.0]], F=[[2.0]],
        source=FunctionRef(name="exp_decay", params={"scale": 4.0}),
        data=data, layout=layout, **extra,
    )


class TestSchedule:
    def test_default_order_listing(self):
        schedule = resolvent_solver.initial_condition_schedule(MultiIndex.model_validate([3, 2, 0]))
        assert schedule.lines() == [
            "u^(3,0,0)(t1,0,t3)",
            "u^(3,1,0)(t1,0,t3)",
            "u^(0,0,0)(0,t2,t3)",
            "u^(1,0,0)(0,t2,t3)",
            "u^(2,0,0)(0,t2,t3)",
        ]

    def test_explicit_order_matches_default(self):
        alpha = MultiIndex.model_validate([3, 2, 0])
        assert (resolvent_solver.initial_condition_schedule(alpha, [3, 2, 1]).lines()
                == resolvent_solver.initial_condition_schedule(alpha).lines())

    def test_first_axis_processed_first(self):
        schedule = resolvent_solver.initial_condition_schedule(MultiIndex.model_validate([3, 2, 0]), [2, 3, 1])
        assert schedule.lines() == [
            "u^(0,2,0)(0,t2,t3)",
            "u^(1,2,0)(0,t2,t3)",
            "u^(2,2,0)(0,t2,t3)",
            "u^(0,0,0)(t1,0,t3)",
            "u^(0,1,0)(t1,0,t3)",
        ]
        assert [e.zeroed_axis for e in schedule.entries] == [1, 1, 1, 2, 2]

    def test_cardinality_equals_order(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 5))
            alpha = [int(a) for a in rng.integers(0, 6, size=n)]
            if sum(alpha) == 0:
                alpha[0] = 1
            order = [int(r) for r in rng.permutation(n) + 1]
            schedule = resolvent_solver.initial_condition_schedule(MultiIndex.model_validate(alpha), order)
            assert len(schedule) == sum(alpha)
            for entry in schedule.entries:
                j = entry.zeroed_axis - 1
                assert entry.derivative[j] < alpha[j]

    def test_zero_multi_index(self):
        with pytest.raises(DomainError):
            resolvent_solver.initial_condition_schedule(MultiIndex.model_validate([0, 0]))

    def test_order_must_be_permutation(self):
        with pytest.raises(DomainError):
            resolvent_solver.initial_condition_schedule(MultiIndex.model_validate([1, 1]), [1, 1])

    def test_union_collapses_duplicates(self):
        schedule = resolvent_solver.multi_index_schedule(
            [MultiIndex.model_validate([1, 0]), MultiIndex.model_validate([2, 0])])
        assert schedule.lines() == ["u^(0,0)(0,t2)", "u^(1,0)(0,t2)"]

    def test_union_needs_one_length(self):
        with pytest.raises(DomainError):
            resolvent_solver.multi_index_schedule(
                [MultiIndex.model_validate([1, 0]), MultiIndex.model_validate([1, 0, 1])])


class TestSecondOrder:
    @pytest.mark.parametrize("layout", ["standard", "y_traces"])
    def test_resolvent_of_manufactured_solution(self, layout):
        G = resolvent_solver.build_resolvent_second_order(manufactured_problem(layout), LaplacePoint.of(2.0, 3.0))
        assert_allclose(G, [1.0 / 12.0], rtol=1e-12)

    def test_resolvent_at_complex_point(self):
        lam = (1.0 + 2.0j, 0.5 - 1.0j)
        G = resolvent_solver.build_resolvent_second_order(manufactured_problem(), LaplacePoint.of(*lam))
        assert_allclose(G, [1.0 / ((lam[0] + 1.0) * (lam[1] + 1.0))], rtol=1e-12)

    def test_singular_pencil(self):
        prob = SecondOrderProblem(B=[[1.0, 0.0], [0.0, 0.0]],
                                  source=FunctionRef(name="zero", params={"codim": 2}))
        with pytest.raises(SingularPencilError):
            resolvent_solver.build_resolvent_second_order(prob, LaplacePoint.of(1.0, 1.0))

    def test_data_without_transform(self):
        prob = manufactured_problem()
        prob.data["f1"] = FunctionRef(name="fresnel2d", dims=1)
        with pytest.raises(ConfigurationError):
            resolvent_solver.build_resolvent_second_order(prob, LaplacePoint.of(1.0, 1.0))

    def test_size_mismatch(self):
        prob = SecondOrderProblem(A=[[1.0]], source=FunctionRef(name="zero", params={"codim": 2}))
        with pytest.raises(ConfigurationError):
            resolvent_solver.build_resolvent_second_order(prob, LaplacePoint.of(1.0, 1.0))

    @pytest.mark.slow
    def test_solution_on_grid(self):
        result = resolvent_solver.solve_second_order(manufactured_problem(grid=single_point(1.0, 0.5)))
        assert abs(result.values[0, 0] - math.exp(-1.5)) < 1e-4
        assert result.residual_max < 1e-2
        assert result.decay_check.passed
        assert not result.best_effort


class TestVolterra:
    def test_resolvent_value(self):
        prob = VolterraProblem(A=[[1.0]], omega=[1.0, 1.0])
        resolvent, pencil, kernel, source = resolvent_solver.volterra_resolvent(prob)
        lam = np.array([[2.0, 3.0]], dtype=complex)
        assert_allclose(resolvent(lam)[0], [1.0 / 5.0], rtol=1e-13)
        assert pencil(lam).shape == (1, 1, 1)

    def test_trivial_kernel_weight(self):
        prob = VolterraProblem(grid=single_point(1.0, 2.0), residual_points=1)
        result = resolvent_solver.solve_volterra(prob)
        assert abs(result.values[0, 0] - 1.0) < 1e-6
        assert result.residual_max < 1e-4

    @pytest.mark.slow
    def test_series_oracle(self):
        prob = VolterraProblem(A=[[1.0]], omega=[1.0, 1.0], grid=single_point(1.0, 1.0), residual_points=1)
        result = resolvent_solver.solve_volterra(prob)
        assert abs(result.values[0, 0].real - bessel_series(1.0)) < 1e-3
        assert result.residual_max < 1e-3

    def test_singular_on_check_grid(self):
        prob = VolterraProblem(A=[[1.0]], grid=single_point(1.0, 1.0))
        with pytest.raises(SingularPencilError):
            resolvent_solver.solve_volterra(prob)

    def test_kernel_must_be_scalar(self):
        prob = VolterraProblem(data={"kernel": FunctionRef(name="one", params={"coefficient": [1.0, 1.0]})})
        with pytest.raises(ConfigurationError):
            resolvent_solver.volterra_resolvent(prob)


class TestFractional:
    def test_first_order_matches_volterra(self):
        prob = FractionalProblem2D(alpha1=1.0, alpha2=1.0, A=[[1.0]],
                                   source=FunctionRef(name="one"), grid=single_point(1.0, 1.0))
        result = resolvent_solver.solve_fractional_2d(prob)
        assert abs(result.values[0, 0].real - (bessel_series(1.0) - 1.0)) < 1e-3
        assert np.all(np.isnan(result.residuals))

    def test_half_order_source_only(self):
        prob = FractionalProblem2D(alpha1=0.5, alpha2=0.5, source=FunctionRef(name="one"),
                                   grid=single_point(1.0, 1.0))
        result = resolvent_solver.solve_fractional_2d(prob)
        assert abs(result.values[0, 0].real - 1.0 / math.gamma(1.5) ** 2) < 1e-3

    def test_zero_order_axis(self):
        prob = FractionalProblem2D(alpha1=0.0, alpha2=1.0, source=FunctionRef(name="one"),
                                   grid=single_point(1.0, 2.0))
        result = resolvent_solver.solve_fractional_2d(prob)
        assert abs(result.values[0, 0].real - 2.0) < 1e-4

    def test_conventions_agree_for_integer_orders(self):
        data = {"f": [FunctionRef(name="one", dims=1)], "h": [FunctionRef(name="exp_decay", dims=1)]}
        rl = FractionalProblem2D(alpha1=1.0, alpha2=1.0, A=[[0.5]], data=data)
        caputo = rl.model_copy(update={"kind": FractionalKind.CAPUTO})
        lam = np.array([[2.0 + 1.0j, 3.0]])
        assert_allclose(resolvent_solver.fractional_resolvent(caputo)[0](lam),
                        resolvent_solver.fractional_resolvent(rl)[0](lam), rtol=1e-13)

    def test_trace_weights(self):
        # alpha = (1, 1), A = 0: U = (lambda_1 L f_0 + lambda_2 L h_0) / (lambda_1 lambda_2)
        data = {"f": [FunctionRef(name="one", dims=1)], "h": [FunctionRef(name="one", dims=1)]}
        prob = FractionalProblem2D(alpha1=1.0, alpha2=1.0, data=data)
        lam = np.array([[2.0, 4.0]])
        expected = (2.0 * (1.0 / 2.0) + 4.0 * (1.0 / 4.0)) / 8.0
        assert_allclose(resolvent_solver.fractional_resolvent(prob)[0](lam), [[expected]], rtol=1e-13)

    def test_abscissa_from_spectral_radius(self):
        prob = FractionalProblem2D(alpha1=0.5, alpha2=1.5, A=[[0.0, 2.0], [2.0, 0.0]])
        assert resolvent_solver.fractional_abscissa(prob) == pytest.approx([2.0, 2.0])
        assert resolvent_solver.fractional_abscissa(FractionalProblem2D(alpha1=1.0, alpha2=1.0)) == [0.0, 0.0]
        assert resolvent_solver.fractional_abscissa(
            prob.model_copy(update={"omega": [1.0, 2.0]})) == [1.0, 2.0]

    def test_too_many_traces(self):
        with pytest.raises(ValueError):
            FractionalProblem2D(alpha1=0.5, alpha2=0.5,
                                data={"f": [FunctionRef(name="one", dims=1)] * 2})


class TestDecayCheck:
    @staticmethod
    def flat(lam):
        return np.ones((lam.shape[0], 1), dtype=complex)

    def test_non_decaying_resolvent_is_best_effort(self):
        report = resolvent_solver.decay_check(self.flat, [0.0, 0.0], 0.0, "flat", strict=False)
        assert not report.passed
        assert report.worst_ratio > 10.0
        assert report.samples == 256

    def test_strict_mode_raises(self):
        with pytest.raises(DecayCheckError):
            resolvent_solver.decay_check(self.flat, [0.0, 0.0], 0.0, "flat", strict=True)

    def test_decaying_resolvent_passes(self):
        report = resolvent_solver.decay_check(lambda lam: 1.0 / np.prod(lam + 1.0, axis=1)[:, None],
                                              [0.0, 0.0], 0.0, "pole", strict=True)
        assert report.passed
        assert report.worst_ratio <= 10.0
