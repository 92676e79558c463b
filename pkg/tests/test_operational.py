import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mdlt.core.errors import DomainError
from mdlt.core.operational import operational_calculus
from mdlt.models.operational import DampingVector, MultiIndex, ShiftVector
from mdlt.models.transform import LaplacePoint, QuadratureConfig


P11 = LaplacePoint.of(1.0, 1.0)


class TestShiftDelayDamping:
    def test_shift_rule(self, pair):
        f = pair("exp_decay").function
        check = operational_calculus.shift_transform(f, ShiftVector.model_validate([0.5, 0.25]), P11)
        # f(t + h) = e^{-0.75} f(t)
        assert_allclose(check.lhs, [math.exp(-0.75) / 4.0], rtol=1e-7)
        assert check.residual < 1e-6

    def test_shift_rule_single_axis(self, pair):
        f = pair("poly_exp", powers=[1.0, 0.0], rates=[1.0, 1.0]).function
        check = operational_calculus.shift_transform(f, ShiftVector.model_validate([0.0, 1.0]),
                                                     LaplacePoint.of(1.0, 2.0))
        assert check.residual < 1e-6

    def test_shift_dimension_mismatch(self, pair):
        with pytest.raises(DomainError):
            operational_calculus.shift_transform(pair("one").function, ShiftVector.model_validate([1.0]), P11)

    def test_delay_closed_form(self, pair):
        f = pair("poly_exp", powers=[1.0, 0.0], rates=[0.0, 0.0]).function
        value = operational_calculus.delay_transform(f, ShiftVector.model_validate([1.0, 1.0]),
                                                     LaplacePoint.of(1.0, 2.0))
        assert_allclose(value, [math.exp(-3.0) / 2.0], rtol=1e-7)

    def test_delay_rule(self, pair):
        f = pair("exp_decay").function
        check = operational_calculus.delay_residual(f, ShiftVector.model_validate([0.5, 0.25]), P11)
        assert check.residual < 1e-6

    def test_damping_rule(self, pair):
        f = pair("one").function
        z = DampingVector.model_validate([1.0, 0.5 + 1.0j])
        value = operational_calculus.damping_transform(f, z, P11)
        assert_allclose(value, [1.0 / (2.0 * (1.5 + 1.0j))], rtol=1e-7)
        assert operational_calculus.damping_residual(f, z, P11).residual < 1e-6

    def test_damped_closed_form(self, pair):
        F = pair("exp_decay").transform
        G = operational_calculus.damped_transform(F, DampingVector.model_validate([1.0, 1.0]))
        assert_allclose(G(np.array([[1.0, 1.0]]))[0], [1.0 / 9.0], rtol=1e-14)
        assert G.decay.omega == [-1.0, -1.0]
        # partials follow the shift
        assert_allclose(G.partial([1, 0], np.array([[1.0, 1.0]]))[0], [-1.0 / 27.0], rtol=1e-13)

    def test_operator_rule(self, pair):
        f = pair("exp_decay", coefficient=[1.0, 2.0]).function
        T = np.array([[0.0, 1.0], [1.0, 0.0]])
        check = operational_calculus.operator_rule_residual(f, T, LaplacePoint.of(1.0, 2.0))
        assert_allclose(check.lhs, [2.0 / 6.0, 1.0 / 6.0], rtol=1e-7)
        assert check.residual < 1e-8


class TestDerivatives:
    def test_mixed_partial_of_transform(self, pair):
        f = pair("exp_decay").function
        value = operational_calculus.transform_derivative(f, MultiIndex.model_validate([1, 1]), P11)
        assert_allclose(value, [1.0 / 16.0], rtol=1e-6)

    def test_first_partial_sign(self, pair):
        f = pair("exp_decay").function
        value = operational_calculus.transform_derivative(f, MultiIndex.model_validate([0, 1]), P11)
        assert_allclose(value, [-1.0 / 8.0], rtol=1e-6)

    def test_multi_index_length(self, pair):
        with pytest.raises(DomainError):
            operational_calculus.transform_derivative(pair("one").function, MultiIndex.model_validate([1]), P11)

    def test_second_derivative_rule_closed_form(self, pair):
        # f = e^{-t}: f'' = f, f(0) = 1, f'(0) = -1
        F = pair("exp_decay", dims=1).transform
        value = operational_calculus.higher_derivative_transform_1d(F, [1.0, -1.0], 2, 2.0)
        assert_allclose(value, [1.0 / 3.0], rtol=1e-13)

    def test_second_derivative_rule_by_quadrature(self, pair):
        f = pair("exp_decay", dims=1).function
        value = operational_calculus.higher_derivative_transform_1d(f, [1.0, -1.0], 2, 2.0)
        assert_allclose(value, [1.0 / 3.0], rtol=1e-6)

    def test_derivative_rule_arguments(self, pair):
        F = pair("exp_decay", dims=1).transform
        with pytest.raises(DomainError):
            operational_calculus.higher_derivative_transform_1d(F, [], 0, 1.0)
        with pytest.raises(DomainError):
            operational_calculus.higher_derivative_transform_1d(F, [1.0], 2, 1.0)
        with pytest.raises(DomainError):
            operational_calculus.higher_derivative_transform_1d(pair("exp_decay").transform, [1.0], 1, 1.0)


class TestFractionalIntegral:
    def test_half_integral_of_constant(self, pair):
        value = operational_calculus.fractional_integral(pair("one").function, 0, 0.5, [1.0, 2.0])
        assert_allclose(value, [1.0 / math.gamma(1.5)], rtol=1e-7)

    def test_integer_order_is_plain_integral(self, pair):
        f = pair("exp_decay").function
        value = operational_calculus.fractional_integral(f, 1, 1.0, [0.5, 2.0])
        assert_allclose(value, [math.exp(-0.5) * (1.0 - math.exp(-2.0))], rtol=1e-8)

    def test_semigroup(self, pair):
        half = operational_calculus.fractional_integral_function(pair("one").function, 0, 0.5)
        value = operational_calculus.fractional_integral(half, 0, 0.5, [1.5, 1.0])
        assert_allclose(value, [1.5], rtol=1e-6)

    def test_invalid_order(self, pair):
        with pytest.raises(DomainError):
            operational_calculus.fractional_integral(pair("one").function, 0, 0.0, [1.0, 1.0])

    def test_invalid_axis(self, pair):
        with pytest.raises(DomainError):
            operational_calculus.fractional_integral(pair("one").function, 2, 0.5, [1.0, 1.0])


class TestConvolution:
    def test_constants(self, pair):
        one = pair("one").function
        assert_allclose(operational_calculus.faltung_convolve(one, one, [2.0, 3.0]), [6.0], rtol=1e-10)

    def test_weakly_singular_kernel(self, pair):
        g = pair("gamma_kernel", zeta=0.5).function
        value = operational_calculus.faltung_convolve(g, pair("one").function, [1.0, 1.0])
        assert_allclose(value, [1.0 / math.gamma(1.5) ** 2], rtol=1e-6)

    def test_convolution_function_matches_pointwise(self, pair):
        a, f = pair("exp_decay").function, pair("poly_exp").function
        conv = operational_calculus.convolution_function(a, f)
        t = [0.7, 1.3]
        assert_allclose(conv(np.array([t]))[0], operational_calculus.faltung_convolve(a, f, t), rtol=1e-8)

    def test_convolution_theorem(self, pair):
        a, f = pair("gamma_kernel", zeta=0.5).function, pair("exp_decay").function
        assert operational_calculus.convolution_theorem_check(a, f, P11) < 1e-5

    def test_commutative(self, pair):
        a = pair("gamma_kernel", zeta=0.5).function
        f = pair("poly_exp", powers=[1.0, 0.5], rates=[1.0, 0.0]).function
        for t in ([0.7, 1.3], [2.0, 0.4]):
            forward = operational_calculus.faltung_convolve(a, f, t)
            backward = operational_calculus.faltung_convolve(f, a, t)
            assert np.max(np.abs(forward - backward)) < 1e-8

    def test_kernel_must_be_scalar(self, pair):
        a = pair("exp_decay", coefficient=[1.0, 1.0]).function
        with pytest.raises(DomainError):
            operational_calculus.faltung_convolve(a, pair("one").function, [1.0, 1.0])

    def test_non_adaptive_rule(self, pair):
        one = pair("one").function
        value = operational_calculus.faltung_convolve(one, one, [1.0, 2.0], QuadratureConfig(adaptive=False))
        assert_allclose(value, [2.0], rtol=1e-8)
