import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special

from mdlt.core.errors import DomainError, SeriesNonConvergenceError
from mdlt.core.quadrature import gl_panels, tanh_sinh
from mdlt.core.special_functions import gamma_kernel, mittag_leffler, wright
from mdlt.models.special import MLParams, SeriesAccuracy, WrightParams


class TestGammaKernel:
    def test_matches_power_over_gamma(self):
        t = np.array([0.25, 1.0, 3.5])
        assert_allclose(gamma_kernel(0.5, t), t ** -0.5 / math.gamma(0.5), rtol=1e-14)
        assert_allclose(gamma_kernel(2.5, t), t ** 1.5 / math.gamma(2.5), rtol=1e-14)

    def test_origin(self):
        assert gamma_kernel(1.0, 0.0) == 1.0
        assert gamma_kernel(2.0, 0.0) == 0.0
        assert gamma_kernel(0.5, 0.0) == 0.0

    def test_scalar_in_scalar_out(self):
        assert isinstance(gamma_kernel(1.5, 2.0), float)

    @pytest.mark.parametrize("zeta", [0.0, -1.0])
    def test_rejects_nonpositive_order(self, zeta):
        with pytest.raises(DomainError):
            gamma_kernel(zeta, 1.0)

    def test_rejects_negative_time(self):
        with pytest.raises(DomainError):
            gamma_kernel(0.5, np.array([1.0, -0.1]))

    @pytest.mark.parametrize("zeta, eta", [(0.5, 0.5), (0.3, 1.2), (1.5, 0.7)])
    def test_semigroup(self, zeta, eta):
        for t in (0.3, 0.8, 1.0, 2.5, 4.0):
            rule = tanh_sinh(0.0, t, 6)
            integrand = gamma_kernel(zeta, rule.dist_right) * gamma_kernel(eta, rule.dist_left)
            convolved = np.dot(rule.weights, integrand)
            assert convolved == pytest.approx(gamma_kernel(zeta + eta, t), rel=1e-6)


class TestMittagLeffler:
    def test_exponential(self):
        z = np.linspace(-5.0, 10.0, 13)
        assert_allclose(mittag_leffler(MLParams(alpha=1.0), z), np.exp(z), rtol=1e-12)

    def test_cosh(self):
        z = np.linspace(-3.0, 3.0, 7)
        assert_allclose(mittag_leffler(MLParams(alpha=2.0), z ** 2), np.cosh(z), rtol=1e-12)

    def test_half_order_erfc(self):
        z = np.array([-2.0, -0.5, 0.0, 0.7, 2.0])
        expected = np.exp(z ** 2) * special.erfc(-z)
        assert_allclose(mittag_leffler(MLParams(alpha=0.5), z), expected, rtol=1e-11)

    def test_two_parameter(self):
        z = np.array([-1.0, 0.5, 3.0])
        assert_allclose(mittag_leffler(MLParams(alpha=1.0, beta=2.0), z), np.expm1(z) / z, rtol=1e-12)

    def test_complex_argument(self):
        z = 1.5 + 2.0j
        assert_allclose(mittag_leffler(MLParams(alpha=1.0), z), np.exp(z), rtol=1e-12)

    def test_real_input_returns_real(self):
        value = mittag_leffler(MLParams(alpha=1.0), 1.0)
        assert isinstance(value, float)
        assert value == pytest.approx(math.e, rel=1e-13)

    def test_outside_validated_disk(self):
        with pytest.raises(DomainError):
            mittag_leffler(MLParams(alpha=1.0), 60.0)

    def test_cancellation_is_reported(self):
        with pytest.raises(SeriesNonConvergenceError):
            mittag_leffler(MLParams(alpha=1.0), -40.0)

    def test_half_order_cancellation_is_reported(self):
        with pytest.raises(SeriesNonConvergenceError):
            mittag_leffler(MLParams(alpha=0.5), -12.0)

    def test_term_cap_is_reported(self):
        with pytest.raises(SeriesNonConvergenceError):
            mittag_leffler(MLParams(alpha=1.0), 20.0, SeriesAccuracy(max_terms=5))


class TestWright:
    def test_half_order_gaussian(self):
        z = np.array([0.0, 0.3, 1.0, 2.5])
        expected = np.exp(-z ** 2 / 4.0) / math.sqrt(math.pi)
        assert_allclose(wright(WrightParams(gamma=0.5), z), expected, rtol=1e-10)

    def test_large_argument_uses_integral_route(self):
        z = np.array([6.0, 9.0])
        expected = np.exp(-z ** 2 / 4.0) / math.sqrt(math.pi)
        assert_allclose(wright(WrightParams(gamma=0.5), z), expected, rtol=1e-8)

    def test_negative_argument(self):
        assert wright(WrightParams(gamma=0.5), -1.0) == pytest.approx(
            math.exp(-0.25) / math.sqrt(math.pi), rel=1e-12)

    @pytest.mark.parametrize("gamma, T", [(0.5, 10.0), (0.3, 16.0)])
    def test_probability_normalization(self, gamma, T):
        p = WrightParams(gamma=gamma)
        assert abs(wright(p, T)) < 1e-8
        rule = gl_panels(np.linspace(0.0, T, 33), 16)
        assert abs(np.dot(rule.weights, wright(p, rule.nodes)) - 1.0) < 1e-4

    def test_value_at_zero(self):
        gamma = 0.3
        assert wright(WrightParams(gamma=gamma), 0.0) == pytest.approx(1.0 / math.gamma(1.0 - gamma), rel=1e-14)

    @pytest.mark.parametrize("gamma", [0.0, 1.0, 1.5])
    def test_order_outside_unit_interval(self, gamma):
        with pytest.raises(ValueError):
            WrightParams(gamma=gamma)
