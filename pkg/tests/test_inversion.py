import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mdlt.core.errors import (
    ConfigurationError, DecayViolationError, DomainError, OverflowGuardError,
)
from mdlt.core.functions import TransformFunction, separable_transform
from mdlt.core.inversion import inversion_engine, vertical_contour
from mdlt.core.operational import operational_calculus
from mdlt.models.inversion import (
    ContourConfig, ContourShape, Decay, DerivativeSource, PostWidderConfig,
)
from mdlt.models.operational import DampingVector


SECTOR = ContourConfig(shape=ContourShape.SECTOR_RAYS)


def post_widder_exp(k: int, t: float = 1.0) -> float:
    """Post-Widder approximation of e^{-t} at order k."""
    return (k / (k + t)) ** (k + 1)


class TestPostWidder:
    def test_exponential_closed_form(self, pair):
        F = pair("exp_decay").transform
        value = inversion_engine.post_widder_invert(F, [1.0, 1.0], PostWidderConfig(k=32))
        assert_allclose(value, [post_widder_exp(32) ** 2], rtol=1e-10)
        assert abs(value[0] - math.exp(-2.0)) <= 0.05

    def test_error_decreases_with_order(self, pair):
        F = pair("exp_decay").transform
        errors = [abs(inversion_engine.post_widder_invert(F, [1.0, 1.0], PostWidderConfig(k=k))[0]
                      - math.exp(-2.0)) for k in (8, 16, 32, 64)]
        assert all(b <= 1.1 * a for a, b in zip(errors, errors[1:]))

    def test_linear_factor(self, pair):
        F = pair("sep_pole", order=[2.0, 1.0]).transform
        value = inversion_engine.post_widder_invert(F, [2.0, 1.0], PostWidderConfig(k=32))
        assert_allclose(value, [33.0 / 32.0 * 2.0], rtol=1e-10)

    def test_moment_route_matches_analytic(self, pair):
        F = pair("exp_decay").transform
        cfg = PostWidderConfig(k=4, derivative_source=DerivativeSource.MOMENT_QUADRATURE)
        value = inversion_engine.post_widder_invert(F, [1.0, 1.0], cfg)
        assert_allclose(value, [post_widder_exp(4) ** 2], rtol=1e-6)

    def test_antiderivative(self, pair):
        F = pair("exp_decay").transform
        value = inversion_engine.post_widder_invert_antiderivative(F, [1.0, 1.0], PostWidderConfig(k=64))
        assert abs(value[0] - (1.0 - math.exp(-1.0)) ** 2) < 0.02

    def test_grid_reports_error_estimate(self, pair):
        F = pair("exp_decay").transform
        result = inversion_engine.post_widder_grid(F, [[1.0, 1.0], [0.5, 2.0]], PostWidderConfig(k=16))
        assert result.method == "post_widder"
        assert result.values.shape == (2, 1)
        assert result.error_estimate.shape == (2,)
        assert np.all(result.error_estimate > 0)
        assert not result.accuracy_warning

    def test_low_order_warning(self, pair):
        result = inversion_engine.post_widder_grid(pair("exp_decay").transform, [[1.0, 1.0]],
                                                   PostWidderConfig(k=2))
        assert result.accuracy_warning

    def test_needs_partials(self):
        F = TransformFunction(name="plain", dims=1, codim=1,
                              func=lambda lam: 1.0 / (lam + 1.0), decay=Decay.uniform(1))
        with pytest.raises(ConfigurationError):
            inversion_engine.post_widder_invert(F, [1.0])
        cfg = PostWidderConfig(derivative_source=DerivativeSource.MOMENT_QUADRATURE)
        with pytest.raises(ConfigurationError):
            inversion_engine.post_widder_invert(F, [1.0], cfg)

    def test_overflow_guard(self, pair):
        with pytest.raises(OverflowGuardError):
            inversion_engine.post_widder_invert(pair("exp_decay").transform, [1e-300, 1.0])

    def test_requires_positive_times(self, pair):
        with pytest.raises(DomainError):
            inversion_engine.post_widder_invert(pair("exp_decay").transform, [0.0, 1.0])


class TestBromwich:
    def test_sector_recovers_product(self, pair):
        F = pair("sep_pole", order=2.0).transform
        assert_allclose(inversion_engine.bromwich_invert(F, [2.0, 3.0], SECTOR), [6.0], atol=1e-6)

    def test_sector_grid(self, pair):
        F = pair("exp_decay").transform
        t = np.array([[0.5, 0.5], [1.0, 2.0], [2.0, 0.7]])
        result = inversion_engine.bromwich_grid(F, t, SECTOR)
        assert result.method == "bromwich"
        assert_allclose(result.values[:, 0], np.exp(-t.sum(axis=1)), atol=1e-6)
        assert np.all(np.isfinite(result.error_estimate))

    def test_vertical_line(self, pair):
        F = pair("sep_pole", order=2.0).transform
        result = inversion_engine.bromwich_grid(F, [[1.0, 1.0]])
        assert abs(result.values[0, 0] - 1.0) < 1e-3
        assert not result.accuracy_warning

    def test_vertical_nodes_cluster_at_real_axis(self):
        contour = vertical_contour(1.0, 40.0, 16, 1.0)
        heights = np.sort(contour.nodes.imag)
        assert np.all(contour.nodes.real == 1.0)
        assert np.min(np.abs(heights)) < 1e-10
        assert_allclose(heights, -heights[::-1], atol=1e-12)

    def test_vertical_line_without_decay_exponent_is_flagged(self, pair):
        result = inversion_engine.bromwich_grid(pair("sep_pole").transform, [[1.0, 1.0]])
        assert result.accuracy_warning
        assert np.all(np.isinf(result.error_estimate))

    def test_vector_valued(self, pair):
        F = pair("sep_pole", order=2.0, coefficient=[1.0, -2.0]).transform
        assert_allclose(inversion_engine.bromwich_invert(F, [1.0, 0.5], SECTOR), [0.5, -1.0], atol=1e-6)

    def test_offsets_must_exceed_abscissa(self, pair):
        cfg = ContourConfig(offsets=[-1.0, 1.0])
        with pytest.raises(ConfigurationError):
            inversion_engine.bromwich_invert(pair("sep_pole", order=2.0).transform, [1.0, 1.0], cfg)

    def test_declared_decay_is_checked(self):
        F = separable_transform("loud", [lambda lam: 100.0 / (lam + 1.0), lambda lam: 1.0 / (lam + 1.0)],
                                Decay.uniform(2, M=1.0))
        with pytest.raises(DecayViolationError):
            inversion_engine.bromwich_invert(F, [1.0, 1.0])
        ratio = inversion_engine.check_decay(F, [2.0, 2.0], raise_on_violation=False)
        assert ratio > 10.0

    def test_dilated_pair(self, pair):
        F = pair("sep_pole", order=2.0).transform
        c = np.array([2.0, 0.5])
        decay = F.decay.model_copy(update={"M": F.decay.M * float(np.prod(c ** np.asarray(F.decay.eps)))})
        G = TransformFunction(name="dilated", dims=2, func=lambda lam: F(lam / c) / np.prod(c),
                              decay=decay, sector_angle=F.sector_angle)
        for t in ([1.0, 2.0], [0.5, 3.0]):
            direct = inversion_engine.bromwich_invert(F, c * np.asarray(t), SECTOR)
            dilated = inversion_engine.bromwich_invert(G, t, SECTOR)
            assert np.max(np.abs(dilated - direct)) < 1e-4

    def test_inverse_as_function(self, pair):
        u = inversion_engine.bromwich_function(pair("exp_decay").transform, SECTOR, t_max=2.0)
        t = np.array([[0.5, 1.0], [1.5, 0.7], [2.0, 2.0]])
        assert_allclose(u(t)[:, 0].real, np.exp(-t.sum(axis=1)), atol=1e-6)
        assert u.dims == 2

    def test_inverse_as_function_on_grid(self, pair):
        F = pair("sep_pole", order=2.0).transform
        u = inversion_engine.bromwich_function(F, SECTOR.model_copy(update={"check_decay": False}), t_max=2.0)
        axes = [np.array([0.5, 1.0, 2.0]), np.array([0.25, 1.5])]
        grid = u.on_grid(axes)
        assert_allclose(grid[..., 0].real, np.outer(axes[0], axes[1]), atol=1e-6)


class TestTauberian:
    @pytest.mark.parametrize("name, params, initial, final", [
        ("exp_decay", {}, 1.0, 0.0),
        ("one", {}, 1.0, 1.0),
        ("box_antiderivative", {"widths": 1.0}, 0.0, 1.0),
        ("gaussian", {}, 1.0, 0.0),
    ])
    def test_limits(self, pair, name, params, initial, final):
        F = pair(name, **params).transform
        assert abs(inversion_engine.tauberian_initial(F).value[0] - initial) < 1e-3
        assert abs(inversion_engine.tauberian_final(F).value[0] - final) < 1e-3

    def test_converged_flag(self, pair):
        result = inversion_engine.tauberian_initial(pair("exp_decay").transform)
        assert result.converged
        assert result.error_estimate < 1e-6

    def test_probe_validation(self, pair):
        F = pair("one").transform
        with pytest.raises(DomainError):
            inversion_engine.tauberian_initial(F, [10.0, 20.0, 40.0])
        with pytest.raises(DomainError):
            inversion_engine.tauberian_initial(F, [40.0, 20.0, 10.0, 5.0])
        with pytest.raises(DomainError):
            inversion_engine.tauberian_final(F, [0.1, 0.2, 0.3, 0.4])


class TestUniqueness:
    def test_equal_transforms_reconstruct_equally(self, pair):
        F1 = pair("exp_decay").transform
        F2 = operational_calculus.damped_transform(pair("one").transform, DampingVector.model_validate([1.0, 1.0]))
        report = inversion_engine.uniqueness_check(F1, F2, [1.0, 2.0, 3.0], [[1.0, 1.0], [2.0, 0.5]])
        assert report.gate_passed
        assert report.transform_discrepancy < 1e-12
        assert report.reconstruction_discrepancy < 1e-8

    def test_different_transforms_fail_the_gate(self, pair):
        report = inversion_engine.uniqueness_check(pair("one").transform, pair("exp_decay").transform,
                                                   [1.0, 2.0, 3.0], [[1.0, 1.0]])
        assert not report.gate_passed
        assert report.reconstruction_discrepancy is None

    def test_shapes_must_agree(self, pair):
        with pytest.raises(DomainError):
            inversion_engine.uniqueness_check(pair("one").transform, pair("one", dims=1).transform,
                                              [1.0, 2.0], [[1.0, 1.0]])
