"""Tests for the identity check, strategy enumeration and mixture consistency."""

import math

import pytest

from bell_timing.models import SettingsQuad
from bell_timing.utils.local_models import ConstantModel, MalusModel
from bell_timing.utils.oracle import (
    DeterministicStrategy,
    corner_values,
    enumerate_strategies,
    product_identity_expression,
    mixture_consistency,
    verify_product_identity,
)


def test_corner_examples():
    corners = corner_values()
    assert len(corners) == 16
    assert corners[(0, 0, 0, 0)] == 0.0
    assert corners[(1, 0, 0, 1)] == -1.0
    assert min(corners.values()) == -1.0
    assert max(corners.values()) == 0.0


def test_general_form():
    assert product_identity_expression(2.0, 0.0, 0.0, 3.0, X=2.0, Y=3.0) == -6.0
    assert product_identity_expression(0.5, 0.5, 0.5, 0.5) == pytest.approx(-0.5)


def test_identity_holds_on_random_samples():
    check = verify_product_identity(1_000_000, seed=42)
    assert check.worst_excursion <= 1e-12
    assert check.corner_min == -1.0
    assert check.corner_max == 0.0
    assert -1.0 <= check.min_value <= check.max_value <= 0.0


def test_identity_holds_for_general_bounds():
    check = verify_product_identity(200_000, seed=1, general_bounds=True)
    assert check.worst_excursion <= 1e-12


def test_identity_rejects_empty_sample():
    with pytest.raises(ValueError):
        verify_product_identity(0, seed=0)


def test_strategy_enumeration_extremes(standard_quad):
    result = enumerate_strategies(standard_quad)
    assert len(result.rows) == 16
    assert result.s_abs_max == 2.0
    assert (result.s_min, result.s_max) == (-2.0, 2.0)
    assert (result.ch_sum_min, result.ch_sum_max) == (0.0, 1.0)
    assert (result.m_min, result.m_max) == (-1.0, 0.0)


def test_enumeration_does_not_depend_on_quad(standard_quad):
    other = SettingsQuad.from_radians(0.1, 1.0, 0.4, 2.0)
    assert enumerate_strategies(standard_quad).extremes() == enumerate_strategies(other).extremes()


def test_all_plus_strategy():
    strategy = DeterministicStrategy(a_out=(1, 1), b_out=(1, 1))
    assert strategy.signed_s() == 2.0
    data = strategy.correlation_data()
    assert data.singles() == (1.0, 1.0)
    with pytest.raises(ValueError):
        DeterministicStrategy(a_out=(1, 0), b_out=(1, 1))


@pytest.mark.parametrize("model", [MalusModel(), MalusModel(visibility=0.6), ConstantModel(0.5), ConstantModel(0.9)])
def test_static_models_lie_inside_the_strategy_bounds(model):
    check = mixture_consistency(model, n_grid=100)
    assert check.max_deviation <= 1e-9
    assert 0.0 - 1e-9 <= check.ch_sum <= 1.0 + 1e-9


def test_constant_half_model_has_zero_s():
    assert mixture_consistency(ConstantModel(0.5), n_grid=10).s_value == pytest.approx(0.0)


def test_malus_full_interval_s():
    assert mixture_consistency(MalusModel(), n_grid=100).s_value == pytest.approx(math.sqrt(2), abs=1e-12)


def test_time_dependent_model_refused(clock):
    with pytest.raises(ValueError, match="time-dependent"):
        mixture_consistency(clock)
