"""Tests for the four possible worlds and their modified bounds."""

import math

import numpy as np
import pytest

from bell_timing.errors import CounterfactualRangeError
from bell_timing.models import PAIR_ORDER, SettingsQuad
from bell_timing.utils.inequalities import chsh_s, lr_only_chsh
from bell_timing.utils.qm import qm_correlation_data
from bell_timing.utils.reference_values import get_annotation, get_published, get_tolerance
from bell_timing.utils.worlds import (
    WorldAssumption,
    all_world_reports,
    counterfactual_weight,
    world_ch_report,
    world_chsh_report,
    world_counterfactual_expectations,
    world_report,
    world_weights,
)

SQRT2 = math.sqrt(2.0)
E_EXAMPLE = (0.707, -0.707, 0.707, 0.707)


def test_standard_weights(standard_quad):
    w_a, w_b = world_weights(standard_quad)
    assert w_a == pytest.approx(0.5)
    assert w_b == pytest.approx(0.5)
    assert counterfactual_weight(WorldAssumption.D, standard_quad) == pytest.approx(1.25)


@pytest.mark.parametrize(
    "world, expected",
    [
        (WorldAssumption.B, (2.121, -2.121, 2.121, 2.121)),
        (WorldAssumption.C, (0.0, 0.0, 0.0, 0.0)),
        (WorldAssumption.D, (0.88375, -0.88375, 0.88375, 0.88375)),
    ],
)
def test_counterfactual_expectations(world, expected, standard_quad):
    cf = world_counterfactual_expectations(world, dict(zip(PAIR_ORDER, E_EXAMPLE)), standard_quad)
    assert [cf[p] for p in PAIR_ORDER] == pytest.approx(expected, abs=1e-9)


def test_world_d_uses_general_weights():
    quad = SettingsQuad.from_radians(0.0, math.pi / 3, 0.1, 0.1 + math.pi / 6)
    w_a, w_b = math.cos(math.pi / 3) ** 2, math.cos(math.pi / 6) ** 2
    cf = world_counterfactual_expectations(WorldAssumption.D, dict.fromkeys(PAIR_ORDER, 0.4), quad)
    assert cf[PAIR_ORDER[0]] == pytest.approx(0.4 * (w_a + w_b + w_a * w_b))


def test_custom_rule_is_accepted(standard_quad, qm_data):
    def halved(factual, quad):
        return {pair: 0.5 * value for pair, value in factual.items()}

    report = world_chsh_report(halved, qm_data, standard_quad)
    assert report.counterfactual_weight == pytest.approx(0.5)
    assert report.chsh_bound == pytest.approx(8 / 1.5)
    assert report.world == "halved"


def test_custom_rule_out_of_range(standard_quad, qm_data):
    with pytest.raises(CounterfactualRangeError):
        world_chsh_report(lambda factual, quad: dict.fromkeys(PAIR_ORDER, 4.0), qm_data, standard_quad)


def test_world_b_retrieves_usual_ch(qm_data, standard_quad):
    report = world_ch_report(WorldAssumption.B, qm_data, standard_quad)
    assert report.ch_value == pytest.approx(0.5 * (1 + SQRT2), abs=1e-12)
    assert report.ch_bounds == (0.0, 1.0)
    assert report.qm_violates_ch
    assert report.m_form.value == pytest.approx(report.ch_value - 1.0)


def test_world_c_ch(qm_data, standard_quad):
    report = world_ch_report(WorldAssumption.C, qm_data, standard_quad)
    assert report.pair_part == pytest.approx(0.25 * 0.5 * (1 + SQRT2), abs=1e-12)
    assert report.ch_value == pytest.approx(-0.1982, abs=get_tolerance("world_c"))
    assert report.ch_bounds == (-1.0, 0.0)
    assert not report.qm_violates_ch
    assert get_annotation("world_c_pair_part") in report.annotations
    # The published pair part is reported elsewhere, never reproduced here
    assert abs(report.pair_part - get_published("world_c_pair_part")) > 0.01


def test_world_d_ch(qm_data, standard_quad):
    report = world_ch_report(WorldAssumption.D, qm_data, standard_quad)
    assert report.pair_part == pytest.approx(get_published("world_d_pair_sum"), abs=get_tolerance("world_d_pair_sum"))
    assert report.singles_part == pytest.approx(0.75)
    assert report.ch_value == pytest.approx(report.pair_part - 0.75)
    assert not report.qm_violates_ch


def test_world_d_singles_as_printed_changes_the_verdict(qm_data, standard_quad):
    report = world_ch_report(WorldAssumption.D, qm_data, standard_quad)
    assert report.alternative.value == pytest.approx(report.pair_part - 0.375)
    assert report.alternative.violated
    assert not report.ch.violated


@pytest.mark.parametrize(
    "world, bound, violated",
    [
        (WorldAssumption.A, 2.0, True),
        (WorldAssumption.B, 2.0, True),
        (WorldAssumption.C, 8.0, False),
        (WorldAssumption.D, 32 / 9, False),
    ],
)
def test_chsh_bounds(world, bound, violated, qm_data, standard_quad):
    report = world_chsh_report(world, qm_data, standard_quad)
    assert report.chsh_bound == pytest.approx(bound, abs=1e-12)
    assert report.chsh_value == pytest.approx(2 * SQRT2, abs=1e-12)
    assert report.qm_violates_chsh is violated
    assert report.lr_only.violated is violated


def test_world_d_bound_matches_published_figure(qm_data, standard_quad):
    report = world_chsh_report(WorldAssumption.D, qm_data, standard_quad)
    assert report.chsh_bound == pytest.approx(get_published("world_d_chsh_bound"), abs=0.01)


def test_world_b_reduction_on_random_inputs(standard_quad):
    rng = np.random.default_rng(99)
    for _ in range(1000):
        e = dict(zip(PAIR_ORDER, rng.uniform(-1, 1, 4)))
        cf = world_counterfactual_expectations(WorldAssumption.B, e, standard_quad)
        assert lr_only_chsh(e, cf).value == pytest.approx(4 * chsh_s(e).value, abs=1e-12)


def test_flags_match_values_for_every_world(qm_data, standard_quad):
    for report in all_world_reports(qm_data, standard_quad):
        lower, upper = report.ch_bounds
        assert report.qm_violates_ch == (not lower <= report.ch_value <= upper)
        assert report.qm_violates_chsh == (report.chsh_value > report.chsh_bound)
        for row in report.as_rows():
            assert row["violated"] == (not row["lower"] <= row["value"] <= row["upper"])


def test_world_a_implies_world_b_values(qm_data, standard_quad):
    a = world_report("A", qm_data, standard_quad)
    b = world_report("b", qm_data, standard_quad)
    assert a.ch_value == b.ch_value
    assert a.chsh_bound == b.chsh_bound


def test_unknown_world():
    with pytest.raises(ValueError):
        WorldAssumption.parse("E")


def test_other_quad_data(standard_quad):
    quad = SettingsQuad.from_radians(0.0, math.pi / 3, math.pi / 6, math.pi / 2)
    report = world_report(WorldAssumption.D, qm_correlation_data(quad), quad)
    assert report.chsh_bound == pytest.approx(8 / (1 + 0.25 + 0.25 + 0.0625))
