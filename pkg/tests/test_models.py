"""Tests for angles, settings, the schedule and the data containers."""

import math

import numpy as np
import pytest

from bell_timing.errors import IndeterminateError
from bell_timing.models import (
    PAIR_ORDER,
    Angle,
    CoincidenceCounts,
    CorrelationData,
    PairEvent,
    Schedule,
    SettingsPair,
    SettingsQuad,
    build_schedule,
    settings_at,
)


class TestAngle:
    def test_canonicalized_into_half_open_interval(self):
        assert Angle(math.pi + 0.1).value == pytest.approx(0.1)
        assert Angle(-0.1).value == pytest.approx(math.pi - 0.1)
        assert Angle(math.pi).value == 0.0

    def test_canonicalization_is_idempotent(self):
        rng = np.random.default_rng(7)
        for raw in rng.uniform(-20, 20, 200):
            once = Angle(raw)
            assert Angle(once.value).value == once.value

    def test_equal_modulo_pi(self):
        assert Angle(0.3) == Angle(0.3 + 5 * math.pi)
        assert Angle(0.0) == Angle(math.pi - 1e-14)
        assert Angle(0.3) != Angle(0.3 + math.pi / 2)
        assert Angle(0.1234567885 - 2e-13) == Angle(0.1234567885 + 2e-13)

    def test_unhashable(self):
        with pytest.raises(TypeError):
            hash(Angle(0.3))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Angle(float("nan"))


class TestSettingsQuad:
    def test_standard_quad(self, standard_quad):
        assert standard_quad.as_radians() == pytest.approx((0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8))

    def test_rejects_equal_settings_at_a_station(self):
        with pytest.raises(ValueError, match="Station A"):
            SettingsQuad.from_radians(0.0, math.pi, 0.1, 0.2)
        with pytest.raises(ValueError, match="Station B"):
            SettingsQuad.from_radians(0.0, 0.5, 0.2, 0.2)

    def test_angles_for_pair(self, standard_quad):
        a, b = standard_quad.angles_for(SettingsPair.A_PRIME_B)
        assert a == Angle(math.pi / 4)
        assert b == Angle(math.pi / 8)

    def test_pair_labels(self):
        assert SettingsPair.AB_PRIME.label == "(alpha,beta')"
        assert SettingsPair.from_indices(1, 1) is SettingsPair.A_PRIME_B_PRIME


class TestSchedule:
    @pytest.mark.parametrize(
        "t, expected",
        [
            (0.1, (0.0, 3 * math.pi / 8)),
            (0.3, (0.0, math.pi / 8)),
            (0.99, (math.pi / 4, 3 * math.pi / 8)),
        ],
    )
    def test_default_layout(self, schedule, t, expected):
        a, b = settings_at(schedule, t)
        assert (a.value, b.value) == pytest.approx(expected)

    def test_boundaries_belong_to_later_quarter(self, schedule):
        assert schedule.pair_at(0.0) is SettingsPair.AB_PRIME
        assert schedule.pair_at(0.25) is SettingsPair.AB
        assert schedule.pair_at(0.5) is SettingsPair.A_PRIME_B
        assert schedule.pair_at(0.375) is SettingsPair.AB
        assert schedule.pair_at(1.0) is SettingsPair.A_PRIME_B_PRIME

    def test_quarters_tile_the_run(self, schedule):
        bounds = [schedule.quarter_bounds(q) for q in range(4)]
        assert bounds[0][0] == 0.0
        assert bounds[-1][1] == 1.0
        for (_, end), (start, _) in zip(bounds, bounds[1:]):
            assert end == start
        assert all(b - a == pytest.approx(0.25) for a, b in bounds)

    def test_exactly_three_breakpoints(self, schedule):
        t = np.linspace(0.0, 1.0, 4001)
        quarters = schedule.quarter_index(t)
        assert np.count_nonzero(np.diff(quarters)) == 3
        assert schedule.breakpoints == (0.25, 0.5, 0.75)

    def test_station_settings_change_where_expected(self, schedule):
        a_index, b_index = schedule.setting_indices(np.array([0.1, 0.3, 0.6, 0.9]))
        assert list(a_index) == [0, 0, 1, 1]
        assert list(b_index) == [1, 0, 0, 1]

    def test_times_outside_the_run_are_rejected(self, schedule):
        with pytest.raises(ValueError):
            settings_at(schedule, 1.5)
        with pytest.raises(ValueError):
            settings_at(schedule, -0.01)

    def test_nonpositive_time_rejected(self, standard_quad):
        with pytest.raises(ValueError):
            build_schedule(0.0, standard_quad)

    def test_custom_quarter_map_must_use_each_pair_once(self, standard_quad):
        with pytest.raises(ValueError):
            Schedule.from_quarter_map(1.0, standard_quad, (SettingsPair.AB,) * 4)
        custom = Schedule.from_quarter_map(1.0, standard_quad, tuple(PAIR_ORDER))
        assert custom.pair_at(0.1) is SettingsPair.AB

    def test_rescaled(self, schedule):
        longer = schedule.rescaled(3.0)
        assert longer.total_time == 3.0
        assert longer.pair_at(0.3 * 3.0) is schedule.pair_at(0.3)


def test_pair_event_outcomes_are_plus_minus_one(standard_quad):
    with pytest.raises(ValueError):
        PairEvent(0.1, 0.0, standard_quad.alpha, standard_quad.beta, 0, 1)


class TestCounts:
    def test_expectation(self):
        counts = CoincidenceCounts(c_pp=40, c_pm=10, c_mp=10, c_mm=40)
        assert counts.total == 100
        assert counts.expectation() == pytest.approx(0.6)
        assert counts.a_plus == 50
        assert counts.b_plus == 50

    def test_zero_counts_are_indeterminate(self):
        with pytest.raises(IndeterminateError):
            CoincidenceCounts().expectation()

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            CoincidenceCounts(c_pp=-1)


class TestCorrelationData:
    def test_range_checks(self):
        with pytest.raises(ValueError):
            CorrelationData(pair_probs={SettingsPair.AB: 1.5})
        with pytest.raises(ValueError):
            CorrelationData(expectations={SettingsPair.AB: -1.2})

    def test_missing_values_raise_indeterminate(self):
        data = CorrelationData(pair_probs={SettingsPair.AB: None})
        with pytest.raises(IndeterminateError):
            data.pair_prob(SettingsPair.AB)
        with pytest.raises(IndeterminateError):
            data.singles()

    def test_rows_cover_every_quantity(self, qm_data):
        names = [row["quantity"] for row in qm_data.as_rows()]
        assert len(names) == 10
        assert "P_A(alpha')" in names and "E(alpha',beta')" in names
