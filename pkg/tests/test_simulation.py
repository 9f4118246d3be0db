"""Tests for chunked Monte Carlo runs, tallies, estimates and run-record files."""

import math

import numpy as np
import polars as pl
import pytest

from bell_timing.errors import IndeterminateError
from bell_timing.models import PAIR_ORDER, CoincidenceCounts, Schedule, SettingsPair
from bell_timing.utils.local_models import ConstantModel, QuantumPairSource
from bell_timing.utils.quadrature import exact_time_averages
from bell_timing.utils.rng import chunk_generator, plan_chunks
from bell_timing.utils.simulation import (
    RunRecord,
    check_run_settings,
    estimate_correlation_data,
    read_run_record,
    simulate_run,
    tally,
    write_run_record,
)

SIGMAS = 5.0


def _assert_within_sigmas(estimated, exact):
    exact_values = {row["quantity"]: row["value"] for row in exact.as_rows()}
    for row in estimated.as_rows():
        se = row["std_error"]
        assert se > 0, row
        assert abs(row["value"] - exact_values[row["quantity"]]) <= SIGMAS * se, row


def test_plan_chunks_covers_the_run():
    chunks = plan_chunks(10, 4)
    assert [(c.start, c.size) for c in chunks] == [(0, 4), (4, 4), (8, 2)]
    with pytest.raises(ValueError):
        plan_chunks(10, 0)


def test_chunk_streams_are_independent_of_order():
    first = chunk_generator(42, 3).random(5)
    chunk_generator(42, 0).random(100)
    again = chunk_generator(42, 3).random(5)
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, chunk_generator(42, 4).random(5))


def test_identical_seeds_give_identical_runs_for_any_worker_count(clock, schedule):
    single = simulate_run(clock, schedule, 20_000, 9, chunk_size=1500, workers=1)
    threaded = simulate_run(clock, schedule, 20_000, 9, chunk_size=1500, workers=4)
    assert single.frame.equals(threaded.frame)
    other = simulate_run(clock, schedule, 20_000, 10, chunk_size=1500)
    assert not single.frame.equals(other.frame)


def test_events_follow_the_schedule(malus, schedule):
    run = simulate_run(malus, schedule, 5_000, 1, chunk_size=1000)
    assert run.n_pairs == 5_000
    assert run.frame["t"].is_sorted()
    check_run_settings(run)
    event = run.events[0]
    assert (event.a_setting, event.b_setting) == schedule.settings_at(event.emission_time)


def test_measurement_independence(malus, standard_quad, schedule):
    other = Schedule.from_quarter_map(1.0, standard_quad, tuple(PAIR_ORDER))
    first = simulate_run(malus, schedule, 3_000, 4, chunk_size=700)
    second = simulate_run(malus, other, 3_000, 4, chunk_size=700)
    np.testing.assert_array_equal(first.frame["lambda"].to_numpy(), second.frame["lambda"].to_numpy())


def test_fixed_per_quarter_quotas(constant, schedule):
    run = simulate_run(constant, schedule, 4_000, 2, chunk_size=999, fixed_per_quarter=True)
    counts = tally(run)
    assert {pair: counts[pair].total for pair in PAIR_ORDER} == {pair: 1_000 for pair in PAIR_ORDER}


def test_tally_totals(constant, schedule):
    run = simulate_run(constant, schedule, 10_000, 3)
    counts = tally(run)
    assert sum(c.total for c in counts.values()) == 10_000
    data = estimate_correlation_data(counts)
    for pair in PAIR_ORDER:
        se = data.standard_errors[f"E{pair.label}"]
        assert abs(data.expectation(pair)) <= SIGMAS * se


def test_missing_pair_is_indeterminate():
    counts = {pair: CoincidenceCounts(5, 5, 5, 5) for pair in PAIR_ORDER}
    counts[SettingsPair.AB] = CoincidenceCounts()
    with pytest.raises(IndeterminateError):
        estimate_correlation_data(counts)
    data = estimate_correlation_data(counts, strict=False)
    assert data.pair_probs[SettingsPair.AB] is None
    assert data.expectations[SettingsPair.AB] is None
    assert data.pair_prob(SettingsPair.AB_PRIME) == 0.25


def test_binomial_standard_errors():
    counts = {pair: CoincidenceCounts(25, 25, 25, 25) for pair in PAIR_ORDER}
    data = estimate_correlation_data(counts)
    assert data.standard_errors["P_AB(alpha,beta)"] == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
    assert data.standard_errors["E(alpha,beta)"] == pytest.approx(0.1)
    assert data.standard_errors["P_A(alpha')"] == pytest.approx(math.sqrt(0.25 / 200))


@pytest.mark.parametrize("model_fixture", ["malus", "clock"])
def test_estimates_agree_with_exact_averages(request, model_fixture, schedule):
    model = request.getfixturevalue(model_fixture)
    run = simulate_run(model, schedule, 1_000_000, 42, workers=4)
    estimated = estimate_correlation_data(tally(run))
    exact = exact_time_averages(model, schedule, 1e-3).factual_data()
    _assert_within_sigmas(estimated, exact)


def test_run_record_round_trip(tmp_path, clock, schedule):
    run = simulate_run(clock, schedule, 2_000, 5, chunk_size=512)
    path = tmp_path / "run.tsv"
    write_run_record(run, path)
    back = read_run_record(path)
    assert back.seed == 5
    assert back.schedule == run.schedule
    for column in run.frame.columns:
        np.testing.assert_array_equal(back.frame[column].to_numpy(), run.frame[column].to_numpy())


def test_run_record_without_hidden_variable(tmp_path, schedule):
    run = simulate_run(QuantumPairSource(), schedule, 100, 1)
    path = tmp_path / "qm.tsv"
    write_run_record(run, path)
    assert "\t-\t" in path.read_text()
    assert np.isnan(read_run_record(path).frame["lambda"].to_numpy()).all()


def test_tampered_settings_are_detected(malus, schedule):
    run = simulate_run(malus, schedule, 200, 1)
    bad = RunRecord(
        schedule=schedule,
        seed=1,
        frame=run.frame.with_columns((1 - pl.col("a_index")).cast(pl.Int8).alias("a_index")),
    )
    with pytest.raises(ValueError, match="disagree"):
        check_run_settings(bad)


def test_certain_detection_gives_only_coincidences(schedule):
    run = simulate_run(ConstantModel(1.0), schedule, 5_000, 6)
    assert (run.frame["a_outcome"] == 1).all()
    assert (run.frame["b_outcome"] == 1).all()
    counts = tally(run)
    assert all(counts[pair].c_pp == counts[pair].total for pair in PAIR_ORDER)


def test_fair_coin_coincidence_rate(constant, schedule):
    counts = tally(simulate_run(constant, schedule, 400_000, 8))
    for pair in PAIR_ORDER:
        total = counts[pair].total
        se = math.sqrt(0.25 * 0.75 / total)
        assert abs(counts[pair].c_pp / total - 0.25) <= SIGMAS * se
