"""Monte Carlo runs under the time-sequenced schedule.

Pairs are emitted with constant flux over [0, T]; each one is measured with
the settings active at its emission time. Events are kept in a Polars
DataFrame (one row per pair) and tallied into coincidence counts.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import polars as pl

from bell_timing.errors import IndeterminateError
from bell_timing.models import (
    PAIR_ORDER,
    CoincidenceCounts,
    CorrelationData,
    PairEvent,
    Schedule,
    SettingsPair,
    SettingsQuad,
)
from bell_timing.utils.local_models import PairSource
from bell_timing.utils.rng import Chunk, chunk_generator, plan_chunks

logger = logging.getLogger(__name__)

EVENT_SCHEMA = {
    "t": pl.Float64,
    "lambda": pl.Float64,
    "a_index": pl.Int8,
    "b_index": pl.Int8,
    "a_outcome": pl.Int8,
    "b_outcome": pl.Int8,
}

DEFAULT_CHUNK_SIZE = 65536


@dataclass
class RunRecord:
    """One simulated run: the schedule, the seed and the events sorted by emission time."""

    schedule: Schedule
    seed: int
    frame: pl.DataFrame

    @property
    def n_pairs(self) -> int:
        return self.frame.height

    def iter_events(self) -> Iterator[PairEvent]:
        """Yield the events as PairEvent objects (slow for large runs)."""
        quad = self.schedule.quad
        for row in self.frame.iter_rows(named=True):
            yield PairEvent(
                emission_time=row["t"],
                hidden=row["lambda"],
                a_setting=quad.a_angles[row["a_index"]],
                b_setting=quad.b_angles[row["b_index"]],
                a_outcome=row["a_outcome"],
                b_outcome=row["b_outcome"],
            )

    @property
    def events(self) -> list[PairEvent]:
        return list(self.iter_events())

    @classmethod
    def empty(cls, schedule: Schedule, seed: int = 0) -> RunRecord:
        return cls(schedule=schedule, seed=seed, frame=pl.DataFrame(schema=EVENT_SCHEMA))


def _emission_times(
    rng: np.random.Generator,
    chunk: Chunk,
    n_pairs: int,
    schedule: Schedule,
    fixed_per_quarter: bool,
) -> np.ndarray:
    if not fixed_per_quarter:
        return rng.uniform(0.0, schedule.total_time, size=chunk.size)
    # Event i of the run lands in quarter floor(4 i / n): quotas differ by at most one
    global_index = np.arange(chunk.start, chunk.start + chunk.size)
    quarters = (4 * global_index) // n_pairs
    offsets = rng.uniform(0.0, 1.0, size=chunk.size)
    return (quarters + offsets) * schedule.quarter_duration


def _simulate_chunk(
    model: PairSource,
    schedule: Schedule,
    n_pairs: int,
    seed: int,
    fixed_per_quarter: bool,
    chunk: Chunk,
) -> pl.DataFrame:
    rng = chunk_generator(seed, chunk.index)
    t = _emission_times(rng, chunk, n_pairs, schedule, fixed_per_quarter)
    a_index, b_index = schedule.setting_indices(t)
    a_lookup = np.array([a.value for a in schedule.quad.a_angles])
    b_lookup = np.array([b.value for b in schedule.quad.b_angles])
    lam, a_out, b_out = model.draw(rng, t, a_lookup[a_index], b_lookup[b_index])
    return pl.DataFrame(
        {
            "t": t,
            "lambda": np.asarray(lam, dtype=float),
            "a_index": a_index,
            "b_index": b_index,
            "a_outcome": a_out,
            "b_outcome": b_out,
        },
        schema=EVENT_SCHEMA,
    )


def simulate_run(
    model: PairSource,
    schedule: Schedule,
    n_pairs: int,
    seed: int,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int = 1,
    fixed_per_quarter: bool = False,
) -> RunRecord:
    """Emit ``n_pairs`` pairs uniformly over [0, T] and measure each at its scheduled settings.

    Args:
        model: Pair source (a LocalModel or the quantum reference source).
        schedule: Time layout of the settings.
        n_pairs: Number of emitted pairs (> 0).
        seed: Master seed; with ``chunk_size`` it fixes the run bit for bit.
        chunk_size: Pairs per independent RNG stream.
        workers: Threads processing chunks; does not change the result.
        fixed_per_quarter: Emit n/4 pairs per quarter instead of a multinomial split.
    """
    if n_pairs <= 0:
        raise ValueError(f"n_pairs must be positive, got {n_pairs}")
    if workers <= 0:
        raise ValueError(f"workers must be positive, got {workers}")
    chunks = plan_chunks(n_pairs, chunk_size)
    logger.info(
        "Simulating %d pairs with %s (seed=%d, %d chunks, %d workers)",
        n_pairs,
        model.name,
        seed,
        len(chunks),
        workers,
    )

    def run(chunk: Chunk) -> pl.DataFrame:
        return _simulate_chunk(model, schedule, n_pairs, seed, fixed_per_quarter, chunk)

    if workers == 1:
        frames = [run(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            frames = list(pool.map(run, chunks))

    frame = pl.concat(frames).sort("t", maintain_order=True)
    return RunRecord(schedule=schedule, seed=seed, frame=frame)


def tally(run: RunRecord) -> dict[SettingsPair, CoincidenceCounts]:
    """Count C++, C+-, C-+, C-- per settings pair."""
    grouped = run.frame.group_by(["a_index", "b_index", "a_outcome", "b_outcome"]).len()
    cells: dict[SettingsPair, dict[str, int]] = {pair: {} for pair in PAIR_ORDER}
    names = {(1, 1): "c_pp", (1, -1): "c_pm", (-1, 1): "c_mp", (-1, -1): "c_mm"}
    for row in grouped.iter_rows(named=True):
        pair = SettingsPair.from_indices(row["a_index"], row["b_index"])
        cells[pair][names[(row["a_outcome"], row["b_outcome"])]] = int(row["len"])
    return {pair: CoincidenceCounts(**cells[pair]) for pair in PAIR_ORDER}


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def estimate_correlation_data(
    counts: dict[SettingsPair, CoincidenceCounts],
    *,
    strict: bool = True,
) -> CorrelationData:
    """Estimate pair probabilities, singles and expectations from coincidence counts.

    Each pair probability is normalized by the pairs emitted in that pair's own
    quarter; singles use the half of the run where the setting was active.
    A settings pair with no events is a zero-over-zero quantity: with ``strict``
    it raises IndeterminateError, otherwise its entries are ``None``.
    """
    pair_probs: dict[SettingsPair, float | None] = {}
    expectations: dict[SettingsPair, float | None] = {}
    errors: dict[str, float] = {}

    for pair in PAIR_ORDER:
        c = counts.get(pair, CoincidenceCounts())
        if c.total == 0:
            if strict:
                raise IndeterminateError(
                    f"No pairs recorded for {pair.label}: probability and expectation are 0/0"
                )
            logger.warning("Settings pair %s has no events; marking indeterminate", pair.label)
            pair_probs[pair] = None
            expectations[pair] = None
            continue
        p = c.c_pp / c.total
        e = c.expectation()
        pair_probs[pair] = p
        expectations[pair] = e
        errors[f"P_AB{pair.label}"] = _binomial_se(p, c.total)
        errors[f"E{pair.label}"] = math.sqrt(max(1.0 - e * e, 0.0) / c.total)

    a_prime = [counts.get(p, CoincidenceCounts()) for p in PAIR_ORDER if p.a_index == 1]
    b_unprimed = [counts.get(p, CoincidenceCounts()) for p in PAIR_ORDER if p.b_index == 0]
    p_a_alpha_prime = _singles(a_prime, station="a", strict=strict, name="P_A(alpha')")
    p_b_beta = _singles(b_unprimed, station="b", strict=strict, name="P_B(beta)")
    if p_a_alpha_prime is not None:
        errors["P_A(alpha')"] = _binomial_se(p_a_alpha_prime, sum(c.total for c in a_prime))
    if p_b_beta is not None:
        errors["P_B(beta)"] = _binomial_se(p_b_beta, sum(c.total for c in b_unprimed))

    return CorrelationData(
        pair_probs=pair_probs,
        p_a_alpha_prime=p_a_alpha_prime,
        p_b_beta=p_b_beta,
        expectations=expectations,
        standard_errors=errors,
        source="monte-carlo",
    )


def _singles(
    cells: list[CoincidenceCounts], station: str, strict: bool, name: str
) -> float | None:
    total = sum(c.total for c in cells)
    if total == 0:
        if strict:
            raise IndeterminateError(f"{name} is 0/0: its setting never occurred")
        return None
    hits = sum(c.a_plus if station == "a" else c.b_plus for c in cells)
    return hits / total


# ---------------------------------------------------------------------------
# Run-record files
# ---------------------------------------------------------------------------


def write_run_record(run: RunRecord, path: Path) -> None:
    """Write a run as a tab-separated audit file, one event per line.

    Header comment lines carry the schedule and seed; lambda is written as a
    round-trip decimal string ("-" when the source has no hidden variable).
    """
    schedule = run.schedule
    quad = ",".join(repr(v) for v in schedule.quad.as_radians())
    pairs = ",".join(p.name for p in schedule.quarter_pairs)
    out = run.frame.select(
        pl.col("t"),
        pl.when(pl.col("lambda").is_nan())
        .then(pl.lit("-"))
        .otherwise(pl.col("lambda").cast(pl.Utf8))
        .alias("lambda"),
        pl.col("a_index"),
        pl.col("b_index"),
        pl.col("a_outcome"),
        pl.col("b_outcome"),
    )
    with open(path, "w") as f:
        f.write("# bell-timing run record\n")
        f.write(f"# total_time={schedule.total_time!r}\n")
        f.write(f"# quad={quad}\n")
        f.write(f"# quarter_pairs={pairs}\n")
        f.write(f"# seed={run.seed}\n")
        f.write(f"# n_pairs={run.n_pairs}\n")
        f.write(out.write_csv(separator="\t"))


def read_run_record(path: Path) -> RunRecord:
    """Read a file written by ``write_run_record`` and check its settings against the schedule."""
    header: dict[str, str] = {}
    with open(path, "r") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                header[key.strip()] = value.strip()
    missing = {"total_time", "quad", "quarter_pairs", "seed"} - set(header)
    if missing:
        raise ValueError(f"Run record {path} lacks header field(s): {', '.join(sorted(missing))}")

    quad = SettingsQuad.from_radians(*(float(v) for v in header["quad"].split(",")))
    schedule = Schedule.from_quarter_map(
        float(header["total_time"]),
        quad,
        tuple(SettingsPair[name] for name in header["quarter_pairs"].split(",")),
    )
    frame = pl.read_csv(
        path,
        separator="\t",
        comment_prefix="#",
        schema_overrides={"lambda": pl.Utf8},
    ).select(
        pl.col("t").cast(pl.Float64),
        pl.when(pl.col("lambda") == "-")
        .then(pl.lit(float("nan")))
        .otherwise(pl.col("lambda").cast(pl.Float64, strict=False))
        .alias("lambda"),
        pl.col("a_index").cast(pl.Int8),
        pl.col("b_index").cast(pl.Int8),
        pl.col("a_outcome").cast(pl.Int8),
        pl.col("b_outcome").cast(pl.Int8),
    )
    run = RunRecord(schedule=schedule, seed=int(header["seed"]), frame=frame)
    check_run_settings(run)
    return run


def check_run_settings(run: RunRecord) -> None:
    """Raise ValueError unless every event's settings match the schedule at its time."""
    if run.n_pairs == 0:
        return
    t = run.frame["t"].to_numpy()
    a_index, b_index = run.schedule.setting_indices(t)
    if not (
        np.array_equal(a_index, run.frame["a_index"].to_numpy())
        and np.array_equal(b_index, run.frame["b_index"].to_numpy())
    ):
        raise ValueError("Run record settings disagree with the schedule at the recorded times")
