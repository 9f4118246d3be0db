"""
Domain types for bell-timing.

This module provides the analyzer settings, the time-partitioned measurement
schedule, single pair events, coincidence counts and the correlation data
shared by every computation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from bell_timing.errors import IndeterminateError

logger = logging.getLogger(__name__)

# Canonicalized angles closer than this (on the circle of length pi) are equal
ANGLE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class Angle:
    """Analyzer orientation in radians, canonicalized to [0, pi).

    Polarization analyzers are pi-periodic, so angles differing by an integer
    multiple of pi compare equal.
    """

    value: float

    def __post_init__(self) -> None:
        raw = float(self.value)
        if not math.isfinite(raw):
            raise ValueError(f"Angle must be finite, got {self.value!r}")
        canonical = math.fmod(raw, math.pi)
        if canonical < 0:
            canonical += math.pi
        if canonical >= math.pi:
            canonical = 0.0
        object.__setattr__(self, "value", canonical)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Angle):
            return NotImplemented
        gap = abs(self.value - other.value)
        return min(gap, math.pi - gap) <= ANGLE_ATOL

    # Tolerance equality is not transitive, so no hash can agree with it
    __hash__ = None  # type: ignore[assignment]

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"Angle({self.value:.12g})"


class SettingsPair(Enum):
    """One of the four (A-setting, B-setting) combinations.

    The value is (a_index, b_index): index 0 is the unprimed setting
    (alpha or beta), index 1 the primed one.
    """

    AB = (0, 0)
    AB_PRIME = (0, 1)
    A_PRIME_B = (1, 0)
    A_PRIME_B_PRIME = (1, 1)

    @property
    def a_index(self) -> int:
        return self.value[0]

    @property
    def b_index(self) -> int:
        return self.value[1]

    @property
    def label(self) -> str:
        a = "alpha'" if self.a_index else "alpha"
        b = "beta'" if self.b_index else "beta"
        return f"({a},{b})"

    @classmethod
    def from_indices(cls, a_index: int, b_index: int) -> SettingsPair:
        return cls((int(a_index), int(b_index)))


# Reporting order used everywhere: (ab, ab', a'b, a'b')
PAIR_ORDER: tuple[SettingsPair, ...] = (
    SettingsPair.AB,
    SettingsPair.AB_PRIME,
    SettingsPair.A_PRIME_B,
    SettingsPair.A_PRIME_B_PRIME,
)


@dataclass(frozen=True)
class SettingsQuad:
    """The four analyzer angles {alpha, alpha', beta, beta'}."""

    alpha: Angle
    alpha_prime: Angle
    beta: Angle
    beta_prime: Angle

    def __post_init__(self) -> None:
        if self.alpha == self.alpha_prime:
            raise ValueError(
                f"Station A needs two distinct settings, got alpha = alpha' = {self.alpha.value}"
            )
        if self.beta == self.beta_prime:
            raise ValueError(
                f"Station B needs two distinct settings, got beta = beta' = {self.beta.value}"
            )

    @classmethod
    def from_radians(
        cls, alpha: float, alpha_prime: float, beta: float, beta_prime: float
    ) -> SettingsQuad:
        """Build a quad from raw radians in the order (alpha, alpha', beta, beta')."""
        return cls(
            alpha=Angle(alpha),
            alpha_prime=Angle(alpha_prime),
            beta=Angle(beta),
            beta_prime=Angle(beta_prime),
        )

    @classmethod
    def standard(cls) -> SettingsQuad:
        """alpha = 0, beta = pi/8, alpha' = pi/4, beta' = 3pi/8."""
        return cls.from_radians(0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8)

    @property
    def a_angles(self) -> tuple[Angle, Angle]:
        return (self.alpha, self.alpha_prime)

    @property
    def b_angles(self) -> tuple[Angle, Angle]:
        return (self.beta, self.beta_prime)

    def angles_for(self, pair: SettingsPair) -> tuple[Angle, Angle]:
        """Return the (A angle, B angle) of a settings pair."""
        return (self.a_angles[pair.a_index], self.b_angles[pair.b_index])

    def as_radians(self) -> tuple[float, float, float, float]:
        """Return (alpha, alpha', beta, beta') as floats."""
        return (
            self.alpha.value,
            self.alpha_prime.value,
            self.beta.value,
            self.beta_prime.value,
        )

    def shifted(self, offset: float) -> SettingsQuad:
        """Return the quad with every angle rotated by ``offset``."""
        a, ap, b, bp = self.as_radians()
        return SettingsQuad.from_radians(a + offset, ap + offset, b + offset, bp + offset)


# Default time layout: quarter 1 -> (alpha, beta'), 2 -> (alpha, beta),
# 3 -> (alpha', beta), 4 -> (alpha', beta')
DEFAULT_QUARTER_PAIRS: tuple[SettingsPair, ...] = (
    SettingsPair.AB_PRIME,
    SettingsPair.AB,
    SettingsPair.A_PRIME_B,
    SettingsPair.A_PRIME_B_PRIME,
)


@dataclass(frozen=True)
class Schedule:
    """Partition of [0, T] into four equal quarters with fixed settings pairs.

    Intervals are half-open: a boundary time belongs to the later quarter,
    and t = T belongs to the last quarter.
    """

    total_time: float
    quad: SettingsQuad
    quarter_pairs: tuple[SettingsPair, ...] = DEFAULT_QUARTER_PAIRS

    def __post_init__(self) -> None:
        if not (math.isfinite(self.total_time) and self.total_time > 0):
            raise ValueError(f"Total time must be positive, got {self.total_time}")
        if len(self.quarter_pairs) != 4 or set(self.quarter_pairs) != set(PAIR_ORDER):
            raise ValueError(
                f"Quarter map must use each settings pair exactly once, got {self.quarter_pairs}"
            )

    @classmethod
    def from_quarter_map(
        cls, total_time: float, quad: SettingsQuad, quarter_pairs: tuple[SettingsPair, ...]
    ) -> Schedule:
        """Build a schedule with a custom quarter -> settings-pair map."""
        return cls(total_time=total_time, quad=quad, quarter_pairs=tuple(quarter_pairs))

    @property
    def quarter_duration(self) -> float:
        """Delta T = T / 4."""
        return self.total_time / 4

    @property
    def breakpoints(self) -> tuple[float, float, float]:
        """Interior breakpoints {T/4, T/2, 3T/4}."""
        dt = self.quarter_duration
        return (dt, 2 * dt, 3 * dt)

    def quarter_bounds(self, quarter: int) -> tuple[float, float]:
        """Return [t0, t1) of quarter 0..3."""
        if quarter not in range(4):
            raise ValueError(f"Quarter index must be 0..3, got {quarter}")
        dt = self.quarter_duration
        end = self.total_time if quarter == 3 else (quarter + 1) * dt
        return (quarter * dt, end)

    def quarter_of(self, pair: SettingsPair) -> int:
        """Return the quarter index where ``pair`` is scheduled."""
        return self.quarter_pairs.index(pair)

    def quarters_with_a(self, a_index: int) -> tuple[int, ...]:
        """Quarters during which station A uses setting ``a_index``."""
        return tuple(q for q, p in enumerate(self.quarter_pairs) if p.a_index == a_index)

    def quarters_with_b(self, b_index: int) -> tuple[int, ...]:
        """Quarters during which station B uses setting ``b_index``."""
        return tuple(q for q, p in enumerate(self.quarter_pairs) if p.b_index == b_index)

    def quarter_index(self, t: float | np.ndarray) -> np.ndarray:
        """Vectorized quarter lookup; raises for times outside [0, T]."""
        times = np.asarray(t, dtype=float)
        if np.any(times < 0) or np.any(times > self.total_time) or np.any(np.isnan(times)):
            raise ValueError(f"Time outside [0, {self.total_time}]")
        idx = np.searchsorted(np.asarray(self.breakpoints), times, side="right")
        return np.minimum(idx, 3)

    def pair_at(self, t: float) -> SettingsPair:
        """Return the settings pair active at time t."""
        return self.quarter_pairs[int(self.quarter_index(t))]

    def settings_at(self, t: float) -> tuple[Angle, Angle]:
        """Return the unique (A angle, B angle) active at time t."""
        return self.quad.angles_for(self.pair_at(t))

    def setting_indices(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return per-time (a_index, b_index) arrays."""
        quarters = self.quarter_index(times)
        a_lookup = np.array([p.a_index for p in self.quarter_pairs], dtype=np.int8)
        b_lookup = np.array([p.b_index for p in self.quarter_pairs], dtype=np.int8)
        return a_lookup[quarters], b_lookup[quarters]

    def rescaled(self, factor: float) -> Schedule:
        """Return the same layout over [0, factor * T]."""
        return Schedule(
            total_time=self.total_time * factor,
            quad=self.quad,
            quarter_pairs=self.quarter_pairs,
        )


def build_schedule(total_time: float, quad: SettingsQuad) -> Schedule:
    """Return the default four-quarter schedule over [0, total_time]."""
    if not total_time > 0:
        raise ValueError(f"Total time must be positive, got {total_time}")
    return Schedule(total_time=float(total_time), quad=quad)


def settings_at(schedule: Schedule, t: float) -> tuple[Angle, Angle]:
    """Return the settings pair active at time t (boundaries go to the later quarter)."""
    return schedule.settings_at(t)


@dataclass(frozen=True)
class PairEvent:
    """One emitted pair: emission time, hidden variable, settings and +/-1 outcomes."""

    emission_time: float
    hidden: float
    a_setting: Angle
    b_setting: Angle
    a_outcome: int
    b_outcome: int

    def __post_init__(self) -> None:
        if self.a_outcome not in (1, -1) or self.b_outcome not in (1, -1):
            raise ValueError(
                f"Outcomes must be +1 or -1, got ({self.a_outcome}, {self.b_outcome})"
            )


@dataclass(frozen=True)
class CoincidenceCounts:
    """Counts C^{ij} for one settings pair (i, j in {+1, -1})."""

    c_pp: int = 0
    c_pm: int = 0
    c_mp: int = 0
    c_mm: int = 0

    def __post_init__(self) -> None:
        if min(self.c_pp, self.c_pm, self.c_mp, self.c_mm) < 0:
            raise ValueError(f"Counts must be nonnegative, got {self}")

    @property
    def total(self) -> int:
        return self.c_pp + self.c_pm + self.c_mp + self.c_mm

    @property
    def a_plus(self) -> int:
        """Events with a +1 (detection) at station A."""
        return self.c_pp + self.c_pm

    @property
    def b_plus(self) -> int:
        """Events with a +1 (detection) at station B."""
        return self.c_pp + self.c_mp

    def expectation(self) -> float:
        """Ratio of (C++ + C--) - (C+- + C-+) over all coincidences."""
        if self.total == 0:
            raise IndeterminateError("Expectation undefined: all coincidence counts are zero")
        return (self.c_pp + self.c_mm - self.c_pm - self.c_mp) / self.total


@dataclass
class CorrelationData:
    """Pair probabilities, singles and expectation values.

    A ``None`` entry marks an indeterminate (zero-over-zero) or unavailable
    quantity; consumers raise IndeterminateError when they need it.
    """

    pair_probs: dict[SettingsPair, float | None] = field(default_factory=dict)
    p_a_alpha_prime: float | None = None
    p_b_beta: float | None = None
    expectations: dict[SettingsPair, float | None] = field(default_factory=dict)
    standard_errors: dict[str, float] = field(default_factory=dict)
    source: str = ""

    def __post_init__(self) -> None:
        for pair, p in self.pair_probs.items():
            _check_range(p, 0.0, 1.0, f"P_AB{pair.label}")
        _check_range(self.p_a_alpha_prime, 0.0, 1.0, "P_A(alpha')")
        _check_range(self.p_b_beta, 0.0, 1.0, "P_B(beta)")
        for pair, e in self.expectations.items():
            _check_range(e, -1.0, 1.0, f"E{pair.label}")

    def pair_prob(self, pair: SettingsPair) -> float:
        value = self.pair_probs.get(pair)
        if value is None:
            raise IndeterminateError(f"P_AB{pair.label} is missing or indeterminate")
        return value

    def expectation(self, pair: SettingsPair) -> float:
        value = self.expectations.get(pair)
        if value is None:
            raise IndeterminateError(f"E{pair.label} is missing or indeterminate")
        return value

    def singles(self) -> tuple[float, float]:
        """Return (P_A(alpha'), P_B(beta))."""
        if self.p_a_alpha_prime is None or self.p_b_beta is None:
            raise IndeterminateError("Singles P_A(alpha') / P_B(beta) are missing or indeterminate")
        return (self.p_a_alpha_prime, self.p_b_beta)

    def expectation_map(self) -> dict[SettingsPair, float]:
        """Return all four expectations, raising if any is indeterminate."""
        return {pair: self.expectation(pair) for pair in PAIR_ORDER}

    def as_rows(self) -> list[dict]:
        """Flatten into row dicts (for tables and CSV)."""
        rows = []
        for pair in PAIR_ORDER:
            rows.append(
                {
                    "quantity": f"P_AB{pair.label}",
                    "value": self.pair_probs.get(pair),
                    "std_error": self.standard_errors.get(f"P_AB{pair.label}"),
                }
            )
        rows.append(
            {
                "quantity": "P_A(alpha')",
                "value": self.p_a_alpha_prime,
                "std_error": self.standard_errors.get("P_A(alpha')"),
            }
        )
        rows.append(
            {
                "quantity": "P_B(beta)",
                "value": self.p_b_beta,
                "std_error": self.standard_errors.get("P_B(beta)"),
            }
        )
        for pair in PAIR_ORDER:
            rows.append(
                {
                    "quantity": f"E{pair.label}",
                    "value": self.expectations.get(pair),
                    "std_error": self.standard_errors.get(f"E{pair.label}"),
                }
            )
        return rows


# Slack for values produced by floating-point arithmetic near a range edge
_RANGE_SLACK = 1e-12


def _check_range(value: float | None, lower: float, upper: float, name: str) -> None:
    if value is None:
        return
    if not (lower - _RANGE_SLACK <= value <= upper + _RANGE_SLACK):
        raise ValueError(f"{name} = {value} outside [{lower}, {upper}]")
