"""Brute-force checks of the classical bounds.

The CH bounds rest on an elementary identity: for 0 <= x, x' <= X and
0 <= y, y' <= Y,

    -XY <= xy - xy' + x'y + x'y' - Xy - Yx' <= 0.

It is checked by random sampling plus every corner, and the CH and CHSH bounds
are re-derived by enumerating the 16 deterministic local strategies.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from bell_timing.models import PAIR_ORDER, CorrelationData, SettingsPair, SettingsQuad, build_schedule
from bell_timing.utils.inequalities import ch_m_value, chsh_s
from bell_timing.utils.local_models import PairSource
from bell_timing.utils.quadrature import exact_time_averages

logger = logging.getLogger(__name__)


def product_identity_expression(x, x_prime, y, y_prime, X=1.0, Y=1.0):
    """xy - xy' + x'y + x'y' - Xy - Yx' (scalars or numpy arrays)."""
    return x * y - x * y_prime + x_prime * y + x_prime * y_prime - X * y - Y * x_prime


@dataclass(frozen=True)
class IdentityCheck:
    n_samples: int
    worst_excursion: float
    min_value: float
    max_value: float
    corner_min: float
    corner_max: float

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "worst_excursion": self.worst_excursion,
            "min_value": self.min_value,
            "max_value": self.max_value,
            "corner_min": self.corner_min,
            "corner_max": self.corner_max,
        }


def corner_values() -> dict[tuple[int, int, int, int], float]:
    """The expression at all 16 corners of [0, 1]^4 (X = Y = 1)."""
    return {
        corner: float(product_identity_expression(*corner))
        for corner in itertools.product((0, 1), repeat=4)
    }


def _excursion(values: np.ndarray, lower: np.ndarray | float) -> np.ndarray:
    return np.maximum(np.maximum(values, 0.0), np.maximum(lower - values, 0.0))


def verify_product_identity(
    n_samples: int,
    seed: int,
    *,
    general_bounds: bool = False,
    chunk_size: int = 1_000_000,
) -> IdentityCheck:
    """Largest excursion of the identity outside its bounds over random samples and corners.

    With ``general_bounds`` X and Y are drawn from (0, 2] and the variables from
    [0, X] / [0, Y]; otherwise X = Y = 1.
    """
    if n_samples <= 0:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    rng = np.random.default_rng(seed)

    corners = corner_values()
    worst = float(np.max(_excursion(np.array(list(corners.values())), -1.0)))
    lo, hi = min(corners.values()), max(corners.values())

    remaining = n_samples
    while remaining > 0:
        size = min(chunk_size, remaining)
        remaining -= size
        if general_bounds:
            X = 2.0 - rng.random(size) * 2.0
            Y = 2.0 - rng.random(size) * 2.0
        else:
            X = Y = np.ones(size)
        u = rng.random((4, size))
        x, x_prime = u[0] * X, u[1] * X
        y, y_prime = u[2] * Y, u[3] * Y
        values = product_identity_expression(x, x_prime, y, y_prime, X, Y)
        worst = max(worst, float(np.max(_excursion(values, -X * Y))))
        lo = min(lo, float(np.min(values)))
        hi = max(hi, float(np.max(values)))

    logger.debug("Identity check over %d samples: worst excursion %g", n_samples, worst)
    return IdentityCheck(
        n_samples=n_samples,
        worst_excursion=worst,
        min_value=lo,
        max_value=hi,
        corner_min=min(corners.values()),
        corner_max=max(corners.values()),
    )


@dataclass(frozen=True)
class DeterministicStrategy:
    """Fixed outcomes for both settings of each station; +1 is a detection."""

    a_out: tuple[int, int]
    b_out: tuple[int, int]

    def __post_init__(self) -> None:
        for value in (*self.a_out, *self.b_out):
            if value not in (1, -1):
                raise ValueError(f"Strategy outcomes must be +1 or -1, got {value}")

    def expectation(self, pair: SettingsPair) -> float:
        return float(self.a_out[pair.a_index] * self.b_out[pair.b_index])

    def pair_detection(self, pair: SettingsPair) -> float:
        return 1.0 if self.a_out[pair.a_index] == 1 and self.b_out[pair.b_index] == 1 else 0.0

    def correlation_data(self) -> CorrelationData:
        return CorrelationData(
            pair_probs={pair: self.pair_detection(pair) for pair in PAIR_ORDER},
            p_a_alpha_prime=1.0 if self.a_out[1] == 1 else 0.0,
            p_b_beta=1.0 if self.b_out[0] == 1 else 0.0,
            expectations={pair: self.expectation(pair) for pair in PAIR_ORDER},
            source="strategy",
        )

    def signed_s(self) -> float:
        """E(a,b) - E(a,b') + E(a',b) + E(a',b')."""
        e = {pair: self.expectation(pair) for pair in PAIR_ORDER}
        return (
            e[SettingsPair.AB]
            - e[SettingsPair.AB_PRIME]
            + e[SettingsPair.A_PRIME_B]
            + e[SettingsPair.A_PRIME_B_PRIME]
        )

    @classmethod
    def all(cls) -> list[DeterministicStrategy]:
        return [
            cls(a_out=(a0, a1), b_out=(b0, b1))
            for a0, a1, b0, b1 in itertools.product((1, -1), repeat=4)
        ]


@dataclass(frozen=True)
class StrategyEnumeration:
    rows: list[dict]
    ch_sum_min: float
    ch_sum_max: float
    m_min: float
    m_max: float
    s_min: float
    s_max: float
    s_abs_max: float

    def extremes(self) -> dict:
        return {
            "ch_sum_min": self.ch_sum_min,
            "ch_sum_max": self.ch_sum_max,
            "m_min": self.m_min,
            "m_max": self.m_max,
            "s_min": self.s_min,
            "s_max": self.s_max,
            "s_abs_max": self.s_abs_max,
        }


def enumerate_strategies(quad: SettingsQuad | None = None) -> StrategyEnumeration:
    """CH and CHSH values of all 16 deterministic strategies.

    A strategy's payoffs depend only on its outcome assignment, so ``quad``
    only labels the result. The CH sum of a strategy is its M value plus 1.
    """
    rows = []
    for strategy in DeterministicStrategy.all():
        data = strategy.correlation_data()
        m = ch_m_value(data).value
        rows.append(
            {
                "a_out": f"{strategy.a_out[0]:+d},{strategy.a_out[1]:+d}",
                "b_out": f"{strategy.b_out[0]:+d},{strategy.b_out[1]:+d}",
                "m_value": m,
                "ch_sum": m + 1.0,
                "s_signed": strategy.signed_s(),
                "s_abs": chsh_s(data).value,
            }
        )
    if quad is not None:
        logger.debug("Enumerating strategies for quad %s", quad.as_radians())
    return StrategyEnumeration(
        rows=rows,
        ch_sum_min=min(r["ch_sum"] for r in rows),
        ch_sum_max=max(r["ch_sum"] for r in rows),
        m_min=min(r["m_value"] for r in rows),
        m_max=max(r["m_value"] for r in rows),
        s_min=min(r["s_signed"] for r in rows),
        s_max=max(r["s_signed"] for r in rows),
        s_abs_max=max(r["s_abs"] for r in rows),
    )


@dataclass(frozen=True)
class MixtureCheck:
    model_name: str
    ch_sum: float
    m_value: float
    s_value: float
    max_deviation: float

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "ch_sum": self.ch_sum,
            "m_value": self.m_value,
            "s_value": self.s_value,
            "max_deviation": self.max_deviation,
        }


def mixture_consistency(
    model: PairSource,
    n_grid: int = 1000,
    *,
    quad: SettingsQuad | None = None,
    tol: float = 1e-9,
) -> MixtureCheck:
    """How far a static model's full-interval CH/CHSH values stray outside the strategy bounds.

    ``n_grid`` is the number of quadrature steps over the run at the coarsest
    level. Returns the largest excursion (0 when consistent).
    """
    if model.time_dependent:
        raise ValueError(
            f"Model {model.name!r} is time-dependent; mixture consistency applies to static models only"
        )
    quad = quad or SettingsQuad.standard()
    bounds = enumerate_strategies(quad)
    averages = exact_time_averages(model, build_schedule(1.0, quad), 1.0 / n_grid, tol=tol)
    data = averages.full_interval_data()
    m = ch_m_value(data).value
    s = chsh_s(data).value
    deviation = max(
        0.0,
        m - bounds.m_max,
        bounds.m_min - m,
        s - bounds.s_abs_max,
    )
    return MixtureCheck(model.name, m + 1.0, m, s, deviation)
