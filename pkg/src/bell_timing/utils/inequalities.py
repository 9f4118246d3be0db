"""CH and CHSH evaluators with explicit bound verdicts."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

from bell_timing.errors import CounterfactualRangeError, SinglesConditionError
from bell_timing.models import PAIR_ORDER, CorrelationData, SettingsPair

AB = SettingsPair.AB
AB_PRIME = SettingsPair.AB_PRIME
A_PRIME_B = SettingsPair.A_PRIME_B
A_PRIME_B_PRIME = SettingsPair.A_PRIME_B_PRIME

Expectations = Mapping[SettingsPair, float]


@dataclass(frozen=True)
class BoundVerdict:
    """A computed value checked against a closed interval [lower, upper]."""

    name: str
    value: float
    lower: float
    upper: float

    @property
    def satisfied(self) -> bool:
        return self.lower <= self.value <= self.upper

    @property
    def violated(self) -> bool:
        return not self.satisfied

    @property
    def margin(self) -> float:
        """Distance to the nearest bound; negative when the value lies outside."""
        return min(self.value - self.lower, self.upper - self.value)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "satisfied": self.satisfied,
            "margin": self.margin,
        }


def pair_sum(pair_probs: Mapping[SettingsPair, float]) -> float:
    """P(a,b) - P(a,b') + P(a',b) + P(a',b')."""
    return pair_probs[AB] - pair_probs[AB_PRIME] + pair_probs[A_PRIME_B] + pair_probs[A_PRIME_B_PRIME]


def ch_m_value(data: CorrelationData) -> BoundVerdict:
    """CH inequality in the form -1 <= M <= 0 with the singles subtracted.

    M = P_AB(a,b) - P_AB(a,b') + P_AB(a',b) + P_AB(a',b') - P_A(a') - P_B(b).
    """
    probs = {pair: data.pair_prob(pair) for pair in PAIR_ORDER}
    p_a, p_b = data.singles()
    return BoundVerdict("CH (M form)", pair_sum(probs) - p_a - p_b, -1.0, 0.0)


def singles_tolerance(data: CorrelationData, singles_tol: float, sigma_factor: float | None = None) -> dict[str, float]:
    """Allowed deviation of each single from 1/2.

    Analytic data uses ``singles_tol``; estimated data with standard errors
    also allows ``sigma_factor`` binomial standard errors.
    """
    tolerances = {}
    for key in ("P_A(alpha')", "P_B(beta)"):
        tol = singles_tol
        se = data.standard_errors.get(key)
        if sigma_factor is not None and se is not None:
            tol = max(tol, sigma_factor * se)
        tolerances[key] = tol
    return tolerances


def ch_sum(
    data: CorrelationData,
    *,
    singles_tol: float = 1e-9,
    sigma_factor: float | None = None,
) -> BoundVerdict:
    """The CH sum for unpolarized singles: 0 <= P(a,b) - P(a,b') + P(a',b) + P(a',b') <= 1.

    Raises:
        SinglesConditionError: If a single differs from 1/2 beyond tolerance.
    """
    p_a, p_b = data.singles()
    tolerances = singles_tolerance(data, singles_tol, sigma_factor)
    for key, value in (("P_A(alpha')", p_a), ("P_B(beta)", p_b)):
        if abs(value - 0.5) > tolerances[key]:
            raise SinglesConditionError(
                f"{key} = {value} differs from 1/2 by more than {tolerances[key]}; "
                "use the M form of the CH inequality instead"
            )
    probs = {pair: data.pair_prob(pair) for pair in PAIR_ORDER}
    return BoundVerdict("CH sum", pair_sum(probs), 0.0, 1.0)


def _expectations(data: CorrelationData | Expectations) -> dict[SettingsPair, float]:
    if isinstance(data, CorrelationData):
        return data.expectation_map()
    return {pair: float(data[pair]) for pair in PAIR_ORDER}


def chsh_value(e: Expectations, *, as_printed: bool = False) -> float:
    if as_printed:
        return abs(e[AB] - e[A_PRIME_B_PRIME]) + abs(e[A_PRIME_B_PRIME] + e[A_PRIME_B])
    return abs(e[AB] - e[AB_PRIME]) + abs(e[A_PRIME_B] + e[A_PRIME_B_PRIME])


def chsh_s(data: CorrelationData | Expectations, *, as_printed: bool = False) -> BoundVerdict:
    """S = |E(a,b) - E(a,b')| + |E(a',b) + E(a',b')| <= 2.

    With ``as_printed`` the pairing |E(a,b) - E(a',b')| + |E(a',b') + E(a',b)|
    is used instead.
    """
    e = _expectations(data)
    name = "CHSH S (as printed)" if as_printed else "CHSH S"
    return BoundVerdict(name, chsh_value(e, as_printed=as_printed), 0.0, 2.0)


def check_counterfactual_range(counterfactual: Expectations) -> None:
    for pair in PAIR_ORDER:
        value = counterfactual[pair]
        if not -3.0 <= value <= 3.0 or math.isnan(value):
            raise CounterfactualRangeError(
                f"Counterfactual E{pair.label} = {value} outside [-3, 3]"
            )


def lr_only_chsh(
    factual: CorrelationData | Expectations,
    counterfactual: Expectations,
) -> BoundVerdict:
    """CHSH bound that follows from local realism alone, with explicit counterfactual terms.

    Each counterfactual expectation is a sum of three per-quarter averages, so
    it is bounded by 3 in magnitude and the whole expression by 8.
    """
    e = _expectations(factual)
    cf = {pair: float(counterfactual[pair]) for pair in PAIR_ORDER}
    check_counterfactual_range(cf)
    value = abs(cf[AB] + e[AB] - e[AB_PRIME] - cf[AB_PRIME]) + abs(
        e[A_PRIME_B_PRIME] + cf[A_PRIME_B_PRIME] + e[A_PRIME_B] + cf[A_PRIME_B]
    )
    return BoundVerdict("LR-only CHSH", value, 0.0, 8.0)
