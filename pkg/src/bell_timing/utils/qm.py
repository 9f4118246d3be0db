"""Closed-form predictions for the |phi+> = (|x,x> + |y,y>) / sqrt(2) polarization state.

These serve as the reference "observed" data: pair probabilities
1/2 cos^2(a - b), unpolarized singles 1/2 and expectations cos(2(a - b)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from bell_timing.models import PAIR_ORDER, Angle, CorrelationData, SettingsQuad


@dataclass(frozen=True)
class QmState:
    """Marker for the |phi+> state, the only state supported."""

    name: str = "phi+"


PHI_PLUS = QmState()


def _radians(angle: Angle | float) -> float:
    return angle.value if isinstance(angle, Angle) else float(angle)


def qm_outcome_probabilities(a: Angle | float, b: Angle | float) -> dict[tuple[int, int], float]:
    """Joint outcome table {(+1,+1): p, (+1,-1): p, (-1,+1): p, (-1,-1): p}.

    "+1" is transmission (detection) and "-1" reflection.
    """
    delta = _radians(a) - _radians(b)
    same = 0.5 * math.cos(delta) ** 2
    diff = 0.5 * math.sin(delta) ** 2
    return {(1, 1): same, (1, -1): diff, (-1, 1): diff, (-1, -1): same}


def qm_pair_probability(a: Angle | float, b: Angle | float) -> float:
    """Probability of a double detection: 1/2 cos^2(a - b)."""
    return 0.5 * math.cos(_radians(a) - _radians(b)) ** 2


def qm_singles_probability(a: Angle | float) -> float:
    """Each photon alone is unpolarized."""
    return 0.5


def qm_expectation(a: Angle | float, b: Angle | float) -> float:
    """E(a, b) = cos(2(a - b))."""
    return math.cos(2 * (_radians(a) - _radians(b)))


def qm_correlation_data(quad: SettingsQuad) -> CorrelationData:
    """Bundle all four pair probabilities, both singles and all four expectations."""
    pair_probs = {}
    expectations = {}
    for pair in PAIR_ORDER:
        a, b = quad.angles_for(pair)
        pair_probs[pair] = qm_pair_probability(a, b)
        expectations[pair] = qm_expectation(a, b)
    return CorrelationData(
        pair_probs=pair_probs,
        p_a_alpha_prime=qm_singles_probability(quad.alpha_prime),
        p_b_beta=qm_singles_probability(quad.beta),
        expectations=expectations,
        source="qm",
    )
