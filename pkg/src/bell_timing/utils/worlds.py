"""Possible worlds: valuation rules for the counterfactual terms of a timed Bell test.

In a time-sequenced experiment each settings pair is only measured during its
own quarter. A "world" says what the unmeasured (counterfactual) probabilities
and expectations are in the other three quarters; the CH and CHSH bounds that
local realism then implies follow from that choice.

  A  pointwise-equal: counterfactual values equal the factual ones at every t
  B  average-equal: the time averages are equal (the usual inequalities)
  C  zero: counterfactual probabilities and expectations vanish
  D  qm-like: a counterfactual setting change x -> x' costs a factor cos^2(x - x')
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import Enum

from bell_timing.errors import SinglesConditionError
from bell_timing.models import PAIR_ORDER, CorrelationData, SettingsPair, SettingsQuad
from bell_timing.utils.inequalities import (
    BoundVerdict,
    ch_m_value,
    ch_sum,
    check_counterfactual_range,
    chsh_s,
    lr_only_chsh,
    pair_sum,
)
from bell_timing.utils.reference_values import get_annotation, get_published

logger = logging.getLogger(__name__)

CounterfactualRule = Callable[[Mapping[SettingsPair, float], SettingsQuad], Mapping[SettingsPair, float]]


class WorldAssumption(Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"

    @property
    def description(self) -> str:
        return {
            "A": "pointwise-equal",
            "B": "average-equal",
            "C": "zero",
            "D": "qm-like",
        }[self.value]

    @classmethod
    def parse(cls, value: str | WorldAssumption) -> WorldAssumption:
        if isinstance(value, WorldAssumption):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"Unknown world {value!r}; expected one of A, B, C, D") from None


def world_weights(quad: SettingsQuad) -> tuple[float, float]:
    """(w_A, w_B) = (cos^2(alpha - alpha'), cos^2(beta - beta'))."""
    a, a_prime, b, b_prime = quad.as_radians()
    return (math.cos(a - a_prime) ** 2, math.cos(b - b_prime) ** 2)


def counterfactual_weight(world: WorldAssumption, quad: SettingsQuad) -> float:
    """k such that E-cf = k * E under ``world``.

    World D spreads the three counterfactual quarters over one A change (w_A),
    one B change (w_B) and one double change (w_A * w_B).
    """
    if world in (WorldAssumption.A, WorldAssumption.B):
        return 3.0
    if world is WorldAssumption.C:
        return 0.0
    w_a, w_b = world_weights(quad)
    return w_a + w_b + w_a * w_b


def effective_chsh_bound(k: float) -> float:
    """Bound on plain S implied by the LR-only bound 8 when E-cf = k E."""
    if 1.0 + k <= 0.0:
        return math.inf
    return 8.0 / (1.0 + k)


def world_counterfactual_expectations(
    world: WorldAssumption | CounterfactualRule,
    factual: Mapping[SettingsPair, float],
    quad: SettingsQuad,
) -> dict[SettingsPair, float]:
    """Counterfactual expectation E-cf for every settings pair.

    ``world`` is one of the four built-in worlds or any callable
    ``(factual, quad) -> E-cf`` mapping.
    """
    for pair in PAIR_ORDER:
        if not -1.0 <= factual[pair] <= 1.0:
            raise ValueError(f"Factual E{pair.label} = {factual[pair]} outside [-1, 1]")
    if isinstance(world, WorldAssumption):
        k = counterfactual_weight(world, quad)
        counterfactual = {pair: k * factual[pair] for pair in PAIR_ORDER}
    else:
        result = world(factual, quad)
        counterfactual = {pair: float(result[pair]) for pair in PAIR_ORDER}
    check_counterfactual_range(counterfactual)
    return counterfactual


def _pair_coefficient(world: WorldAssumption, target: SettingsPair, other: SettingsPair, quad: SettingsQuad) -> float:
    # Share of P(other) counted toward P(target) during other's quarter
    if target is other:
        return 1.0
    if world is WorldAssumption.C:
        return 0.0
    w_a, w_b = world_weights(quad)
    weight = 1.0
    if target.a_index != other.a_index:
        weight *= w_a
    if target.b_index != other.b_index:
        weight *= w_b
    return weight


def world_pair_probabilities(
    world: WorldAssumption, data: CorrelationData, quad: SettingsQuad
) -> dict[SettingsPair, float]:
    """Full-interval pair probabilities, counterfactual quarters valued per ``world``."""
    probs = {pair: data.pair_prob(pair) for pair in PAIR_ORDER}
    if world in (WorldAssumption.A, WorldAssumption.B):
        return probs
    return {
        target: sum(_pair_coefficient(world, target, other, quad) * probs[other] for other in PAIR_ORDER) / 4.0
        for target in PAIR_ORDER
    }


def world_singles(
    world: WorldAssumption, data: CorrelationData, quad: SettingsQuad, *, as_printed: bool = False
) -> tuple[float, float]:
    """Full-interval (P_A(alpha'), P_B(beta)) under ``world``.

    Each single is factual on half of the run. World C adds nothing on the
    other half; world D adds the single at the other setting weighted by
    cos^2 of the angle change (unpolarized singles: same value).
    ``as_printed`` applies a 1/4 instead of a 1/2 overall coefficient.
    """
    p_a, p_b = data.singles()
    if world in (WorldAssumption.A, WorldAssumption.B):
        return (p_a, p_b)
    coefficient = 0.25 if as_printed else 0.5
    if world is WorldAssumption.C:
        return (coefficient * p_a, coefficient * p_b)
    w_a, w_b = world_weights(quad)
    return (coefficient * (1.0 + w_a) * p_a, coefficient * (1.0 + w_b) * p_b)


@dataclass(frozen=True)
class WorldChReport:
    world: WorldAssumption
    ch: BoundVerdict
    pair_part: float
    singles_part: float
    m_form: BoundVerdict | None = None
    alternative: BoundVerdict | None = None
    annotations: tuple[str, ...] = ()

    @property
    def ch_value(self) -> float:
        return self.ch.value

    @property
    def ch_bounds(self) -> tuple[float, float]:
        return (self.ch.lower, self.ch.upper)

    @property
    def qm_violates_ch(self) -> bool:
        return self.ch.violated


@dataclass(frozen=True)
class WorldChshReport:
    world: WorldAssumption | str
    chsh: BoundVerdict
    lr_only: BoundVerdict
    counterfactual_weight: float | None
    counterfactual_expectations: dict[SettingsPair, float]
    annotations: tuple[str, ...] = ()

    @property
    def chsh_value(self) -> float:
        return self.chsh.value

    @property
    def chsh_bound(self) -> float:
        return self.chsh.upper

    @property
    def qm_violates_chsh(self) -> bool:
        return self.chsh.violated


def world_ch_report(
    world: WorldAssumption,
    data: CorrelationData,
    quad: SettingsQuad,
    *,
    singles_tol: float = 1e-9,
    sigma_factor: float | None = None,
) -> WorldChReport:
    """CH verdict under ``world``.

    Worlds A and B retrieve the usual CH sum (with the M form alongside);
    worlds C and D evaluate the quarter-weighted M form with bounds [-1, 0].
    """
    world = WorldAssumption.parse(world)
    annotations: list[str] = []

    if world in (WorldAssumption.A, WorldAssumption.B):
        m_form = ch_m_value(data)
        try:
            ch = ch_sum(data, singles_tol=singles_tol, sigma_factor=sigma_factor)
        except SinglesConditionError as e:
            logger.warning("World %s: %s", world.value, e)
            annotations.append(str(e))
            ch = m_form
        probs = {pair: data.pair_prob(pair) for pair in PAIR_ORDER}
        return WorldChReport(
            world=world,
            ch=ch,
            pair_part=pair_sum(probs),
            singles_part=sum(data.singles()),
            m_form=m_form,
            annotations=tuple(annotations),
        )

    pair_part = pair_sum(world_pair_probabilities(world, data, quad))
    singles_part = sum(world_singles(world, data, quad))
    ch = BoundVerdict(f"CH (world {world.value})", pair_part - singles_part, -1.0, 0.0)
    alternative = None
    if world is WorldAssumption.C:
        annotations.append(get_annotation("world_c_pair_part"))
        logger.info(
            "World C pair part %.4f (published figure %s)", pair_part, get_published("world_c_pair_part")
        )
    else:
        printed_singles = sum(world_singles(world, data, quad, as_printed=True))
        alternative = BoundVerdict(
            f"CH (world {world.value}, singles as printed)", pair_part - printed_singles, -1.0, 0.0
        )
        annotations.append(get_annotation("world_d_singles"))
        if alternative.violated != ch.violated:
            logger.warning(
                "World D verdict depends on the singles coefficient: %.4f vs %.4f",
                ch.value,
                alternative.value,
            )
    return WorldChReport(
        world=world,
        ch=ch,
        pair_part=pair_part,
        singles_part=singles_part,
        alternative=alternative,
        annotations=tuple(annotations),
    )


def _common_factor(factual: Mapping[SettingsPair, float], counterfactual: Mapping[SettingsPair, float]) -> float | None:
    ratios = [counterfactual[p] / factual[p] for p in PAIR_ORDER if abs(factual[p]) > 1e-12]
    if not ratios:
        return None
    if max(ratios) - min(ratios) > 1e-9:
        return None
    return ratios[0]


def world_chsh_report(
    world: WorldAssumption | CounterfactualRule,
    data: CorrelationData | Mapping[SettingsPair, float],
    quad: SettingsQuad,
    *,
    as_printed: bool = False,
) -> WorldChshReport:
    """CHSH verdict under ``world``: plain S against the effective bound 8 / (1 + k).

    For a custom rule the effective bound is available only when E-cf is a
    common multiple k of E; the LR-only verdict is always reported.
    """
    if isinstance(world, str):
        world = WorldAssumption.parse(world)
    s = chsh_s(data, as_printed=as_printed)
    factual = data.expectation_map() if isinstance(data, CorrelationData) else dict(data)
    counterfactual = world_counterfactual_expectations(world, factual, quad)
    lr_only = lr_only_chsh(factual, counterfactual)

    if isinstance(world, WorldAssumption):
        k = counterfactual_weight(world, quad)
        label = world.value
    else:
        k = _common_factor(factual, counterfactual)
        label = getattr(world, "__name__", "custom")
    bound = effective_chsh_bound(k) if k is not None else math.inf
    annotations = (get_annotation("chsh_pairing"),) if as_printed else ()
    return WorldChshReport(
        world=world if isinstance(world, WorldAssumption) else label,
        chsh=BoundVerdict(f"{s.name} (world {label})", s.value, 0.0, bound),
        lr_only=lr_only,
        counterfactual_weight=k,
        counterfactual_expectations=counterfactual,
        annotations=annotations,
    )


@dataclass(frozen=True)
class WorldReport:
    """CH and CHSH conclusions under one world."""

    world: WorldAssumption
    ch_part: WorldChReport
    chsh_part: WorldChshReport
    annotations: tuple[str, ...] = field(default=())

    @property
    def ch_value(self) -> float:
        return self.ch_part.ch_value

    @property
    def ch_bounds(self) -> tuple[float, float]:
        return self.ch_part.ch_bounds

    @property
    def chsh_value(self) -> float:
        return self.chsh_part.chsh_value

    @property
    def chsh_bound(self) -> float:
        return self.chsh_part.chsh_bound

    @property
    def qm_violates_ch(self) -> bool:
        return self.ch_part.qm_violates_ch

    @property
    def qm_violates_chsh(self) -> bool:
        return self.chsh_part.qm_violates_chsh

    def as_rows(self) -> list[dict]:
        verdicts = [self.ch_part.ch]
        for extra in (self.ch_part.m_form, self.ch_part.alternative):
            if extra is not None and extra is not self.ch_part.ch:
                verdicts.append(extra)
        verdicts += [self.chsh_part.chsh, self.chsh_part.lr_only]
        return [
            {
                "world": self.world.value,
                "assumption": self.world.description,
                "check": v.name,
                "value": v.value,
                "lower": v.lower,
                "upper": v.upper,
                "violated": v.violated,
            }
            for v in verdicts
        ]


def world_report(
    world: WorldAssumption | str,
    data: CorrelationData,
    quad: SettingsQuad,
    *,
    singles_tol: float = 1e-9,
    sigma_factor: float | None = None,
    as_printed: bool = False,
) -> WorldReport:
    world = WorldAssumption.parse(world)
    ch_part = world_ch_report(world, data, quad, singles_tol=singles_tol, sigma_factor=sigma_factor)
    chsh_part = world_chsh_report(world, data, quad, as_printed=as_printed)
    return WorldReport(
        world=world,
        ch_part=ch_part,
        chsh_part=chsh_part,
        annotations=ch_part.annotations + chsh_part.annotations,
    )


def all_world_reports(data: CorrelationData, quad: SettingsQuad, **kwargs) -> list[WorldReport]:
    return [world_report(world, data, quad, **kwargs) for world in WorldAssumption]
