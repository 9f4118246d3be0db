"""Admissibility of a local model under time-sequenced measurement.

A local-realistic model can survive the observed violations only if its
factual and counterfactual time averages differ: when they are equal
(pointwise or on average), the usual CH and CHSH inequalities apply to it and
experiments have already refuted it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from bell_timing.errors import AdmissibilityInputError
from bell_timing.models import PAIR_ORDER, Schedule, SettingsQuad
from bell_timing.utils.local_models import LocalModel
from bell_timing.utils.quadrature import ExactTimeAverages, exact_time_averages
from bell_timing.utils.reference_values import get_annotation

logger = logging.getLogger(__name__)

# Singles entering the CH M form
CH_SINGLES = ("P_A(alpha')", "P_B(beta)")


class Verdict(str, Enum):
    REFUTED = "refuted-by-experiments"
    NOT_YET_REFUTED = "not-yet-refuted"


@dataclass(frozen=True)
class TermGap:
    term: str
    factual: float
    counterfactual: float
    gap: float
    pointwise_range: float

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "factual": self.factual,
            "counterfactual": self.counterfactual,
            "gap": self.gap,
            "pointwise_range": self.pointwise_range,
        }


@dataclass(frozen=True)
class AdmissibilityReport:
    model_name: str
    tol: float
    terms: tuple[TermGap, ...]
    world_a_holds: bool
    world_b_holds: bool
    averages: ExactTimeAverages

    @property
    def verdict(self) -> Verdict:
        return Verdict.REFUTED if self.world_b_holds else Verdict.NOT_YET_REFUTED

    @property
    def max_gap(self) -> float:
        return max(term.gap for term in self.terms)

    @property
    def header(self) -> str:
        return (
            f"Model {self.model_name!r}: averages count as equal when |factual - counterfactual| <= {self.tol:g}"
        )

    def as_rows(self) -> list[dict]:
        return [term.to_dict() for term in self.terms]

    def summary(self) -> dict:
        return {
            "model": self.model_name,
            "tol": self.tol,
            "world_a_holds": self.world_a_holds,
            "world_b_holds": self.world_b_holds,
            "verdict": self.verdict.value,
            "max_gap": self.max_gap,
        }


def check_model(
    model: object,
    schedule: Schedule,
    quad: SettingsQuad | None = None,
    tol: float = 1e-6,
    *,
    resolution: float = 1e-3,
    quad_tol: float = 1e-9,
    max_halvings: int = 12,
) -> AdmissibilityReport:
    """Compare factual and counterfactual time averages term by term.

    Six CH terms (four pair probabilities and the two singles) and the four
    expectations are checked. World B holds when every gap is within ``tol``;
    world A additionally needs every term constant in time within ``tol``.

    Raises:
        AdmissibilityInputError: If ``model`` is not a fully specified local model.
    """
    if not isinstance(model, LocalModel):
        name = getattr(model, "name", type(model).__name__)
        raise AdmissibilityInputError(
            f"Cannot judge {name!r}: {get_annotation('data_only_admissibility')}"
        )
    if not tol > 0:
        raise ValueError(f"Admissibility tolerance must be positive, got {tol}")
    if quad is not None and quad != schedule.quad:
        schedule = Schedule.from_quarter_map(schedule.total_time, quad, schedule.quarter_pairs)

    averages = exact_time_averages(
        model, schedule, resolution, tol=quad_tol, max_halvings=max_halvings
    )
    names = [averages.pair_term(pair).name for pair in PAIR_ORDER]
    names += list(CH_SINGLES)
    names += [averages.correlation_term(pair).name for pair in PAIR_ORDER]

    terms = []
    for name in names:
        term = averages.term(name)
        terms.append(
            TermGap(
                term=name,
                factual=term.factual_mean,
                counterfactual=term.counterfactual_mean,
                gap=term.gap,
                pointwise_range=term.pointwise_range,
            )
        )

    world_b = all(t.gap <= tol for t in terms)
    world_a = world_b and all(t.pointwise_range <= tol for t in terms)
    report = AdmissibilityReport(
        model_name=model.name,
        tol=tol,
        terms=tuple(terms),
        world_a_holds=world_a,
        world_b_holds=world_b,
        averages=averages,
    )
    logger.info("%s -> %s (max gap %.3g)", model.name, report.verdict.value, report.max_gap)
    return report
