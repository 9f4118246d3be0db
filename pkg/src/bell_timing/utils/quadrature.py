"""Deterministic time averages of a local model under a schedule.

Every quantity q(t) = integral of rho(lambda, t) g(lambda, t) d lambda is
averaged over each quarter of the schedule with a composite midpoint rule,
halving the step (Richardson-extrapolated) until successive estimates agree.
From the four quarter means follow the factual average (quarters where the
settings were in force), the counterfactual average (the other quarters) and
the full-interval average.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from bell_timing.errors import QuadratureError
from bell_timing.models import PAIR_ORDER, CorrelationData, Schedule, SettingsPair
from bell_timing.utils.local_models import LocalModel, PairSource

logger = logging.getLogger(__name__)

# Lambda nodes at the coarsest level, and the cap reached by doubling
LAMBDA_NODES = 8
MAX_LAMBDA_NODES = 4096
# Time nodes evaluated per block (bounds memory of the time x lambda grid)
BLOCK_SIZE = 8192


@dataclass(frozen=True)
class QuadratureResult:
    """Converged interval mean with the range of the integrand on the finest grid."""

    value: float
    minimum: float
    maximum: float
    nodes: int
    halvings: int


def converged_mean(
    fn: Callable[[np.ndarray, int], np.ndarray],
    t0: float,
    t1: float,
    *,
    step: float,
    tol: float = 1e-9,
    max_halvings: int = 12,
) -> QuadratureResult:
    """Mean of fn over [t0, t1] by the composite midpoint rule with step halving.

    ``fn(t, n_lambda)`` returns the integrand at the nodes ``t``. Successive
    Richardson estimates (4 M(h/2) - M(h)) / 3 must agree within
    ``tol * max(1, |value|)``; otherwise QuadratureError is raised.
    """
    if not step > 0:
        raise ValueError(f"Quadrature step must be positive, got {step}")
    span = t1 - t0
    n = max(1, math.ceil(span / step - 1e-12))
    n_lambda = LAMBDA_NODES

    previous_mid: float | None = None
    previous_rich: float | None = None
    for level in range(max_halvings + 1):
        nodes = t0 + span * (np.arange(n) + 0.5) / n
        total = 0.0
        lo, hi = math.inf, -math.inf
        for start in range(0, n, BLOCK_SIZE):
            values = np.asarray(fn(nodes[start : start + BLOCK_SIZE], n_lambda), dtype=float)
            total += float(np.sum(values))
            lo = min(lo, float(np.min(values)))
            hi = max(hi, float(np.max(values)))
        mid = total / n
        if previous_mid is not None:
            rich = (4.0 * mid - previous_mid) / 3.0
            if previous_rich is not None and abs(rich - previous_rich) <= tol * max(1.0, abs(rich)):
                return QuadratureResult(rich, lo, hi, n, level)
            previous_rich = rich
        previous_mid = mid
        n *= 2
        n_lambda = min(2 * n_lambda, MAX_LAMBDA_NODES)

    raise QuadratureError(
        f"Midpoint rule on [{t0}, {t1}] did not converge to {tol} after {max_halvings} halvings "
        f"(initial step {step})"
    )


@dataclass(frozen=True)
class TermAverages:
    """Quarter-by-quarter means of one quantity and their factual/counterfactual split."""

    name: str
    kind: str  # "single_a" | "single_b" | "pair" | "correlation"
    quarter_means: tuple[float, float, float, float]
    factual_quarters: tuple[int, ...]
    pointwise_min: float
    pointwise_max: float

    @property
    def counterfactual_quarters(self) -> tuple[int, ...]:
        return tuple(q for q in range(4) if q not in self.factual_quarters)

    @property
    def factual_mean(self) -> float:
        """Average over the interval where the settings were in force (what is measured)."""
        return float(np.mean([self.quarter_means[q] for q in self.factual_quarters]))

    @property
    def counterfactual_mean(self) -> float:
        """Average over the complementary interval, normalized by its own length."""
        return float(np.mean([self.quarter_means[q] for q in self.counterfactual_quarters]))

    @property
    def full_mean(self) -> float:
        """Average over [0, T] with 1/T normalization."""
        return float(np.mean(self.quarter_means))

    @property
    def factual_share(self) -> float:
        """1/T-weighted factual part of the full-interval average."""
        return sum(self.quarter_means[q] for q in self.factual_quarters) / 4.0

    @property
    def counterfactual_share(self) -> float:
        """1/T-weighted counterfactual part of the full-interval average."""
        return sum(self.quarter_means[q] for q in self.counterfactual_quarters) / 4.0

    @property
    def counterfactual_sum(self) -> float:
        """Sum of the per-quarter (1/Delta T) counterfactual means; in [-3, 3] for expectations."""
        return float(sum(self.quarter_means[q] for q in self.counterfactual_quarters))

    @property
    def gap(self) -> float:
        """|factual mean - counterfactual mean|."""
        return abs(self.factual_mean - self.counterfactual_mean)

    @property
    def pointwise_range(self) -> float:
        """Spread of q(t) over [0, T] on the finest quadrature grid."""
        return self.pointwise_max - self.pointwise_min

    def quarter_contributions(self) -> list[dict]:
        """Each quarter's 1/T-weighted contribution, flagged factual or counterfactual."""
        return [
            {
                "term": self.name,
                "quarter": q + 1,
                "contribution": self.quarter_means[q] / 4.0,
                "quarter_mean": self.quarter_means[q],
                "factual": q in self.factual_quarters,
            }
            for q in range(4)
        ]


def _term_label(kind: str, a_index: int | None, b_index: int | None) -> str:
    a = "alpha'" if a_index else "alpha"
    b = "beta'" if b_index else "beta"
    if kind == "single_a":
        return f"P_A({a})"
    if kind == "single_b":
        return f"P_B({b})"
    if kind == "pair":
        return f"P_AB({a},{b})"
    return f"E({a},{b})"


@dataclass(frozen=True)
class ExactTimeAverages:
    """All factual and counterfactual time averages of a model under a schedule."""

    model_name: str
    time_dependent: bool
    schedule: Schedule
    terms: dict[str, TermAverages]
    resolution: float
    tol: float

    def term(self, name: str) -> TermAverages:
        return self.terms[name]

    def pair_term(self, pair: SettingsPair) -> TermAverages:
        return self.terms[_term_label("pair", pair.a_index, pair.b_index)]

    def correlation_term(self, pair: SettingsPair) -> TermAverages:
        return self.terms[_term_label("correlation", pair.a_index, pair.b_index)]

    def _data(self, pick: Callable[[TermAverages], float], source: str) -> CorrelationData:
        return CorrelationData(
            pair_probs={pair: pick(self.pair_term(pair)) for pair in PAIR_ORDER},
            p_a_alpha_prime=pick(self.terms["P_A(alpha')"]),
            p_b_beta=pick(self.terms["P_B(beta)"]),
            expectations={pair: pick(self.correlation_term(pair)) for pair in PAIR_ORDER},
            source=source,
        )

    def factual_data(self) -> CorrelationData:
        """What a time-sequenced experiment measures (per-quarter normalization)."""
        return self._data(lambda term: term.factual_mean, f"{self.model_name}:factual")

    def full_interval_data(self) -> CorrelationData:
        """Averages over the whole run, counterfactual stretches included."""
        return self._data(lambda term: term.full_mean, f"{self.model_name}:full-interval")

    def counterfactual_data(self) -> CorrelationData:
        """Averages over the stretches where the settings were not in force."""
        return self._data(lambda term: term.counterfactual_mean, f"{self.model_name}:counterfactual")

    def counterfactual_expectations(self) -> dict[SettingsPair, float]:
        """E-cf per settings pair: sum of the three counterfactual quarter means."""
        return {pair: self.correlation_term(pair).counterfactual_sum for pair in PAIR_ORDER}

    def as_rows(self) -> list[dict]:
        rows = []
        for term in self.terms.values():
            rows.append(
                {
                    "term": term.name,
                    "factual": term.factual_mean,
                    "counterfactual": term.counterfactual_mean,
                    "full_interval": term.full_mean,
                    "factual_share_1_over_T": term.factual_share,
                    "counterfactual_share_1_over_T": term.counterfactual_share,
                    "gap": term.gap,
                }
            )
        return rows


def _integrand(model: LocalModel, kind: str, theta_a: float, theta_b: float):
    def single_a(lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return model.response_a(theta_a, lam, t)

    def single_b(lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return model.response_b(theta_b, lam, t)

    def pair(lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return model.response_a(theta_a, lam, t) * model.response_b(theta_b, lam, t)

    def correlation(lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        # E[A B | lambda, t] for independent +/-1 outcomes
        return (2.0 * model.response_a(theta_a, lam, t) - 1.0) * (
            2.0 * model.response_b(theta_b, lam, t) - 1.0
        )

    return {"single_a": single_a, "single_b": single_b, "pair": pair, "correlation": correlation}[kind]


def exact_time_averages(
    model: PairSource,
    schedule: Schedule,
    resolution: float,
    *,
    tol: float = 1e-9,
    max_halvings: int = 12,
) -> ExactTimeAverages:
    """Integrate every factual and counterfactual term of ``model`` under ``schedule``.

    Args:
        model: A fully specified LocalModel (counterfactual responses are
            evaluated at settings not scheduled at t).
        schedule: Time layout of the settings.
        resolution: Initial quadrature step in units of the total time.
        tol: Relative agreement required between successive step halvings.
        max_halvings: Refinements allowed before QuadratureError.
    """
    if not isinstance(model, LocalModel):
        raise TypeError(
            f"Model {model.name!r} is not a local model: it has no counterfactual responses to integrate"
        )
    if not resolution > 0:
        raise ValueError(f"Quadrature resolution must be positive, got {resolution}")

    quad = schedule.quad
    a_angles = [a.value for a in quad.a_angles]
    b_angles = [b.value for b in quad.b_angles]

    specs: list[tuple[str, int | None, int | None, tuple[int, ...]]] = []
    for a_index in (0, 1):
        specs.append(("single_a", a_index, None, schedule.quarters_with_a(a_index)))
    for b_index in (0, 1):
        specs.append(("single_b", None, b_index, schedule.quarters_with_b(b_index)))
    for kind in ("pair", "correlation"):
        for pair in PAIR_ORDER:
            specs.append((kind, pair.a_index, pair.b_index, (schedule.quarter_of(pair),)))

    step = resolution * schedule.total_time
    terms: dict[str, TermAverages] = {}
    for kind, a_index, b_index, factual in specs:
        g = _integrand(
            model,
            kind,
            a_angles[a_index or 0],
            b_angles[b_index or 0],
        )

        def fn(t: np.ndarray, n_lambda: int, g=g) -> np.ndarray:
            return model.lambda_average(g, t, n_lambda)

        results = [
            converged_mean(
                fn,
                *schedule.quarter_bounds(q),
                step=step,
                tol=tol,
                max_halvings=max_halvings,
            )
            for q in range(4)
        ]
        name = _term_label(kind, a_index, b_index)
        terms[name] = TermAverages(
            name=name,
            kind=kind,
            quarter_means=tuple(r.value for r in results),
            factual_quarters=factual,
            pointwise_min=min(r.minimum for r in results),
            pointwise_max=max(r.maximum for r in results),
        )
        logger.debug(
            "%s: quarters=%s (halvings %s)",
            name,
            terms[name].quarter_means,
            [r.halvings for r in results],
        )

    return ExactTimeAverages(
        model_name=model.name,
        time_dependent=model.time_dependent,
        schedule=schedule,
        terms=terms,
        resolution=resolution,
        tol=tol,
    )
