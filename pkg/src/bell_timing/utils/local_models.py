"""Pair sources: pluggable local hidden-variable models and the quantum reference source.

A local model factorizes: station A's detection probability depends only on
(A angle, lambda, t), station B's only on (B angle, lambda, t), and lambda is
drawn without ever seeing a setting. Time may be (part of) the hidden variable.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from pathlib import Path
from typing import Any, Dict

import numpy as np
import yaml

from bell_timing.errors import ConfigError, ModelContractError

logger = logging.getLogger(__name__)

ArrayLike = float | np.ndarray


def _load_model_configs() -> Dict[str, Dict[str, Any]]:
    """Load sample model descriptions and default parameters from YAML."""
    config_path = Path(__file__).parent.parent / "config" / "sample_models.yaml"
    with open(config_path, "r") as f:
        return yaml.safe_load(f) or {}


MODEL_CONFIGS: Dict[str, Dict[str, Any]] = _load_model_configs()


class PairSource(ABC):
    """Anything that can emit outcome pairs at scheduled settings."""

    name: str = ""
    local: bool = True
    time_dependent: bool = False

    @abstractmethod
    def draw(
        self,
        rng: np.random.Generator,
        t: np.ndarray,
        a_angles: np.ndarray,
        b_angles: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (lambda, a_outcome, b_outcome) arrays for emission times ``t``."""


class LocalModel(PairSource):
    """Local-realistic response model.

    Subclasses give the lambda sampler, its density and one response function
    per station. ``lambda_support`` is the interval lambda lives on, or ``None``
    when lambda is a deterministic function of t (see ``lambda_of_time``).
    """

    local = True
    lambda_support: tuple[float, float] | None = None

    @abstractmethod
    def sample_lambda(self, rng: np.random.Generator, t: np.ndarray) -> np.ndarray:
        """Draw one lambda per emission time. Never receives a setting."""

    @abstractmethod
    def density(self, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Weight rho(lambda, t) of the conditional lambda distribution."""

    @abstractmethod
    def response_a(self, angle: ArrayLike, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        """P_A(angle, lambda, t): detection probability at station A."""

    @abstractmethod
    def response_b(self, angle: ArrayLike, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        """P_B(angle, lambda, t): detection probability at station B."""

    def lambda_of_time(self, t: np.ndarray) -> np.ndarray:
        """Lambda as a function of t, for models without a lambda support."""
        raise NotImplementedError(f"Model {self.name!r} has a lambda support; integrate over it")

    def lambda_average(
        self,
        integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
        t: np.ndarray,
        n_lambda: int,
    ) -> np.ndarray:
        """Return the integral of rho(lambda, t) * integrand(lambda, t) d lambda at each t.

        Uses the composite midpoint rule with ``n_lambda`` nodes over the support.
        """
        t = np.asarray(t, dtype=float)
        if self.lambda_support is None:
            return integrand(self.lambda_of_time(t), t)
        lo, hi = self.lambda_support
        width = (hi - lo) / n_lambda
        nodes = lo + width * (np.arange(n_lambda) + 0.5)
        lam = np.broadcast_to(nodes, (t.size, n_lambda))
        tt = np.broadcast_to(t.reshape(-1, 1), (t.size, n_lambda))
        weights = self.density(lam, tt) * width
        return np.sum(weights * integrand(lam, tt), axis=1)

    def draw(
        self,
        rng: np.random.Generator,
        t: np.ndarray,
        a_angles: np.ndarray,
        b_angles: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        lam = self.sample_lambda(rng, t)
        p_a = np.asarray(self.response_a(a_angles, lam, t), dtype=float)
        p_b = np.asarray(self.response_b(b_angles, lam, t), dtype=float)
        check_response(p_a, self.name, "A")
        check_response(p_b, self.name, "B")
        # Independent uniforms per station: the joint law is the product of marginals
        u = rng.random((2, t.size))
        a_out = np.where(u[0] < p_a, 1, -1).astype(np.int8)
        b_out = np.where(u[1] < p_b, 1, -1).astype(np.int8)
        return lam, a_out, b_out


def check_response(p: np.ndarray, model_name: str, station: str) -> None:
    """Raise ModelContractError if any detection probability leaves [0, 1]."""
    if p.size and (np.any(p < 0.0) or np.any(p > 1.0) or np.any(np.isnan(p))):
        bad = p[(p < 0.0) | (p > 1.0) | np.isnan(p)][0]
        raise ModelContractError(
            f"Model {model_name!r} returned response {bad} at station {station}, outside [0, 1]"
        )


class MalusModel(LocalModel):
    """Shared polarization lambda ~ U[0, pi); response 1/2 (1 + v cos 2(angle - lambda))."""

    name = "malus"
    time_dependent = False
    lambda_support = (0.0, math.pi)

    def __init__(self, visibility: float = 1.0):
        if not 0.0 <= visibility <= 1.0:
            raise ConfigError(f"malus: visibility must lie in [0, 1], got {visibility}")
        self.visibility = float(visibility)

    def sample_lambda(self, rng: np.random.Generator, t: np.ndarray) -> np.ndarray:
        return rng.uniform(0.0, math.pi, size=np.shape(t))

    def density(self, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return np.full(np.shape(lam), 1.0 / math.pi)

    def _response(self, angle: ArrayLike, lam: np.ndarray) -> np.ndarray:
        return 0.5 * (1.0 + self.visibility * np.cos(2.0 * (np.asarray(angle) - lam)))

    def response_a(self, angle: ArrayLike, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return self._response(angle, lam)

    def response_b(self, angle: ArrayLike, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return self._response(angle, lam)


class ClockModel(LocalModel):
    """Time is the hidden variable: polarization pi * t / period, rotating by pi each period.

    With ``period = T / 2`` the clock is phase-locked to the schedule.
    """

    name = "clock"
    time_dependent = True
    lambda_support = None

    def __init__(self, period: float = 0.5, visibility: float = 1.0):
        if not period > 0:
            raise ConfigError(f"clock: period must be positive, got {period}")
        if not 0.0 <= visibility <= 1.0:
            raise ConfigError(f"clock: visibility must lie in [0, 1], got {visibility}")
        self.period = float(period)
        self.visibility = float(visibility)

    def sample_lambda(self, rng: np.random.Generator, t: np.ndarray) -> np.ndarray:
        return np.array(t, dtype=float, copy=True)

    def density(self, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        # Point mass at lambda = t
        return np.ones(np.shape(lam))

    def lambda_of_time(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(t, dtype=float)

    def phase(self, lam: np.ndarray) -> np.ndarray:
        return math.pi * np.asarray(lam) / self.period

    def _response(self, angle: ArrayLike, lam: np.ndarray) -> np.ndarray:
        return 0.5 * (1.0 + self.visibility * np.cos(2.0 * (np.asarray(angle) - self.phase(lam))))

    def response_a(self, angle: ArrayLike, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return self._response(angle, lam)

    def response_b(self, angle: ArrayLike, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return self._response(angle, lam)

    def rescaled(self, factor: float) -> ClockModel:
        """Same model on a time axis stretched by ``factor``."""
        return ClockModel(period=self.period * factor, visibility=self.visibility)


class ConstantModel(LocalModel):
    """Every response equals ``p`` regardless of angle, lambda and time."""

    name = "constant"
    time_dependent = False
    lambda_support = None

    def __init__(self, p: float = 0.5):
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"constant: p must lie in [0, 1], got {p}")
        self.p = float(p)

    def sample_lambda(self, rng: np.random.Generator, t: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(t))

    def density(self, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return np.ones(np.shape(lam))

    def lambda_of_time(self, t: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(t))

    def response_a(self, angle: ArrayLike, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return np.full(np.broadcast(np.asarray(angle), lam).shape, self.p)

    def response_b(self, angle: ArrayLike, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        return np.full(np.broadcast(np.asarray(angle), lam).shape, self.p)


class QuantumPairSource(PairSource):
    """Joint outcomes from the phi+ outcome table at the scheduled settings.

    Not a local model: B's outcome is drawn conditionally on A's, and there are
    no counterfactual responses to evaluate.
    """

    name = "qm"
    local = False
    time_dependent = False

    def draw(
        self,
        rng: np.random.Generator,
        t: np.ndarray,
        a_angles: np.ndarray,
        b_angles: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        p_same = np.cos(np.asarray(a_angles) - np.asarray(b_angles)) ** 2
        u = rng.random((2, t.size))
        a_out = np.where(u[0] < 0.5, 1, -1).astype(np.int8)
        b_out = np.where(u[1] < p_same, a_out, -a_out).astype(np.int8)
        return np.full(t.size, np.nan), a_out, b_out


_MODEL_CLASSES: Dict[str, type[PairSource]] = {
    "malus": MalusModel,
    "clock": ClockModel,
    "constant": ConstantModel,
    "qm": QuantumPairSource,
}


def available_models() -> list[str]:
    """Names of all configured sample models."""
    return [name for name in MODEL_CONFIGS if name in _MODEL_CLASSES]


def get_model_description(name: str) -> str:
    """Return the configured one-line description of a model."""
    return str(MODEL_CONFIGS.get(name, {}).get("description", ""))


def create_model(
    name: str,
    params: Dict[str, Any] | None = None,
    *,
    total_time: float = 1.0,
) -> PairSource:
    """Instantiate a sample model by name, merging ``params`` over configured defaults.

    Parameters listed under the model's ``time_params`` are given in units of
    the run's ``total_time`` and are scaled to absolute time here.
    """
    if name not in _MODEL_CLASSES or name not in MODEL_CONFIGS:
        raise ConfigError(
            f"Unknown model {name!r}; available: {', '.join(available_models())}"
        )
    defaults = dict(MODEL_CONFIGS[name].get("params") or {})
    params = params or {}
    unknown = sorted(set(params) - set(defaults))
    if unknown:
        raise ConfigError(f"Unknown parameter(s) for model {name!r}: {', '.join(unknown)}")
    merged = {**defaults, **params}
    try:
        merged = {k: float(v) for k, v in merged.items()}
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Model {name!r} parameters must be numbers: {e}") from e
    if not total_time > 0:
        raise ConfigError(f"total_time must be positive, got {total_time}")
    for key in MODEL_CONFIGS[name].get("time_params") or []:
        merged[key] *= total_time
    logger.debug("Creating model %s with %s", name, merged)
    return _MODEL_CLASSES[name](**merged)


def reload_model_configs() -> None:
    """Reload sample model configurations from YAML file."""
    global MODEL_CONFIGS
    MODEL_CONFIGS = _load_model_configs()
