"""Scenario configuration: YAML/JSON loading, flag overrides and validation."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import yaml

from bell_timing.errors import ConfigError
from bell_timing.models import Schedule, SettingsQuad, build_schedule
from bell_timing.utils.local_models import PairSource, available_models, create_model

logger = logging.getLogger(__name__)

_DEFAULTS_PATH = Path(__file__).parent / "config" / "scenario_defaults.yaml"

FORMATS = ("table", "json", "csv")
WORLDS = ("A", "B", "C", "D")


def _load_defaults() -> dict[str, Any]:
    """Load default scenario values from YAML config file."""
    with open(_DEFAULTS_PATH, "r") as f:
        return yaml.safe_load(f) or {}


SCENARIO_DEFAULTS: dict[str, Any] = _load_defaults()


# ---------------------------------------------------------------------------
# Dataclass
# ---------------------------------------------------------------------------


@dataclass
class ScenarioConfig:
    """One run's worth of settings, after defaults, file and flags are merged."""

    quad: list[float]
    total_time: float
    model: str
    model_params: dict[str, float] = field(default_factory=dict)
    n_pairs: int = 1_000_000
    seed: int = 42
    workers: int = 1
    chunk_size: int = 65536
    fixed_per_quarter: bool = False
    world: Optional[str] = None
    format: str = "table"
    resolution: float = 1e-3
    quad_tol: float = 1e-9
    max_halvings: int = 12
    tol: float = 1e-6
    singles_tol: float = 1e-9
    sigma_factor: float = 5.0
    as_printed: bool = False
    oracle_samples: int = 1_000_000
    sweep_points: int = 33
    source: Optional[str] = None  # config file the values came from, if any

    @property
    def settings_quad(self) -> SettingsQuad:
        try:
            return SettingsQuad.from_radians(*self.quad)
        except ValueError as e:
            raise ConfigError(f"{self._where()}field 'quad': {e}") from e

    @property
    def schedule(self) -> Schedule:
        return build_schedule(self.total_time, self.settings_quad)

    def create_model(self) -> PairSource:
        return create_model(self.model, self.model_params, total_time=self.total_time)

    def to_dict(self) -> dict[str, Any]:
        """Echo of the effective configuration (without the source path)."""
        data = asdict(self)
        data.pop("source")
        return data

    def _where(self) -> str:
        return f"{self.source}: " if self.source else ""


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check(condition: bool, key: str, message: str, source: Optional[str]) -> None:
    if not condition:
        where = f"{source}: " if source else ""
        raise ConfigError(f"{where}field {key!r} {message}")


def validate(raw: dict[str, Any], source: Optional[str] = None) -> ScenarioConfig:
    """Turn a merged mapping into a ScenarioConfig, rejecting unknown keys and bad values."""
    known = {f.name for f in fields(ScenarioConfig)} - {"source"}
    unknown = sorted(set(raw) - known)
    if unknown:
        where = f"{source}: " if source else ""
        raise ConfigError(f"{where}unknown key(s): {', '.join(unknown)}")
    missing = sorted(known - set(raw))
    if missing:
        raise ConfigError(f"Missing configuration key(s): {', '.join(missing)}")

    quad = raw["quad"]
    _check(
        isinstance(quad, (list, tuple)) and len(quad) == 4 and all(_is_number(a) and math.isfinite(a) for a in quad),
        "quad",
        f"must be four finite radians (alpha, alpha', beta, beta'), got {quad!r}",
        source,
    )
    _check(_is_number(raw["total_time"]) and raw["total_time"] > 0 and math.isfinite(raw["total_time"]),
           "total_time", f"must be a positive number, got {raw['total_time']!r}", source)
    _check(raw["model"] in available_models(), "model",
           f"must be one of {', '.join(available_models())}, got {raw['model']!r}", source)
    params = raw["model_params"] if raw["model_params"] is not None else {}
    _check(isinstance(params, dict), "model_params", f"must be a mapping, got {params!r}", source)

    for key, minimum in (("n_pairs", 1), ("seed", 0), ("workers", 1), ("chunk_size", 1),
                         ("max_halvings", 1), ("oracle_samples", 1), ("sweep_points", 2)):
        _check(_is_int(raw[key]) and raw[key] >= minimum, key,
               f"must be an integer >= {minimum}, got {raw[key]!r}", source)
    for key in ("fixed_per_quarter", "as_printed"):
        _check(isinstance(raw[key], bool), key, f"must be true or false, got {raw[key]!r}", source)
    for key in ("quad_tol", "tol", "sigma_factor"):
        _check(_is_number(raw[key]) and raw[key] > 0, key, f"must be a positive number, got {raw[key]!r}", source)
    _check(_is_number(raw["singles_tol"]) and raw["singles_tol"] >= 0, "singles_tol",
           f"must be a nonnegative number, got {raw['singles_tol']!r}", source)
    _check(_is_number(raw["resolution"]) and 0 < raw["resolution"] <= 0.25, "resolution",
           f"must lie in (0, 0.25] (units of total_time), got {raw['resolution']!r}", source)

    world = raw["world"]
    if world is not None:
        world = str(world).upper()
    _check(world is None or world in WORLDS, "world", f"must be one of {', '.join(WORLDS)} or null, got {raw['world']!r}", source)
    _check(raw["format"] in FORMATS, "format", f"must be one of {', '.join(FORMATS)}, got {raw['format']!r}", source)

    config = ScenarioConfig(
        quad=[float(a) for a in quad],
        total_time=float(raw["total_time"]),
        model=raw["model"],
        model_params=dict(params),
        n_pairs=raw["n_pairs"],
        seed=raw["seed"],
        workers=raw["workers"],
        chunk_size=raw["chunk_size"],
        fixed_per_quarter=raw["fixed_per_quarter"],
        world=world,
        format=raw["format"],
        resolution=float(raw["resolution"]),
        quad_tol=float(raw["quad_tol"]),
        max_halvings=raw["max_halvings"],
        tol=float(raw["tol"]),
        singles_tol=float(raw["singles_tol"]),
        sigma_factor=float(raw["sigma_factor"]),
        as_printed=raw["as_printed"],
        oracle_samples=raw["oracle_samples"],
        sweep_points=raw["sweep_points"],
        source=source,
    )
    # Surface angle and model-parameter errors at load time
    config.settings_quad
    try:
        config.create_model()
    except ConfigError as e:
        raise ConfigError(f"{config._where()}{e}") from e
    return config


# ---------------------------------------------------------------------------
# Load
# ---------------------------------------------------------------------------


def load_config_file(config_path: Path) -> dict[str, Any]:
    """Read a JSON or YAML scenario document into a mapping."""
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")
    try:
        with open(config_path, "r") as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = f" line {mark.line + 1}, column {mark.column + 1}:" if mark is not None else ""
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"{config_path}:{line} {problem}") from e
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{config_path}: top level must be a mapping, got {type(raw).__name__}")
    return raw


def build_config(
    config_path: Optional[Path] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> ScenarioConfig:
    """Merge defaults, then the config file, then non-None ``overrides`` (CLI flags)."""
    merged = dict(SCENARIO_DEFAULTS)
    source = None
    if config_path is not None:
        file_values = load_config_file(config_path)
        unknown = sorted(set(file_values) - set(merged))
        if unknown:
            raise ConfigError(f"{config_path}: unknown key(s): {', '.join(unknown)}")
        merged.update(file_values)
        source = str(config_path)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    logger.debug("Scenario config from %s: %s", source or "defaults", merged)
    return validate(merged, source)


def reload_defaults() -> None:
    """Reload scenario defaults from YAML file."""
    global SCENARIO_DEFAULTS
    SCENARIO_DEFAULTS = _load_defaults()
