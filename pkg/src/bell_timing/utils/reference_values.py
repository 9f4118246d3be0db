"""Published reference figures, annotations and check tolerances from YAML config."""

from pathlib import Path
from typing import Any, Dict

import yaml

_CONFIG_PATH = Path(__file__).parent.parent / "config" / "reference_values.yaml"


def _load_reference_values() -> Dict[str, Any]:
    """Load reference values from YAML config file."""
    with open(_CONFIG_PATH, "r") as f:
        return yaml.safe_load(f) or {}


REFERENCE_VALUES: Dict[str, Any] = _load_reference_values()


def get_published(key: str) -> Any:
    """Return a published figure by key (KeyError if unknown)."""
    return REFERENCE_VALUES["published"][key]


def get_annotation(key: str) -> str:
    """Return the annotation text for a known discrepancy."""
    return " ".join(str(REFERENCE_VALUES["annotations"][key]).split())


def get_tolerance(key: str) -> float:
    """Return a check tolerance by key."""
    return float(REFERENCE_VALUES["tolerances"][key])


def reload_reference_values() -> None:
    """Reload reference values from YAML file."""
    global REFERENCE_VALUES
    REFERENCE_VALUES = _load_reference_values()
