"""Render command results as aligned tables, JSON or CSV.

Results are a mapping of section name -> list of flat row dicts. JSON output
has the top-level shape {command, config_echo, results, annotations} with every
real written with 17 significant digits, so parsing it back recovers each
number exactly.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from enum import Enum
from typing import Any

import polars as pl

Results = Mapping[str, Sequence[Mapping[str, Any]] | Mapping[str, Any]]


def format_real(value: float) -> str:
    if math.isnan(value):
        return '"nan"'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    text = format(value, ".17g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def to_json(value: Any, indent: int = 2, _level: int = 0) -> str:
    """Serialize nested dicts/lists/scalars; floats with 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    close = " " * (indent * _level)
    if isinstance(value, Enum):
        value = value.value
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_real(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}{to_json(v, indent, _level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    if hasattr(value, "item"):  # numpy scalar
        return to_json(value.item(), indent, _level)
    raise TypeError(f"Cannot serialize {type(value).__name__} to JSON")


def _rows(section: Sequence[Mapping[str, Any]] | Mapping[str, Any]) -> list[dict]:
    if isinstance(section, Mapping):
        return [dict(section)]
    return [dict(row) for row in section]


def _flat(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple, dict)):
        return str(value)
    return value


def section_frame(rows: Sequence[Mapping[str, Any]]) -> pl.DataFrame:
    """Build a DataFrame from row dicts, stringifying nested values."""
    flat = [{k: _flat(v) for k, v in row.items()} for row in rows]
    return pl.DataFrame(flat, infer_schema_length=None, strict=False)


def render_json(command: str, config_echo: Mapping[str, Any], results: Results, annotations: Sequence[str]) -> str:
    document = {
        "command": command,
        "config_echo": dict(config_echo),
        "results": {name: _rows(section) for name, section in results.items()},
        "annotations": list(annotations),
    }
    return to_json(document) + "\n"


def render_table(command: str, results: Results, annotations: Sequence[str]) -> str:
    parts = [f"== {command} =="]
    with pl.Config(
        tbl_rows=-1,
        tbl_cols=-1,
        float_precision=6,
        fmt_str_lengths=80,
        tbl_hide_dataframe_shape=True,
        tbl_hide_column_data_types=True,
    ):
        for name, section in results.items():
            rows = _rows(section)
            parts.append(f"\n[{name}]")
            parts.append(str(section_frame(rows)) if rows else "(empty)")
    if annotations:
        parts.append("\nNotes:")
        parts.extend(f"  - {note}" for note in annotations)
    return "\n".join(parts) + "\n"


def render_csv(results: Results) -> str:
    parts = []
    for name, section in results.items():
        rows = _rows(section)
        parts.append(f"# {name}\n")
        if rows:
            parts.append(section_frame(rows).write_csv())
    return "".join(parts)


def render(
    fmt: str,
    command: str,
    config_echo: Mapping[str, Any],
    results: Results,
    annotations: Sequence[str] = (),
) -> str:
    """Render ``results`` in ``fmt`` (table, json or csv)."""
    if fmt == "json":
        return render_json(command, config_echo, results, annotations)
    if fmt == "csv":
        return render_csv(results)
    if fmt == "table":
        return render_table(command, results, annotations)
    raise ValueError(f"Unknown output format {fmt!r}; expected table, json or csv")
