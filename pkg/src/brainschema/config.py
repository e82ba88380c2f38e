"""Flat ``key = value`` configuration files.

Keys are the field names of the schema configs and of ``BenchPlan``, plus
``schema = cortex|cerebellum``. Lists are comma separated. ``#`` starts a
comment line. Example::

    schema = cortex
    total_neurons = 160
    total_columns = 8
    neurons_per_microcolumn = 10
    regions_per_hemisphere = 2
    hemisphere_names = left, right
"""

from __future__ import annotations

from dataclasses import fields
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Optional

from .schema import CerebellumConfig, CortexConfig, SchemaConfig

_NAME_LISTS = {"hemisphere_names", "layer_names", "region_names"}
_INT_LISTS = {"entry_counts", "worker_counts"}
_ALIASES = {"entries": "entry_counts", "workers": "worker_counts", "neurons": "total_neurons",
            "columns": "total_columns"}
BENCH_KEYS = {"entry_counts", "worker_counts", "trials", "backend", "seed", "batch_size"}


class ConfigFileError(ValueError):
    pass


def parse_count(text: str) -> int:
    """Integer from ``21000000000``, ``21_000_000_000``, ``21,000,000,000`` or ``21e9``."""
    t = text.strip().replace(",", "").replace("_", "")
    try:
        return int(t)
    except ValueError:
        pass
    try:
        d = Decimal(t)
    except InvalidOperation:
        raise ValueError(f"not an integer: {text!r}") from None
    if d != d.to_integral_value():
        raise ValueError(f"not an integer: {text!r}")
    return int(d)


def _convert(key: str, value: str) -> Any:
    if key in _NAME_LISTS:
        return tuple(p.strip() for p in value.split(",") if p.strip())
    if key in _INT_LISTS:
        return tuple(parse_count(p) for p in value.split(",") if p.strip())
    if key in ("schema", "backend"):
        return value.strip()
    return parse_count(value)


def read_config_file(path) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigFileError(f"{path}:{lineno}: expected 'key = value'")
        key = _ALIASES.get(key.strip(), key.strip())
        try:
            out[key] = _convert(key, value.strip())
        except ValueError as e:
            raise ConfigFileError(f"{path}:{lineno}: {key}: {e}") from None
    return out


def build_schema(values: dict[str, Any], schema: Optional[str] = None) -> SchemaConfig:
    kind = schema or values.get("schema", "cortex")
    cls = {"cortex": CortexConfig, "cerebellum": CerebellumConfig}.get(kind)
    if cls is None:
        raise ConfigFileError(f"unknown schema {kind!r}")
    allowed = {f.name for f in fields(cls)}
    unknown = set(values) - allowed - BENCH_KEYS - {"schema"}
    if unknown:
        raise ConfigFileError(f"unknown {kind} keys: {', '.join(sorted(unknown))}")
    return cls(**{k: v for k, v in values.items() if k in allowed})
