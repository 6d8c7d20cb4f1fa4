"""Experiment configuration: flat key=value files, flag overrides.

The format is one `key = value` pair per line with `#` comments, chosen to
be trivially parseable and diff-friendly for experiment provenance.  A
config written by `to_file` parses back to an identical object.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .grid import format_float

__all__ = ["ExperimentConfig", "parse_key_values"]

# dataclass field name <-> file/flag key, where they differ
_FIELD_TO_KEY = {"class_kind": "class", "lattice_nodes": "lattice-nodes",
                 "constants_only": "constants-only"}
_KEY_TO_FIELD = {v: k for k, v in _FIELD_TO_KEY.items()}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = ""
    out: str | None = None
    seed: int = 0
    grid: int | None = None
    input: str | None = None
    truth: str = "quadratic"
    delta: float | None = None
    deltas: tuple = ()
    a: float = 2.0
    m: float = 1.0
    c: float = 1.0
    phi: str = "sup-norm"
    noise: str = "uniform-iid"
    class_kind: str = "sup"
    count: int = 100
    budget: int = 2000
    mode: str = "bruteforce"
    levels: int = 21
    lattice_nodes: int = 3
    constants_only: bool = False

    def to_file(self, path: str | Path) -> None:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            key = _FIELD_TO_KEY.get(f.name, f.name)
            lines.append(f"{key} = {_serialize(value)}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls().updated(parse_key_values(path))

    def updated(self, overrides: dict) -> "ExperimentConfig":
        """New config with string/typed overrides applied on top of self."""
        known = {f.name: f for f in fields(self)}
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        for key, raw in overrides.items():
            name = _KEY_TO_FIELD.get(key, key.replace("-", "_"))
            if name not in known:
                raise ConfigError(f"unknown config key {key!r}")
            values[name] = _coerce(name, raw) if isinstance(raw, str) else raw
        return ExperimentConfig(**values)


def _serialize(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, tuple):
        return ",".join(format_float(v) for v in value)
    return str(value)


_INT_FIELDS = {"seed", "grid", "count", "budget", "levels", "lattice_nodes"}
_FLOAT_FIELDS = {"delta", "a", "m", "c"}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    try:
        if name == "deltas":
            return tuple(float(tok) for tok in raw.split(",") if tok.strip()) if raw else ()
        if name == "constants_only":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if name in _INT_FIELDS:
            return int(raw)
        if name in _FLOAT_FIELDS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name!r}: {raw!r}") from exc
    return raw


def parse_key_values(path: str | Path) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    out: dict[str, str] = {}
    for idx, line in enumerate(p.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{idx}: expected 'key = value', got {line!r}")
        out[key.strip()] = value.strip()
    return out
