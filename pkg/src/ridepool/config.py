"""``key = value`` scenario configuration files."""

from __future__ import annotations

import dataclasses
from typing import Dict, Mapping

from .core import ScenarioConfig, ValidationError

_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


def _convert(key: str, text: str):
    kind = _TYPES[key]
    try:
        if kind in ("int", int):
            return int(text)
        if kind in ("float", float):
            return float(text)
    except ValueError:
        raise ValidationError(f"invalid config key '{key}': cannot parse {text!r} as {kind}") from None
    return text


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, object]:
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ValidationError(f"{source}:{lineno}: unknown config key '{key}'")
        values[key] = _convert(key, value)
    return values


def make_config(values: Mapping[str, object] = None, **overrides) -> ScenarioConfig:
    merged = dict(values or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    for k, v in list(merged.items()):
        if k not in _TYPES:
            raise ValidationError(f"unknown config key '{k}'")
        if isinstance(v, str):
            merged[k] = _convert(k, v)
    cfg = ScenarioConfig(**merged)
    cfg.validate()
    return cfg


def load_config(path, **overrides) -> ScenarioConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    return make_config(parse_config_text(text, str(path)), **overrides)


def dump_config(cfg: ScenarioConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
