"""Run configuration: packaged TOML defaults, an optional user file, then flags."""

from __future__ import annotations

import copy
import sys
from importlib import resources
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .corpus import PeriodSpec
from .termverify import Role


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def default_config() -> dict[str, Any]:
    text = resources.files("assocverify").joinpath("default_config.toml").read_text("utf-8")
    return tomllib.loads(text)


def load_config(path: str | Path | None = None) -> dict[str, Any]:
    cfg = default_config()
    if path is not None:
        with open(path, "rb") as fh:
            cfg = _merge(cfg, tomllib.load(fh))
    return cfg


def period_spec(cfg: dict) -> PeriodSpec:
    return PeriodSpec.from_ranges(tuple(r) for r in cfg["periods"]["ranges"])


def parse_periods(text: str) -> PeriodSpec:
    """``"2009-2014,2015-2019"`` -> PeriodSpec."""
    ranges = []
    for chunk in text.split(","):
        a, _, b = chunk.strip().partition("-")
        ranges.append((int(a), int(b)))
    return PeriodSpec.from_ranges(ranges)


def role_prefixes(cfg: dict) -> dict[Role, str]:
    p = cfg["prefixes"]
    return {
        Role.DISEASE: p["disease"],
        Role.DRUG: p["drug"],
        Role.SYMPTOM: p["symptom"],
        Role.PROCESS: p["process"],
    }
