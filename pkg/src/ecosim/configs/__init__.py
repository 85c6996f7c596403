"""Shipped generator configurations.

paper_scale: the full-size ecosystem (26 platforms, 1,592 hate
communities, ~50M core members, ~4.4M link events over 3.5 years).
ci_scale: the same shape at 1/100, for fast test runs.
"""

from __future__ import annotations

import json
from importlib import resources

from ..errors import ConfigError
from ..generator import GeneratorConfig

BUILTIN = ("paper_scale", "ci_scale")


def builtin_config_dict(name: str) -> dict:
    if name not in BUILTIN:
        raise ConfigError(f"unknown builtin config {name!r}; available: {BUILTIN}")
    text = resources.files(__package__).joinpath(f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_builtin(name: str) -> GeneratorConfig:
    return GeneratorConfig.from_dict(builtin_config_dict(name))
