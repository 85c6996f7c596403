"""JSON schemas for every CLI output payload.

The CLI validates each payload against its schema before writing, so a
schema violation is a bug, not a user error.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files(__package__).joinpath(f"{name}.schema.json").read_text(
        encoding="utf-8"
    )
    return json.loads(text)


def validate_payload(name: str, payload: dict) -> dict:
    """Raise jsonschema.ValidationError if payload does not conform."""
    jsonschema.validate(payload, load_schema(name))
    return payload
