"""Versioned JSON envelope used by every serialized artifact.

All on-disk artifacts (likelihood tables, bias profiles, curves,
schedules, models, policies, configs, metric reports) carry a
``schema_version`` field and a ``kind`` tag so files are
self-describing and future migrations have something to dispatch on.
"""

import json

from .errors import ConfigError

SCHEMA_VERSION = 1


def envelope(kind: str, payload: dict) -> dict:
    """Wrap a payload dict in the versioned envelope."""
    out = {"schema_version": SCHEMA_VERSION, "kind": kind}
    out.update(payload)
    return out


def check_envelope(data: dict, kind: str) -> dict:
    """Validate version and kind of a loaded artifact, return it."""
    if not isinstance(data, dict):
        raise ConfigError(f"expected a JSON object for {kind!r}")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {version!r} for {kind!r} "
            f"(this build reads version {SCHEMA_VERSION})"
        )
    found = data.get("kind")
    if found != kind:
        raise ConfigError(f"expected kind {kind!r}, found {found!r}")
    return data


def dump_json(data, path) -> None:
    """Deterministic JSON writer: sorted keys, stable float repr."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def dumps_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"input file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
