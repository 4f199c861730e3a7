"""Server configuration: file, environment overrides, and defaults."""

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

ENV_PREFIX = "PEERTUTOR_"

DEFAULT_LANGUAGES = ("en", "es", "ru", "de")


@dataclass(frozen=True)
class Config:
    handshake_timeout_s: int = 60
    missed_ttl_s: int = 600
    signup_grant_s: int = 1800
    invite_bonus_s: int = 1800
    expert_threshold: int = 5
    controller_enabled: bool = False
    snapshot_every: int = 10000
    languages: tuple = field(default=DEFAULT_LANGUAGES)

    @staticmethod
    def load(path=None, env=None) -> "Config":
        """Build a Config from an optional JSON file plus env overrides.

        Env vars use the ``PEERTUTOR_`` prefix and upper-cased key names,
        e.g. ``PEERTUTOR_SIGNUP_GRANT_S=900``. Env wins over file.
        """
        values = {}
        if path is not None:
            raw = json.loads(Path(path).read_text())
            if not isinstance(raw, dict):
                raise ValueError("config file must contain an object")
            values.update(raw)
        env = os.environ if env is None else env
        for f in fields(Config):
            key = ENV_PREFIX + f.name.upper()
            if key in env:
                values[f.name] = _parse_env(f.name, env[key])
        known = {f.name for f in fields(Config)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "languages" in values:
            values["languages"] = tuple(values["languages"])
        return Config(**values)


def _parse_env(name: str, raw: str):
    if name == "languages":
        return tuple(x.strip() for x in raw.split(",") if x.strip())
    if name == "controller_enabled":
        return raw.lower() in ("1", "true", "yes", "on")
    return int(raw)
