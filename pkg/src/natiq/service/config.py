"""Service configuration.

Sources, later wins: built-in defaults, a key=value config file,
NATIQ_* environment variables. The file format is deliberately dumb:
one `key = value` per line, # comments, no sections, no quoting.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

ENV_PREFIX = "NATIQ_"


class ConfigError(ValueError):
    pass


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    voices: str = "amina,hamza"
    output_rate: int = 22050
    max_text_chars: int = 2000
    workers: int = 2
    store_dir: str = ""
    diacritizer_policy: str = "passthrough"
    diacritizer_endpoint: str = ""
    synth_endpoint: str = ""
    synth_timeout_s: float = 30.0
    static_dir: str = ""

    def voice_names(self) -> tuple[str, ...]:
        names = tuple(v.strip() for v in self.voices.split(",") if v.strip())
        if not names:
            raise ConfigError("voices must name at least one voice")
        return names

    def validate(self) -> "ServiceConfig":
        if not 0 < self.port < 65536:
            raise ConfigError(f"port out of range: {self.port}")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        if self.max_text_chars < 1:
            raise ConfigError("max_text_chars must be positive")
        if self.diacritizer_policy not in ("passthrough", "fail"):
            raise ConfigError(
                f"diacritizer_policy must be passthrough or fail, got {self.diacritizer_policy!r}"
            )
        if self.synth_timeout_s <= 0:
            raise ConfigError("synth_timeout_s must be positive")
        self.voice_names()
        return self


_FIELDS = {f.name: f.type for f in dataclasses.fields(ServiceConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELDS[name]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name} expects a number, got {raw!r}") from None
    return raw


def parse_config_file(path: str | Path) -> dict:
    """Read key=value pairs; unknown keys are an error, not a warning."""
    out: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path} line {lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ConfigError(f"{path} line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
) -> ServiceConfig:
    values: dict = {}
    if path is not None:
        values.update(parse_config_file(path))
    environ = os.environ if env is None else env
    for name in _FIELDS:
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(name, raw)
    return ServiceConfig(**values).validate()
