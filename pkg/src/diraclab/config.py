"""Flat line-oriented run configuration: 'section.key = value' per line.

No nesting; '#' starts a comment.  Numbers may carry a 'pi' suffix (16pi).
Unknown or malformed lines raise ConfigError with the line number; missing
required keys raise ConfigError naming the key (the CLI maps these to exit
code 2).
"""

from __future__ import annotations

import math


class ConfigError(Exception):
    pass


def parse_config_text(text, source="<config>"):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or "." not in key:
            raise ConfigError(f"{source}:{lineno}: keys are 'section.key', got {key!r}")
        values[key] = value
    return values


def parse_config_file(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}")
    return parse_config_text(text, source=str(path))


def _float(text, key):
    text = text.strip()
    factor = 1.0
    if text.endswith("pi"):
        factor = math.pi
        text = text[:-2].strip()
    try:
        return float(text) * factor
    except ValueError:
        raise ConfigError(f"key {key}: expected a number (optionally with 'pi' suffix), got {text!r}")


class RunConfig:
    """Typed access to the flat key-value map, with defaults and provenance."""

    def __init__(self, values, defaults=None, from_file=False):
        self.values = dict(defaults or {})
        self.values.update(values)
        self.from_file = from_file

    def has(self, key):
        return key in self.values

    def raw(self, key):
        if key not in self.values:
            raise ConfigError(f"missing required config key {key!r}")
        return self.values[key]

    def get_str(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise ConfigError(f"missing required config key {key!r}")
            return default
        return self.values[key]

    def get_float(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise ConfigError(f"missing required config key {key!r}")
            return default
        return _float(self.values[key], key)

    def get_int(self, key, default=None):
        v = self.get_float(key, default=float(default) if default is not None else None)
        if v != int(v):
            raise ConfigError(f"key {key}: expected an integer, got {v}")
        return int(v)

    def get_bool(self, key, default=False):
        if key not in self.values:
            return default
        text = self.values[key].strip().lower()
        if text in ("true", "yes", "1", "on"):
            return True
        if text in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"key {key}: expected a boolean, got {text!r}")

    def get_float_list(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise ConfigError(f"missing required config key {key!r}")
            return list(default)
        text = self.values[key].strip()
        if not text or text == "none":
            return []
        return [_float(part, key) for part in text.split(",")]
