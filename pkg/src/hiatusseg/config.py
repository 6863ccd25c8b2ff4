"""Plain-text ``key = value`` configuration files.

One entry per line, ``#`` starts a comment. Values stay strings here; the
consumer converts them against its own field types.
"""
import dataclasses
import typing
from pathlib import Path


class ConfigError(ValueError):
    pass


def parse_config(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load_config(path):
    return parse_config(Path(path).read_text(encoding="utf-8"))


def dump_config(values):
    return "".join(f"{k} = {v}\n" for k, v in values.items())


def _convert(value, typ, key):
    try:
        if typ is bool:
            low = str(value).lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(value)
            return low in ("1", "true", "yes")
        if typ is int:
            f = float(value)
            if f != int(f):
                raise ValueError(value)
            return int(f)
        return typ(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot read {value!r} as {typ.__name__}") from None


def build_dataclass(cls, values, strict=True):
    """Instantiate ``cls`` from string values, converting per field annotation."""
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - names
    if strict and unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = {k: _convert(v, hints[k], k) for k, v in values.items() if k in names}
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def dataclass_values(obj):
    return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
