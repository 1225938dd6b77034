"""Flat key-value config documents.

One assignment per line, ``key = value``. Values are ints, floats, booleans,
bare strings, or bracketed lists of numbers. ``#`` starts a comment. This is
deliberately minimal: every study in this package is configured by scalars
and short numeric lists.
"""

from __future__ import annotations

from .errors import ValidationError

Scalar = int | float | bool | str
Value = Scalar | list[Scalar]


def _parse_scalar(text: str) -> Scalar:
    t = text.strip()
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    if t.startswith('"') and t.endswith('"') and len(t) >= 2:
        return t[1:-1]
    return t


def parse_flat_config(text: str) -> dict[str, Value]:
    out: dict[str, Value] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValidationError(f"config line {lineno}: empty key")
        if value.startswith("[") and value.endswith("]"):
            inner = value[1:-1].strip()
            items = [s for s in (p.strip() for p in inner.split(",")) if s]
            out[key] = [_parse_scalar(s) for s in items]
        else:
            out[key] = _parse_scalar(value)
    return out


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    if isinstance(value, float):
        return repr(float(value))  # shortest exact round-trip form
    if isinstance(value, str):
        return value
    return str(value)


def format_flat_config(entries: dict[str, Value]) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in entries.items())
