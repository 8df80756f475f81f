"""Flat key-value config text: parsing, formatting, numeric literals.

The accepted file shape is one `key = value` pair per line; blank lines
and `#` comments are ignored.  Numeric values may be plain int/float
literals or simple multiples of pi ("pi", "pi/2", "-3pi/4", "2*pi").
"""
from __future__ import annotations

import math
import re

from .errors import ConfigError

_PI_RE = re.compile(
    r"^(?P<sign>[+-]?)(?P<coef>\d+(?:\.\d*)?)?\s*\*?\s*pi(?:\s*/\s*(?P<div>\d+(?:\.\d*)?))?$")


def parse_number(text: str) -> float:
    """Parse a numeric literal, allowing pi fractions like "pi/2" or "-2pi"."""
    s = text.strip()
    try:
        return float(s)
    except ValueError:
        pass
    m = _PI_RE.match(s)
    if m is None:
        raise ConfigError(f"cannot parse numeric value {text!r}")
    value = math.pi * float(m.group("coef") or 1.0)
    if m.group("div"):
        value /= float(m.group("div"))
    return -value if m.group("sign") == "-" else value


def parse_int(text: str) -> int:
    s = text.strip()
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"cannot parse integer value {text!r}") from None


def parse_kv_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines into an ordered mapping of raw strings."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def format_kv(pairs: dict) -> str:
    """Format a mapping as the canonical `key = value` text."""
    return "".join(f"{k} = {v}\n" for k, v in pairs.items())


def read_kv_file(path) -> dict[str, str]:
    with open(path) as fh:
        return parse_kv_text(fh.read())
