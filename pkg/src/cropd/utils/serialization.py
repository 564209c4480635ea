"""Canonical serialization helpers used for hashing and config values."""

import json
import math
from fractions import Fraction
from typing import Any

from cryptography.hazmat.primitives import hashes


def canonical_json(data: Any) -> str:
    """Simple JSON canonicalization using sorted keys."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def sha256_hex(data: Any) -> str:
    """SHA-256 hex digest of the canonical JSON form of `data`."""
    digest = hashes.Hash(hashes.SHA256())
    digest.update(canonical_json(data).encode())
    return digest.finalize().hex()


def parse_real(value: str | float | int) -> float:
    """Parse a real given as a number or a rational string such as "8/255"."""
    if isinstance(value, bool):
        raise ValueError(f"Expected a real number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(Fraction(value.strip()))
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Invalid real value {value!r}: {str(e)}")


def format_real(value: str | float | int) -> str:
    """Canonical string form of a real: rationals stay rational, floats use repr."""
    if isinstance(value, str):
        fraction = Fraction(value.strip())
        if fraction.denominator == 1:
            return str(fraction.numerator)
        return f"{fraction.numerator}/{fraction.denominator}"
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return repr(float(value))


def finite_or_none(value: float) -> float | None:
    """Map non-finite floats to None so reports stay strict JSON."""
    if value is None or not math.isfinite(value):
        return None
    return float(value)
