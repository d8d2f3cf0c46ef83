"""Small formatting and environment helpers."""

import os

from ..exceptions import ValidationError


def fmt17(value: float) -> str:
    """Full-precision text for a float (17 significant digits)."""
    return f"{float(value):.17g}"


def halving_sequence(start: float, levels: int) -> list[float]:
    """[start, start/2, ..., start/2^(levels-1)]."""
    if levels < 1:
        raise ValidationError("levels must be positive", field="levels", value=levels)
    return [start / 2**k for k in range(levels)]


def env_int(name: str, default: int | None = None) -> int | None:
    """Integer environment variable, ``default`` when unset or empty."""
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(
            f"Environment variable {name} must be an integer", field=name, value=raw
        ) from None
