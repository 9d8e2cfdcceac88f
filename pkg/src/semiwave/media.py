"""Quasi-periodic reaction coefficients and their hull translates."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "MediumError",
    "QuasiPeriodicMedium",
    "constant_medium",
    "periodic_medium",
    "quasi_periodic_medium",
    "parse_medium",
    "format_medium",
]


class MediumError(ValueError):
    """Raised for a coefficient that is not uniformly positive or is malformed."""


@dataclass(frozen=True)
class QuasiPeriodicMedium:
    """Finite trigonometric sum ``base + sum A_k cos(w_k (x + shift) + phi_k)``.

    A hull element ``g = a(. + s)`` is the same medium with ``shift`` moved
    by ``s``. Instances are immutable.
    """

    base: float
    modes: tuple[tuple[float, float, float], ...] = field(default=())
    shift: float = 0.0

    def __post_init__(self):
        modes = tuple((float(a), float(w), float(p)) for a, w, p in self.modes)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "base", float(self.base))
        object.__setattr__(self, "shift", float(self.shift))
        for amp, freq, _ in modes:
            if amp < 0:
                raise MediumError(f"mode amplitude must be >= 0, got {amp}")
            if freq <= 0:
                raise MediumError(f"mode frequency must be > 0, got {freq}")

    @property
    def amplitude_sum(self) -> float:
        return math.fsum(a for a, _, _ in self.modes)

    def __call__(self, x):
        return evaluate(self, x)

    def shifted(self, s: float) -> "QuasiPeriodicMedium":
        return shifted(self, s)

    def bounds(self) -> tuple[float, float]:
        return bounds(self)

    def mode_tables(self, xi):
        """Per-mode ``cos`` and ``sin`` of ``w_k (xi + shift) + phi_k``.

        Together with ``cos(w_k h)``, ``sin(w_k h)`` these give ``g(xi + h)``
        by the addition formula, so a moving frame never re-evaluates trig
        functions on the whole grid.
        """
        xi = np.asarray(xi, dtype=float)
        amps = np.array([a for a, _, _ in self.modes], dtype=float)
        freqs = np.array([w for _, w, _ in self.modes], dtype=float)
        arg = np.outer(freqs, xi + self.shift) + np.array([p for _, _, p in self.modes])[:, None]
        return amps, freqs, np.cos(arg), np.sin(arg)

    @property
    def is_constant(self) -> bool:
        return all(a == 0.0 for a, _, _ in self.modes)

    def __str__(self):
        return format_medium(self)


def evaluate(medium: QuasiPeriodicMedium, x):
    x = np.asarray(x, dtype=float)
    value = np.full(x.shape, medium.base)
    for amp, freq, phase in medium.modes:
        value = value + amp * np.cos(freq * (x + medium.shift) + phase)
    if value.ndim == 0:
        return float(value)
    return value


def shifted(medium: QuasiPeriodicMedium, s: float) -> QuasiPeriodicMedium:
    if s == 0:
        return medium
    return replace(medium, shift=medium.shift + s)


def bounds(medium: QuasiPeriodicMedium) -> tuple[float, float]:
    total = medium.amplitude_sum
    lower = medium.base - total
    if lower <= 0:
        raise MediumError(
            f"coefficient is not uniformly positive: base - sum(amplitudes) = {lower:g}"
        )
    return lower, medium.base + total


def constant_medium(a0: float = 1.0) -> QuasiPeriodicMedium:
    return QuasiPeriodicMedium(a0)


def periodic_medium() -> QuasiPeriodicMedium:
    """``1 + 0.5 sin x``, written as a cosine mode with phase ``-pi/2``."""
    return QuasiPeriodicMedium(1.0, ((0.5, 1.0, -math.pi / 2),))


def quasi_periodic_medium() -> QuasiPeriodicMedium:
    """Two incommensurate modes, frequency ratio sqrt(2)."""
    return QuasiPeriodicMedium(1.5, ((0.3, 1.0, 0.0), (0.2, math.sqrt(2.0), 0.0)))


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_ITEM = re.compile(r"^\s*(base|mode|shift)\s*=\s*(.*?)\s*$")
_NAMED = re.compile(r"([-+]?)(pi|sqrt2)(?:/(\d+))?")
_CONSTANTS = {"pi": math.pi, "sqrt2": math.sqrt(2.0)}


def _number(token: str) -> float:
    """A float literal, or ``[-]pi`` / ``[-]sqrt2`` optionally divided by an integer."""
    token = token.strip()
    named = _NAMED.fullmatch(token)
    if named:
        sign, name, div = named.groups()
        value = _CONSTANTS[name] / (int(div) if div else 1)
        return -value if sign == "-" else value
    if not re.fullmatch(_NUM, token) and token.lower() not in ("inf", "nan"):
        raise MediumError(f"not a number: {token!r}")
    return float(token)


def parse_medium(text: str) -> QuasiPeriodicMedium:
    """Parse ``base=<f>; mode=<amp>,<freq>,<phase>; ...; shift=<f>``."""
    base = None
    shift = 0.0
    modes = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        match = _ITEM.match(chunk)
        if match is None:
            raise MediumError(f"cannot parse medium item {chunk.strip()!r}")
        key, value = match.groups()
        if key == "base":
            base = _number(value)
        elif key == "shift":
            shift = _number(value)
        else:
            parts = value.split(",")
            if len(parts) != 3:
                raise MediumError(f"mode needs amp,freq,phase: {value!r}")
            modes.append(tuple(_number(p) for p in parts))
    if base is None:
        raise MediumError("medium spec is missing 'base'")
    return QuasiPeriodicMedium(base, tuple(modes), shift)


def format_medium(medium: QuasiPeriodicMedium) -> str:
    items = [f"base={medium.base!r}"]
    items += [f"mode={a!r},{w!r},{p!r}" for a, w, p in medium.modes]
    items.append(f"shift={medium.shift!r}")
    return "; ".join(items)
