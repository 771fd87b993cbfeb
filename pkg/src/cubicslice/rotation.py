"""Rotation numbers as exact continued fractions [0; a1, a2, ...]."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction


class DepthExceeded(ValueError):
    pass


class PrecisionExhausted(ArithmeticError):
    pass


class RationalRotation(ValueError):
    """Raised when an irrational-only quantity is requested for a terminating expansion."""


@dataclass(frozen=True)
class RotationNumber:
    partial_quotients: tuple[int, ...]
    float_hint: float | None = None
    terminating: bool = False

    def __post_init__(self):
        pq = tuple(int(a) for a in self.partial_quotients)
        if not pq:
            raise ValueError("at least one partial quotient is required")
        if any(a < 1 for a in pq):
            raise ValueError("partial quotients must be positive integers")
        object.__setattr__(self, "partial_quotients", pq)

    @property
    def value(self) -> float:
        if self.float_hint is not None:
            return float(self.float_hint)
        p, q = convergents(self, len(self.partial_quotients))[-1]
        return p / q

    def exact_prefix_value(self) -> Fraction:
        p, q = convergents(self, len(self.partial_quotients))[-1]
        return Fraction(p, q)


def golden_mean(depth: int = 64) -> RotationNumber:
    return RotationNumber((1,) * depth, float_hint=(math.sqrt(5) - 1) / 2)


def convergents(r: RotationNumber, depth: int) -> list[tuple[int, int]]:
    """First ``depth`` convergents p_k/q_k, starting from 1/a_1."""
    if depth > len(r.partial_quotients):
        raise DepthExceeded(
            f"depth {depth} exceeds the {len(r.partial_quotients)} known partial quotients"
        )
    out = []
    p_prev, q_prev = 1, 0  # p_{-1}, q_{-1}
    p, q = 0, 1  # p_0, q_0
    for a in r.partial_quotients[:depth]:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


def cf_expand(x: float, depth: int) -> RotationNumber:
    """Continued fraction of x in (0, 1) by the Gauss map.

    The expansion stops early when the remainder drops below 1e-14, which
    marks the input as rational at double precision.
    """
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    if depth > 30:
        warnings.warn(
            "continued fractions of doubles are unreliable past about 30 terms",
            stacklevel=2,
        )
    quotients = []
    rem = Fraction(x)
    terminated = False
    for _ in range(depth):
        inv = 1 / rem
        a = math.floor(inv)
        quotients.append(a)
        rem = inv - a
        if rem < 1e-14:
            terminated = True
            break
    r = RotationNumber(tuple(quotients), float_hint=x, terminating=terminated)
    # Each partial quotient consumes about 2 log10(q_k/q_{k-1}) digits; past
    # ~16 digits the tail is noise from the binary representation (which is
    # itself a terminating expansion, so termination does not excuse it).
    _, q = convergents(r, len(quotients))[-1]
    if q * q > 2**53 * 64:
        raise PrecisionExhausted(
            f"depth {len(quotients)} needs q_k^2 ~ {q * q:.3g}, beyond double precision"
        )
    return r


def brjuno_sum(r: RotationNumber, depth: int) -> float:
    """Truncated Brjuno sum: sum over k < depth of log(q_{k+1}) / q_k."""
    if depth < 2:
        raise ValueError("depth must be at least 2")
    if r.terminating:
        raise RationalRotation("the Brjuno sum is not defined for a rational rotation number")
    qs = [q for _, q in convergents(r, depth)]
    return math.fsum(math.log(qs[k + 1]) / qs[k] for k in range(depth - 1))


def is_bounded_type(r: RotationNumber, bound: int) -> bool:
    return max(r.partial_quotients) <= bound


def parse_theta(text: str, depth: int = 64) -> RotationNumber:
    """Parse ``golden``, ``cf:a1,a2,...`` or a decimal in (0, 1).

    A trailing ``...`` in the ``cf:`` form repeats the last quotient up to ``depth`` terms.
    """
    text = text.strip()
    if text == "golden":
        return golden_mean(depth)
    if text.startswith("cf:"):
        items = [t for t in text[3:].split(",") if t]
        repeat = bool(items) and items[-1] == "..."
        if repeat:
            items = items[:-1]
        quotients = [int(t) for t in items]
        if repeat and quotients:
            quotients += [quotients[-1]] * max(0, depth - len(quotients))
        return RotationNumber(tuple(quotients), terminating=not repeat)
    return cf_expand(float(text), min(depth, 30))
