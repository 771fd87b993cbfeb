"""The marked cubic family P(z) = lam*z*(1 - (1 + 1/c)*z/2 + z**2/(3c)).

Every cubic with a marked fixed point of multiplier ``lam`` at the origin and
critical points at 1 and ``c`` has this form. Working with ``u = 1/c`` keeps
the coefficients polynomial and makes the quadratic limit ``c -> inf`` the
plain substitution ``u = 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

REL_TOL = 1e-12


@dataclass(frozen=True)
class CubicSlicePoint:
    """A cubic of the slice with multiplier ``lam`` and critical points 1 and ``c``."""

    lam: complex
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "c", complex(self.c))
        if self.c == 0:
            raise ValueError("c must be nonzero: the fixed point 0 would be critical")

    @property
    def u(self) -> complex:
        return 1 / self.c

    @property
    def critical_points(self) -> tuple[complex, complex]:
        return (1 + 0j, self.c)

    def coefficients(self) -> tuple[complex, complex, complex]:
        """Return (a1, a2, a3) with P(z) = a1 z + a2 z^2 + a3 z^3."""
        u = self.u
        return self.lam, -self.lam * (1 + u) / 2, self.lam * u / 3

    def inverted(self) -> "CubicSlicePoint":
        """The conjugate map z -> P(c z)/c, which is the member with parameter 1/c."""
        return CubicSlicePoint(self.lam, 1 / self.c)


@dataclass(frozen=True)
class UnmarkedCoords:
    v: complex
    a: complex
    b2: complex


def eval_cubic(p: CubicSlicePoint, z):
    u = p.u
    return p.lam * z * (1 - (1 + u) * z / 2 + u * z * z / 3)


def eval_cubic_derivative(p: CubicSlicePoint, z):
    u = p.u
    return p.lam * (1 - z) * (1 - u * z)


def eval_quadratic(lam: complex, z):
    """The limit map Q(z) = lam*z*(1 - z/2) obtained as c -> infinity."""
    return lam * z * (1 - z / 2)


def coordinates(p: CubicSlicePoint) -> UnmarkedCoords:
    lam = p.lam
    v = (p.c + 1 / p.c) / 2
    a = lam * (1 - v) / 2
    b2 = (lam / 3) * ((v + 1) / 2) * (1 + (v - 2) * lam / 3) ** 2
    return UnmarkedCoords(v=v, a=a, b2=b2)


def c_from_v(v: complex) -> complex:
    """Invert v = (c + 1/c)/2, returning the root with |c| >= 1.

    On the unit circle both roots have modulus one; the root
    ``v + sqrt(v^2 - 1)`` with the principal square root is returned then.
    """
    v = complex(v)
    c = v + cmath.sqrt(v * v - 1)
    if abs(c) < 1:
        c = 1 / c
    return c


def multiplier(p: int, q: int) -> complex:
    """e^{2 pi i p/q}, built from cos/sin of the reduced angle."""
    angle = 2 * math.pi * ((p % q) / q)
    return complex(math.cos(angle), math.sin(angle))


def _close(x: complex, y: complex, tol: float = REL_TOL) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def fiber_cardinality(a: complex, b2: complex) -> int:
    """Number of marked pairs (lam, v) representing the monic centred cubic z^3 + a z + b.

    Only ``b2 = b**2`` enters because z -> -z conjugates the maps for b and -b.
    A pair exists for each fixed point that is neither critical nor a repeated
    root of the fixed-point equation; the symmetric maps (b = 0) identify the
    two non-zero fixed points.
    """
    a, b2 = complex(a), complex(b2)
    if _close(b2, 0):
        if _close(a, 0) or _close(a, 1) or _close(a, 1.5):
            return 1
        return 2
    if _close(a, 4 / 3) and _close(b2, -4 / 729):
        return 1
    # z^3 + (a - 1) z + b has a double root iff its discriminant vanishes.
    disc = -4 * (a - 1) ** 3 - 27 * b2
    scale = 4 * abs(a - 1) ** 3 + 27 * abs(b2)
    if abs(disc) <= REL_TOL * max(scale, 1e-300):
        return 2
    # A fixed point at a critical point has multiplier 0 and cannot be marked.
    crit = b2 + (a / 3) * (1 - 2 * a / 3) ** 2
    crit_scale = abs(b2) + abs(a / 3) * abs(1 - 2 * a / 3) ** 2
    if abs(crit) <= REL_TOL * max(crit_scale, 1e-300):
        return 2
    return 3


def escape_radius(p: CubicSlicePoint) -> float:
    """Radius beyond which every orbit escapes to infinity."""
    c = p.c
    return max(
        math.sqrt(6 * abs(c) / abs(p.lam)),
        6 * abs(c + 1),
        math.sqrt(12 * abs(c)),
    )


def quadratic_escape_radius(lam: complex) -> float:
    """Escape radius for Q(z) = lam*z*(1 - z/2): beyond it |Q(z)| > 2|z|."""
    return 2 * (2 + abs(lam)) / abs(lam)


def quadratic_like_bound(lam: complex) -> float:
    """Radius in |c| beyond which the critical point c escapes and 1 is the main critical point."""
    return 49 / (49 / 2 - 17) * (0.5 + 7 / (3 * abs(lam)))
