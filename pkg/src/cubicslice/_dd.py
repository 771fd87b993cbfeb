"""Double-double arithmetic (about 32 significant digits) for numba kernels.

A real double-double is an unevaluated sum hi + lo with |lo| <= ulp(hi)/2. A
complex value is the 4-tuple (re_hi, re_lo, im_hi, im_lo). The algorithms are
the error-free transformations of Dekker and Knuth as arranged in the QD
library of Hida, Li and Bailey; they rely on strict IEEE evaluation, which
numba preserves unless fastmath is requested.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_SPLIT = 134217729.0  # 2^27 + 1


@njit(cache=True, inline="always")
def two_sum(a, b):
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


@njit(cache=True, inline="always")
def quick_two_sum(a, b):
    s = a + b
    e = b - (s - a)
    return s, e


@njit(cache=True, inline="always")
def _split(a):
    t = _SPLIT * a
    hi = t - (t - a)
    return hi, a - hi


@njit(cache=True, inline="always")
def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


@njit(cache=True, inline="always")
def add(ah, al, bh, bl):
    s1, s2 = two_sum(ah, bh)
    t1, t2 = two_sum(al, bl)
    s2 += t1
    s1, s2 = quick_two_sum(s1, s2)
    s2 += t2
    return quick_two_sum(s1, s2)


@njit(cache=True, inline="always")
def mul(ah, al, bh, bl):
    p1, p2 = two_prod(ah, bh)
    p2 += ah * bl + al * bh
    return quick_two_sum(p1, p2)


@njit(cache=True, inline="always")
def div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = mul(bh, bl, q1, 0.0)
    rh, rl = add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = mul(bh, bl, q2, 0.0)
    rh, rl = add(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = quick_two_sum(q1, q2)
    return add(q1, q2, q3, 0.0)


@njit(cache=True, inline="always")
def cadd(a0, a1, a2, a3, b0, b1, b2, b3):
    r0, r1 = add(a0, a1, b0, b1)
    i0, i1 = add(a2, a3, b2, b3)
    return r0, r1, i0, i1


@njit(cache=True, inline="always")
def csub(a0, a1, a2, a3, b0, b1, b2, b3):
    return cadd(a0, a1, a2, a3, -b0, -b1, -b2, -b3)


@njit(cache=True, inline="always")
def cmul(a0, a1, a2, a3, b0, b1, b2, b3):
    rr0, rr1 = mul(a0, a1, b0, b1)
    ii0, ii1 = mul(a2, a3, b2, b3)
    ri0, ri1 = mul(a0, a1, b2, b3)
    ir0, ir1 = mul(a2, a3, b0, b1)
    r0, r1 = add(rr0, rr1, -ii0, -ii1)
    i0, i1 = add(ri0, ri1, ir0, ir1)
    return r0, r1, i0, i1


@njit(cache=True, inline="always")
def cdiv(a0, a1, a2, a3, b0, b1, b2, b3):
    n0, n1 = mul(b0, b1, b0, b1)
    m0, m1 = mul(b2, b3, b2, b3)
    d0, d1 = add(n0, n1, m0, m1)
    t0, t1, t2, t3 = cmul(a0, a1, a2, a3, b0, b1, -b2, -b3)
    r0, r1 = div(t0, t1, d0, d1)
    i0, i1 = div(t2, t3, d0, d1)
    return r0, r1, i0, i1


@njit(cache=True, inline="always")
def from_complex(z):
    return z.real, 0.0, z.imag, 0.0


@njit(cache=True, inline="always")
def to_complex(a0, a1, a2, a3):
    return complex(a0 + a1, a2 + a3)


@njit(cache=True, inline="always")
def cabs(a0, a1, a2, a3):
    return abs(complex(a0 + a1, a2 + a3))


def pack(z) -> np.ndarray:
    """Complex array -> (..., 4) double-double array with zero low parts."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros(z.shape + (4,))
    out[..., 0] = z.real
    out[..., 2] = z.imag
    return out


def unpack(a) -> np.ndarray:
    a = np.asarray(a)
    return (a[..., 0] + a[..., 1]) + 1j * (a[..., 2] + a[..., 3])
