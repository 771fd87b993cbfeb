"""The attracting case 0 < |lam| < 1.

phi(z) = lim P^n(z) / lam^n linearizes P on the whole basin of 0. The
linearizing parametrization psi = phi^{-1} lives on the disk of radius r, its
image U has a critical point on the boundary (the *main* critical point), and
r = |phi(main critical point)|.

Two routes to r are provided:

* ``method="series"`` estimates r from the Taylor coefficients of psi and
  picks the critical point whose |phi| matches it.
* ``method="dynamic"`` decides which critical point lies on the boundary of U
  by continuing psi along the segment [0, phi(k)] for the critical point k with
  the smaller |phi|. The continuation runs into k exactly when k is on the
  boundary of U; otherwise it ends at an interior point of U. This route is
  exact up to the accuracy of phi and is the one used for grid sweeps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .family import CubicSlicePoint, escape_radius, quadratic_like_bound
from .series import RadiusEstimate, hadamard_radius, linearize

MAX_ITER = 100_000

ATTRACTED = 0
ESCAPED = 1
UNDECIDED = 2

MAIN_NONE = 0
MAIN_ONE = 1
MAIN_C = 2
MAIN_BOTH = 3

# Z-curve ray flags
RAY_AMBIGUOUS = 1
RAY_HIT_BOTH = 2
RAY_FAILED = 4

# The continuation of psi stops at t = 1 - _T_GAP. A critical point on the
# boundary of U is then approached to within about sqrt(_T_GAP) of its scale.
_T_GAP = 1e-10
# Below this separation the two critical points are numerically the same point.
_MERGED = 1e-4


class OrbitTag(enum.Enum):
    ATTRACTED_TO_ZERO = "AttractedToZero"
    ESCAPED = "Escaped"
    UNDECIDED = "Undecided"


_TAGS = {ATTRACTED: OrbitTag.ATTRACTED_TO_ZERO, ESCAPED: OrbitTag.ESCAPED, UNDECIDED: OrbitTag.UNDECIDED}


class MainCritical(enum.Enum):
    CRIT_ONE = "CritOne"
    CRIT_C = "CritC"
    BOTH = "Both"


_MAINS = {MAIN_ONE: MainCritical.CRIT_ONE, MAIN_C: MainCritical.CRIT_C, MAIN_BOTH: MainCritical.BOTH}


class NoMatch(ArithmeticError):
    pass


class RayAmbiguous(ArithmeticError):
    pass


@dataclass(frozen=True)
class OrbitClass:
    tag: OrbitTag
    iterations_used: int


@dataclass(frozen=True)
class PhiValue:
    value: complex
    orbit: OrbitClass
    derivative: complex = complex("nan")


@dataclass(frozen=True)
class AttractingRadius:
    r: float
    phi_at_1: complex
    phi_at_c: complex
    main: MainCritical
    tolerance_used: float
    uncertainty: float = 0.0
    estimate: RadiusEstimate | None = None


@dataclass(frozen=True)
class ZCurvePoint:
    ray_index: int
    c: complex
    psi: complex
    flags: int


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _escape_radius(lam, c):
    ac = abs(c)
    return max(math.sqrt(6 * ac / abs(lam)), 6 * abs(c + 1), math.sqrt(12 * ac))


@njit(cache=True)
def _linear_zone(lam, u):
    """epsilon_0 = 1e-4 * min(1, |lam| / (|a2| + |a3|))."""
    a2 = abs(lam * (1 + u) / 2)
    a3 = abs(lam * u / 3)
    scale = abs(lam) / (a2 + a3) if a2 + a3 > 0 else 1.0
    return 1e-4 * min(1.0, scale)


@njit(cache=True)
def _phi_kernel(lam, u, z, R, eps0, max_iter):
    """Return (status, phi(z), phi'(z), iterations)."""
    nan = complex(math.nan, math.nan)
    a2 = -lam * (1 + u) / 2
    beta2 = a2 / (lam - lam * lam)
    w = z
    d = 1 + 0j
    inv = 1 + 0j
    prev = nan
    zone = False
    for n in range(max_iter + 1):
        aw = abs(w)
        if aw > R:
            return ESCAPED, nan, nan, n
        if aw == 0.0:
            return ATTRACTED, 0j, d * inv, n
        if aw <= eps0:
            # second-order local coordinate w + beta2 w^2 removes the leading error
            val = (w + beta2 * w * w) * inv
            if zone and abs(val - prev) <= 1e-12 * abs(val):
                return ATTRACTED, val, d * (1 + 2 * beta2 * w) * inv, n
            prev = val
            zone = True
        if n == max_iter:
            break
        d *= lam * (1 - w) * (1 - u * w)
        w = lam * w * (1 - 0.5 * (1 + u) * w + (u / 3) * w * w)
        inv /= lam
    return UNDECIDED, nan, nan, max_iter


@njit(cache=True)
def _orbit_status(lam, u, z, R, eps0, max_iter):
    """Cheap basin test without the phi refinement: (status, iterations)."""
    w = z
    for n in range(max_iter + 1):
        aw = abs(w)
        if aw > R:
            return ESCAPED, n
        if aw <= eps0:
            return ATTRACTED, n
        w = lam * w * (1 - 0.5 * (1 + u) * w + (u / 3) * w * w)
    return UNDECIDED, max_iter


@njit(cache=True)
def _continue_psi(lam, u, w0, R, eps0, max_iter):
    """Follow z(t) = psi(t w0) from t = 0 towards t = 1 by predictor-corrector Newton.

    Returns (z_end, t_end, ok).
    """
    t_end = 1.0 - _T_GAP
    z = 0j
    t = 0.0
    dphi = 1 + 0j
    dt = 0.05
    steps = 0
    scale = abs(w0)
    while t < t_end and steps < 5000:
        steps += 1
        dt = min(dt, 0.5 * (1.0 - t))
        t_new = min(t + dt, t_end)
        target = t_new * w0
        z_pred = z + (t_new - t) * w0 / dphi
        zz = z_pred
        conv = False
        df_last = dphi
        for _ in range(40):
            st, f, df, _n = _phi_kernel(lam, u, zz, R, eps0, max_iter)
            if st != ATTRACTED or df == 0:
                break
            df_last = df
            res = f - target
            dz = res / df
            zz -= dz
            if abs(res) <= 1e-12 * scale or abs(dz) <= 1e-14 * (1 + abs(zz)):
                conv = True
                break
        if conv and abs(zz - z_pred) <= 0.5 * abs(z_pred - z) + 1e-13 * (1 + abs(zz)):
            z = zz
            t = t_new
            dphi = df_last
            dt *= 1.5
        else:
            dt *= 0.5
            if dt < 1e-15:
                return z, t, False
    return z, t, t >= t_end


@njit(cache=True)
def _main_dynamic(lam, c, max_iter):
    """Return (main, r, phi(1), phi(c), status(1), status(c))."""
    u = 1 / c
    R = _escape_radius(lam, c)
    eps0 = _linear_zone(lam, u)
    s1, f1, _d1, _n1 = _phi_kernel(lam, u, 1 + 0j, R, eps0, max_iter)
    sc, fc, _dc, _nc = _phi_kernel(lam, u, c, R, eps0, max_iter)
    if s1 == ATTRACTED and sc != ATTRACTED:
        return MAIN_ONE, abs(f1), f1, fc, s1, sc
    if sc == ATTRACTED and s1 != ATTRACTED:
        return MAIN_C, abs(fc), f1, fc, s1, sc
    if s1 != ATTRACTED and sc != ATTRACTED:
        return MAIN_NONE, math.nan, f1, fc, s1, sc
    r1 = abs(f1)
    rc = abs(fc)
    sep = abs(c - 1)
    if sep < _MERGED:
        return MAIN_BOTH, min(r1, rc), f1, fc, s1, sc
    if r1 <= rc:
        k0 = 1 + 0j
        w0 = f1
        near, far = MAIN_ONE, MAIN_C
    else:
        k0 = c
        w0 = fc
        near, far = MAIN_C, MAIN_ONE
    z_end, _t, _ok = _continue_psi(lam, u, w0, R, eps0, max_iter)
    thr = min(0.25 * sep, 1e-2 * max(1.0, abs(k0)))
    if abs(z_end - k0) < thr:
        if abs(r1 - rc) <= 1e-10 * max(r1, rc):
            return MAIN_BOTH, min(r1, rc), f1, fc, s1, sc
        return near, min(r1, rc), f1, fc, s1, sc
    return far, max(r1, rc), f1, fc, s1, sc


@njit(cache=True)
def _trace_ray(lam, angle, rho_lo, rho_hi, n_scan, max_iter):
    """Locate the change of main critical point along the ray arg c = angle.

    Returns (c, phi(1), phi(c), flags).
    """
    direction = complex(math.cos(angle), math.sin(angle))
    log_lo = math.log(rho_lo)
    log_hi = math.log(rho_hi)
    labels = np.empty(n_scan, dtype=np.int64)
    for k in range(n_scan):
        rho = math.exp(log_lo + (log_hi - log_lo) * k / (n_scan - 1))
        labels[k] = _main_dynamic(lam, rho * direction, max_iter)[0]
    flags = 0
    # Transitions from the inner label (CritC) to the outer label (CritOne).
    first = -1
    count = 0
    for k in range(n_scan - 1):
        if labels[k] != labels[k + 1]:
            count += 1
            if first < 0 and labels[k] != MAIN_ONE:
                first = k
    if count != 1:
        flags |= RAY_AMBIGUOUS
    if first < 0:
        flags |= RAY_FAILED
        nan = complex(math.nan, math.nan)
        return nan, nan, nan, flags
    lo = log_lo + (log_hi - log_lo) * first / (n_scan - 1)
    hi = log_lo + (log_hi - log_lo) * (first + 1) / (n_scan - 1)
    lab_lo = labels[first]
    if lab_lo == MAIN_BOTH:
        hi = lo
    elif labels[first + 1] == MAIN_BOTH:
        lo = hi
    for _ in range(200):
        if hi - lo <= 1e-13:
            break
        mid = 0.5 * (lo + hi)
        lab = _main_dynamic(lam, math.exp(mid) * direction, max_iter)[0]
        if lab == MAIN_BOTH:
            lo = hi = mid
            flags |= RAY_HIT_BOTH
            break
        if lab == lab_lo:
            lo = mid
        else:
            hi = mid
    c = math.exp(0.5 * (lo + hi)) * direction
    out = _main_dynamic(lam, c, max_iter)
    return c, out[2], out[3], flags


# ---------------------------------------------------------------- public API


def _attracting(lam: complex):
    lam = complex(lam)
    if not 0 < abs(lam) < 1:
        raise ValueError("the attracting case needs 0 < |lam| < 1")
    return lam


def linear_zone(p: CubicSlicePoint) -> float:
    return float(_linear_zone(p.lam, p.u))


def phi(p: CubicSlicePoint, z: complex, max_iter: int = MAX_ITER) -> PhiValue:
    """Extended linearizing coordinate at z, or the orbit class when z is not attracted."""
    lam = _attracting(p.lam)
    st, val, der, n = _phi_kernel(lam, p.u, complex(z), escape_radius(p), _linear_zone(lam, p.u), max_iter)
    if st == ESCAPED:
        val = complex(math.inf, 0)
    return PhiValue(value=complex(val), orbit=OrbitClass(_TAGS[st], int(n)), derivative=complex(der))


def classify_orbit(p: CubicSlicePoint, z: complex, max_iter: int = MAX_ITER) -> OrbitClass:
    lam = _attracting(p.lam)
    st, n = _orbit_status(lam, p.u, complex(z), escape_radius(p), _linear_zone(lam, p.u), max_iter)
    return OrbitClass(_TAGS[st], int(n))


def quadratic_radius(lam: complex, N: int | None = None) -> RadiusEstimate:
    """Radius of convergence of the linearizing series of Q(z) = lam z (1 - z/2)."""
    lam = complex(lam)
    return hadamard_radius(linearize(-lam / 2, 0, lam, N))


def radius_attracting(
    p: CubicSlicePoint,
    method: str = "series",
    N: int | None = None,
    window: float = 0.5,
    max_iter: int = MAX_ITER,
) -> AttractingRadius:
    """Conformal radius r of U(P) with its main critical point.

    ``method="series"`` estimates r by Cauchy-Hadamard and matches |phi| at the
    critical points against it within max(1e-3, 3 * uncertainty).
    ``method="dynamic"`` locates the main critical point by continuing psi and
    returns r = |phi(main)|.
    """
    lam = _attracting(p.lam)
    if method == "dynamic":
        main, r, f1, fc, s1, sc = _main_dynamic(lam, p.c, max_iter)
        f1 = complex(f1) if s1 == ATTRACTED else complex(math.inf, 0)
        fc = complex(fc) if sc == ATTRACTED else complex(math.inf, 0)
        if main == MAIN_NONE:
            raise NoMatch(f"neither critical orbit settles near 0 for c = {p.c}")
        return AttractingRadius(float(r), f1, fc, _MAINS[main], 0.0)
    if method != "series":
        raise ValueError(f"unknown method {method!r}")
    a1, a2, a3 = p.coefficients()
    est = hadamard_radius(linearize(a2, a3, lam, N), window)
    r = est.r_hat
    f1 = phi(p, 1, max_iter)
    fc = phi(p, p.c, max_iter)
    m1 = abs(f1.value) if f1.orbit.tag is OrbitTag.ATTRACTED_TO_ZERO else math.inf
    mc = abs(fc.value) if fc.orbit.tag is OrbitTag.ATTRACTED_TO_ZERO else math.inf
    tol = max(1e-3, 3 * est.uncertainty)
    d1 = abs(m1 - r) / r
    dc = abs(mc - r) / r
    if d1 <= tol and dc <= tol:
        main = MainCritical.BOTH
    elif d1 <= tol:
        main = MainCritical.CRIT_ONE
    elif dc <= tol:
        main = MainCritical.CRIT_C
    elif min(d1, dc) <= 10 * tol:
        main = MainCritical.CRIT_ONE if d1 <= dc else MainCritical.CRIT_C
        tol = min(d1, dc)
    else:
        raise NoMatch(
            f"series radius {r:.6g} matches neither |phi(1)| = {m1:.6g} nor |phi(c)| = {mc:.6g} "
            f"(tolerance {tol:.3g}, uncertainty {est.uncertainty:.3g})"
        )
    return AttractingRadius(
        r=float(r),
        phi_at_1=f1.value,
        phi_at_c=fc.value,
        main=main,
        tolerance_used=float(tol),
        uncertainty=float(est.uncertainty),
        estimate=est,
    )


def zcurve(lam: complex, n_rays: int = 256, n_scan: int = 48, max_iter: int = MAX_ITER) -> list[ZCurvePoint]:
    """Trace the curve where both critical points lie on the boundary of U.

    Each ray arg c = 2 pi k / n_rays is scanned on a log-spaced radius grid
    between the reciprocal of the quadratic-like bound and the bound itself,
    then the switch from CritC (inside) to CritOne (outside) is bisected. Rays
    whose scan is not monotone carry the RAY_AMBIGUOUS flag and use the first
    inside-to-outside switch.
    """
    lam = _attracting(lam)
    if n_rays < 16:
        raise ValueError("at least 16 rays are required")
    rho_hi = quadratic_like_bound(lam)
    out = []
    for k in range(n_rays):
        angle = 2 * math.pi * k / n_rays
        c, f1, fc, flags = _trace_ray(lam, angle, 1 / rho_hi, rho_hi, n_scan, max_iter)
        psi = complex(fc / f1) if flags & RAY_FAILED == 0 else complex(math.nan, math.nan)
        out.append(ZCurvePoint(k, complex(c), psi, int(flags)))
    return out
