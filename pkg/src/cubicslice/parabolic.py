"""The parabolic case lam = e^{2 pi i p/q}.

The q-th iterate has the form P^q(z) = z + C(c) z^{q+1} + O(z^{q+2}). Written
in u = 1/c, the coefficient is a palindromic polynomial Cq(u) of degree q whose
leading (and constant) coefficient is the same coefficient for the quadratic
limit Q. Its roots u_i give the parabolic measure (2 pi / q) sum delta_{1/u_i}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from numba import njit

from . import _dd as dd

ROOT_RESIDUAL = 1e-10
MAX_SWEEPS = 500
PAIRING = 1e-7
KAPPA = 40.0
STEP_TOL = 1e-24


class ZeroLeading(ArithmeticError):
    pass


class NoConvergence(ArithmeticError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class UPoly:
    """Polynomial in u = 1/c with coefficients coeffs[k] of u^k."""

    coeffs: np.ndarray
    p: int
    q: int
    coeffs_dd: np.ndarray | None = None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, u):
        """Evaluate at u (double-double Horner when double-double coefficients are present)."""
        if self.coeffs_dd is None:
            return np.polynomial.polynomial.polyval(u, self.coeffs)
        if np.ndim(u) == 0:
            return complex(_eval_dd(self.coeffs_dd, complex(u)))
        u = np.asarray(u, dtype=np.complex128)
        return np.array([_eval_dd(self.coeffs_dd, complex(x)) for x in u.ravel()]).reshape(u.shape)

    def palindrome_defect(self) -> float:
        c = self.coeffs
        if self.coeffs_dd is None:
            diff = c - c[::-1]
        else:
            d = self.coeffs_dd - self.coeffs_dd[::-1]
            diff = (d[:, 0] + d[:, 1]) + 1j * (d[:, 2] + d[:, 3])
        return float(np.max(np.abs(diff)) / np.max(np.abs(c)))


@dataclass(frozen=True)
class DiracMeasure:
    points: np.ndarray
    weights: np.ndarray
    total_mass: float


@dataclass(frozen=True)
class ParabolicData:
    L: float
    m: int
    C: complex


@dataclass(frozen=True)
class RootReport:
    roots: np.ndarray
    residuals: np.ndarray
    multiplicities: np.ndarray
    sweeps: int


def _check_pq(p: int, q: int):
    if q < 1:
        raise ValueError("q must be at least 1")
    if math.gcd(p, q) != 1:
        raise ValueError(f"{p}/{q} is not in lowest terms")


def _multiplier_dd(p: int, q: int) -> np.ndarray:
    """e^{2 pi i p/q} to double-double accuracy."""
    with mpmath.workdps(40):
        angle = 2 * mpmath.pi * mpmath.mpf(p % q) / q
        parts = []
        for x in (mpmath.cos(angle), mpmath.sin(angle)):
            hi = float(x)
            parts += [hi, float(x - hi)]
    return np.array(parts)


@njit(cache=True)
def _resonant_coefficient(lam, q, with_u):
    """Coefficient polynomial (in u) of z^{q+1} in the q-th iterate, in double-double.

    The linearizing recursion (lam^n - lam) b_n = a2 [psi^2]_n + a3 [psi^3]_n
    is run with coefficients that are polynomials in u (b_n has degree at most
    n - 1). For n <= q the divisor is nonzero; at n = q + 1 it vanishes and
    the right-hand side A is the resonant term of the normal form
    lam z + A z^{q+1}. Its q-th iterate is z + (q A / lam) z^{q+1}, and the
    leading nonlinear coefficient of a parabolic germ does not change under
    tangent-to-identity conjugacy.
    """
    l0, l1, l2, l3 = lam[0], lam[1], lam[2], lam[3]
    top = q + 1
    deg = top if with_u else 1
    b = np.zeros((top + 1, deg, 4))
    sq = np.zeros((top + 1, deg, 4))
    s2 = np.zeros((deg, 4))
    s3 = np.zeros((deg, 4))
    res = np.zeros((deg, 4))
    b[1, 0, 0] = 1.0
    # -lam/2 and lam/3
    h0, h1 = dd.div(-l0, -l1, 2.0, 0.0)
    h2, h3 = dd.div(-l2, -l3, 2.0, 0.0)
    t0, t1 = dd.div(l0, l1, 3.0, 0.0)
    t2, t3 = dd.div(l2, l3, 3.0, 0.0)
    p0, p1, p2, p3 = l0, l1, l2, l3
    for n in range(2, top + 1):
        p0, p1, p2, p3 = dd.cmul(p0, p1, p2, p3, l0, l1, l2, l3)
        s2[:, :] = 0.0
        s3[:, :] = 0.0
        for i in range(1, n // 2 + 1):
            j = n - i
            twice = 2.0 if i != j else 1.0
            for k in range(min(i, deg)):
                x = b[i, k]
                if x[0] == 0.0 and x[2] == 0.0:
                    continue
                for m in range(min(j, deg - k)):
                    y = b[j, m]
                    r = dd.cmul(x[0], x[1], x[2], x[3], twice * y[0], twice * y[1], twice * y[2], twice * y[3])
                    acc = s2[k + m]
                    acc[0], acc[1], acc[2], acc[3] = dd.cadd(acc[0], acc[1], acc[2], acc[3], r[0], r[1], r[2], r[3])
        sq[n, :, :] = s2
        if with_u:
            for i in range(1, n - 1):
                for k in range(min(i, deg)):
                    x = b[i, k]
                    if x[0] == 0.0 and x[2] == 0.0:
                        continue
                    for m in range(min(n - i - 1, deg - k)):
                        y = sq[n - i, m]
                        r = dd.cmul(x[0], x[1], x[2], x[3], y[0], y[1], y[2], y[3])
                        acc = s3[k + m]
                        acc[0], acc[1], acc[2], acc[3] = dd.cadd(acc[0], acc[1], acc[2], acc[3], r[0], r[1], r[2], r[3])
        # a2 = -lam/2 (1 + u), a3 = lam/3 u
        res[:, :] = 0.0
        for k in range(deg):
            x = s2[k]
            r = dd.cmul(h0, h1, h2, h3, x[0], x[1], x[2], x[3])
            acc = res[k]
            acc[0], acc[1], acc[2], acc[3] = dd.cadd(acc[0], acc[1], acc[2], acc[3], r[0], r[1], r[2], r[3])
            if k + 1 < deg:
                y = s3[k]
                w = dd.cmul(t0, t1, t2, t3, y[0], y[1], y[2], y[3])
                acc = res[k + 1]
                acc[0], acc[1], acc[2], acc[3] = dd.cadd(acc[0], acc[1], acc[2], acc[3], r[0], r[1], r[2], r[3])
                acc[0], acc[1], acc[2], acc[3] = dd.cadd(acc[0], acc[1], acc[2], acc[3], w[0], w[1], w[2], w[3])
        if n < top:
            d0, d1, d2, d3 = dd.csub(p0, p1, p2, p3, l0, l1, l2, l3)
            for k in range(deg):
                x = res[k]
                b[n, k, 0], b[n, k, 1], b[n, k, 2], b[n, k, 3] = dd.cdiv(x[0], x[1], x[2], x[3], d0, d1, d2, d3)
    out = np.empty((deg, 4))
    for k in range(deg):
        x = res[k]
        r = dd.cdiv(float(q) * x[0], float(q) * x[1], float(q) * x[2], float(q) * x[3], l0, l1, l2, l3)
        out[k, 0], out[k, 1], out[k, 2], out[k, 3] = r
    return out


def cq_poly(p: int, q: int) -> UPoly:
    """Coefficient of z^{q+1} in P^q as a polynomial of degree q in u = 1/c."""
    _check_pq(p, q)
    coeffs = _resonant_coefficient(_multiplier_dd(p, q), q, True)[: q + 1]
    return UPoly(coeffs=dd.unpack(coeffs), p=p, q=q, coeffs_dd=coeffs.copy())


def quadratic_c(p: int, q: int) -> complex:
    """Coefficient C_0 of z^{q+1} in Q^q for Q(z) = lam z (1 - z/2)."""
    _check_pq(p, q)
    c0 = complex(dd.unpack(_resonant_coefficient(_multiplier_dd(p, q), q, False)[0]))
    if c0 == 0 or not math.isfinite(abs(c0)):
        raise ZeroLeading(f"C_0 for {p}/{q} is {c0}")
    return c0


@njit(cache=True, inline="always")
def _horner_dd(coeffs, z0, z1, z2, z3):
    n = coeffs.shape[0]
    v0, v1, v2, v3 = coeffs[n - 1, 0], coeffs[n - 1, 1], coeffs[n - 1, 2], coeffs[n - 1, 3]
    d0, d1, d2, d3 = 0.0, 0.0, 0.0, 0.0
    for k in range(n - 2, -1, -1):
        t = dd.cmul(d0, d1, d2, d3, z0, z1, z2, z3)
        d0, d1, d2, d3 = dd.cadd(t[0], t[1], t[2], t[3], v0, v1, v2, v3)
        t = dd.cmul(v0, v1, v2, v3, z0, z1, z2, z3)
        c = coeffs[k]
        v0, v1, v2, v3 = dd.cadd(t[0], t[1], t[2], t[3], c[0], c[1], c[2], c[3])
    return v0, v1, v2, v3, d0, d1, d2, d3


@njit(cache=True)
def _eval_dd(coeffs, u):
    z = dd.from_complex(u)
    r = _horner_dd(coeffs, z[0], z[1], z[2], z[3])
    return dd.to_complex(r[0], r[1], r[2], r[3])


@njit(cache=True)
def _aberth_dd(coeffs, z, max_sweeps, step_tol):
    """Gauss-Seidel Aberth-Ehrlich sweeps in double-double; returns the sweep count.

    Iteration stops when every relative step is below ``step_tol`` or when the
    largest step has not reached a new minimum for 5 sweeps (rounding floor).
    """
    n = z.shape[0]
    best = np.inf
    stale = 0
    for sweep in range(1, max_sweeps + 1):
        biggest = 0.0
        for i in range(n):
            zi = z[i]
            r = _horner_dd(coeffs, zi[0], zi[1], zi[2], zi[3])
            if r[4] == 0.0 and r[6] == 0.0:
                continue
            ratio = dd.cdiv(r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7])
            s0, s1, s2, s3 = 0.0, 0.0, 0.0, 0.0
            for j in range(n):
                if j == i:
                    continue
                zj = z[j]
                diff = dd.csub(zi[0], zi[1], zi[2], zi[3], zj[0], zj[1], zj[2], zj[3])
                inv = dd.cdiv(1.0, 0.0, 0.0, 0.0, diff[0], diff[1], diff[2], diff[3])
                s0, s1, s2, s3 = dd.cadd(s0, s1, s2, s3, inv[0], inv[1], inv[2], inv[3])
            t = dd.cmul(ratio[0], ratio[1], ratio[2], ratio[3], s0, s1, s2, s3)
            den = dd.csub(1.0, 0.0, 0.0, 0.0, t[0], t[1], t[2], t[3])
            step = dd.cdiv(ratio[0], ratio[1], ratio[2], ratio[3], den[0], den[1], den[2], den[3])
            zi[0], zi[1], zi[2], zi[3] = dd.csub(zi[0], zi[1], zi[2], zi[3], step[0], step[1], step[2], step[3])
            rel = dd.cabs(step[0], step[1], step[2], step[3]) / max(1.0, dd.cabs(zi[0], zi[1], zi[2], zi[3]))
            if not rel <= biggest:
                biggest = rel
        if biggest <= step_tol:
            return sweep
        if biggest < best:
            best = biggest
            stale = 0
        else:
            stale += 1
            if stale >= 5 and best < 1e-8:
                return sweep
    return max_sweeps


@njit(cache=True)
def _residuals_dd(coeffs, z):
    n = z.shape[0]
    deg = coeffs.shape[0] - 1
    out = np.empty(n)
    lead = dd.cabs(coeffs[deg, 0], coeffs[deg, 1], coeffs[deg, 2], coeffs[deg, 3])
    for i in range(n):
        zi = z[i]
        r = _horner_dd(coeffs, zi[0], zi[1], zi[2], zi[3])
        out[i] = dd.cabs(r[0], r[1], r[2], r[3]) / (lead * max(1.0, dd.cabs(zi[0], zi[1], zi[2], zi[3])) ** deg)
    return out


@njit(cache=True)
def _normalize_dd(coeffs):
    out = np.empty_like(coeffs)
    deg = coeffs.shape[0] - 1
    lead = coeffs[deg]
    for k in range(deg + 1):
        c = coeffs[k]
        out[k, 0], out[k, 1], out[k, 2], out[k, 3] = dd.cdiv(
            c[0], c[1], c[2], c[3], lead[0], lead[1], lead[2], lead[3]
        )
    return out


def cq_roots(poly: UPoly, seed: int = 0, report: bool = False):
    """All roots by Aberth-Ehrlich iteration in double-double arithmetic.

    The roots of these polynomials are badly conditioned in the monomial
    basis (perturbing the coefficients at the 1e-16 level moves roots by up to
    1e-2 at q = 89), so the iteration and the residual check run in
    double-double on the double-double coefficients.
    """
    coeffs = poly.coeffs_dd if poly.coeffs_dd is not None else dd.pack(poly.coeffs)
    deg = coeffs.shape[0] - 1
    if deg < 1:
        raise ValueError("degree must be at least 1")
    if coeffs[-1, 0] == 0 and coeffs[-1, 2] == 0:
        raise ZeroLeading("leading coefficient vanishes")
    coeffs = _normalize_dd(coeffs)
    rng = np.random.default_rng(seed)
    residuals = None
    for radius in (1.0, 0.5, 2.0):
        jitter = rng.uniform(-0.25, 0.25, deg) * (2 * np.pi / deg)
        angles = 2 * np.pi * (np.arange(deg) + 0.5) / deg + jitter
        z = dd.pack(radius * np.exp(1j * angles))
        sweeps = _aberth_dd(coeffs, z, MAX_SWEEPS, STEP_TOL)
        residuals = _residuals_dd(coeffs, z)
        if np.all(np.isfinite(residuals)) and np.max(residuals) < ROOT_RESIDUAL:
            roots = dd.unpack(z)
            if report:
                return RootReport(roots, residuals, _multiplicities(roots), sweeps)
            return roots
    raise NoConvergence(
        f"no root set with residual below {ROOT_RESIDUAL} after {MAX_SWEEPS} sweeps "
        f"(worst {np.nanmax(residuals):.3g})",
        residuals=residuals,
    )


def _multiplicities(z):
    """Size of the cluster (pairing distance 1e-7) that each root belongs to."""
    close = np.abs(z[:, None] - z[None, :]) <= PAIRING * np.maximum(1, np.abs(z))[:, None]
    return close.sum(axis=1)


def parabolic_measure(p: int, q: int, seed: int = 0) -> DiracMeasure:
    roots = cq_roots(cq_poly(p, q), seed=seed)
    points = 1 / roots
    order = np.lexsort((points.imag, points.real))
    return DiracMeasure(
        points=points[order],
        weights=np.full(q, 2 * math.pi / q),
        total_mass=2 * math.pi,
    )


def asymptotic_size(p: int, q: int, c: complex, poly: UPoly | None = None) -> ParabolicData:
    """Asymptotic size L = 1/|C|^{1/q} of parabolic orbits of P_{lam,c} at 0."""
    c = complex(c)
    if c == 0:
        raise ValueError("c must be nonzero")
    if poly is None:
        poly = cq_poly(p, q)
    C = complex(poly(1 / c))
    scale = np.max(np.abs(poly.coeffs)) * max(1.0, abs(1 / c)) ** q
    if abs(C) <= ROOT_RESIDUAL * scale:
        return ParabolicData(L=math.inf, m=2 * q, C=C)
    return ParabolicData(L=abs(C) ** (-1 / q), m=q, C=C)
