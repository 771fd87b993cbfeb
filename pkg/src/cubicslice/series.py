"""Linearizing power series psi(z) = z + b_2 z^2 + ... with P(psi(z)) = psi(lam z).

For a cubic P(z) = lam z + a2 z^2 + a3 z^3 the coefficients satisfy

    (lam^n - lam) b_n = a2 [psi^2]_n + a3 [psi^3]_n,

where [f]_n is the n-th Taylor coefficient. Keeping the running square
[psi^2]_n alongside b_n makes each new coefficient an O(n) pair of
convolutions, so the whole sequence costs O(N^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

DEFAULT_N_ATTRACTING = 4096
DEFAULT_N_NEUTRAL = 16384

_RESCALE_HI = 1e100
_RESCALE_LO = 1e-100


class SmallDivisorZero(ZeroDivisionError):
    pass


class DegenerateSequence(ValueError):
    """All tail coefficients vanish, so the radius of convergence is infinite."""


class OutsideDisk(ValueError):
    pass


def default_order(lam: complex) -> int:
    return DEFAULT_N_NEUTRAL if abs(abs(lam) - 1) < 1e-12 else DEFAULT_N_ATTRACTING


@dataclass(frozen=True)
class CoeffSequence:
    """Coefficients b_1..b_N stored as b_n * s^n with log(s) = ``log_scale``.

    ``scaled[k]`` holds the coefficient of index n = k + 1.
    """

    scaled: np.ndarray
    log_scale: float
    N: int

    @property
    def scale(self) -> float:
        return math.exp(self.log_scale)

    def log_abs(self) -> np.ndarray:
        """log|b_n| for n = 1..N; -inf where the coefficient is exactly zero."""
        n = np.arange(1, self.N + 1)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.scaled)) - n * self.log_scale

    @property
    def coeffs(self) -> np.ndarray:
        """Unscaled b_n; entries overflow to inf or underflow to 0 when not representable."""
        phase = np.exp(1j * np.angle(self.scaled))
        with np.errstate(over="ignore", under="ignore"):
            mag = np.exp(self.log_abs())
        return np.where(self.scaled == 0, 0, phase * mag)

    @classmethod
    def from_coefficients(cls, b) -> "CoeffSequence":
        b = np.asarray(b, dtype=np.complex128)
        return cls(scaled=b.copy(), log_scale=0.0, N=len(b))

    @classmethod
    def from_log_abs(cls, log_abs, phase=None) -> "CoeffSequence":
        """Build a sequence from log|b_n| (and optional phases) without overflow."""
        log_abs = np.asarray(log_abs, dtype=float)
        n = np.arange(1, len(log_abs) + 1)
        finite = np.isfinite(log_abs)
        slope = np.polyfit(n[finite], log_abs[finite], 1)[0] if finite.sum() > 1 else 0.0
        log_scale = -slope
        mag = np.where(finite, np.exp(np.where(finite, log_abs + n * log_scale, 0.0)), 0.0)
        ph = np.ones(len(log_abs)) if phase is None else np.exp(1j * np.asarray(phase))
        return cls(scaled=(mag * ph).astype(np.complex128), log_scale=float(log_scale), N=len(log_abs))


@dataclass(frozen=True)
class RadiusEstimate:
    r_hat: float
    r_tail: float
    r_fit: float
    uncertainty: float


@njit(cache=True, nogil=True)
def _rescale(beta, sq, n, factor_log):
    for k in range(1, n + 1):
        f = math.exp(k * factor_log)
        beta[k] *= f
        sq[k] *= f


@njit(cache=True, nogil=True)
def _linearize_kernel(a2, a3, lam, N, tol):
    # beta[n] = b_n s^n and sq[n] = [psi^2]_n s^n, 1-based.
    beta = np.zeros(N + 1, dtype=np.complex128)
    sq = np.zeros(N + 1, dtype=np.complex128)
    log_s = 0.0
    beta[1] = 1.0
    lam_pow = lam
    bad = 0
    for n in range(2, N + 1):
        lam_pow *= lam
        div = lam_pow - lam
        if abs(div) <= tol * n * max(1.0, abs(lam_pow)):
            bad = n
            break
        acc2 = 0j
        half = n // 2
        for i in range(1, half + 1):
            term = beta[i] * beta[n - i]
            if 2 * i == n:
                acc2 += term
            else:
                acc2 += 2 * term
        sq[n] = acc2
        acc3 = 0j
        if a3 != 0:
            for i in range(1, n - 1):
                acc3 += beta[i] * sq[n - i]
        val = (a2 * acc2 + a3 * acc3) / div
        beta[n] = val
        m = abs(val)
        if m > _RESCALE_HI or (m != 0.0 and m < _RESCALE_LO):
            # choose s' so that |b_n| s'^n = 1
            factor_log = -math.log(m) / n
            _rescale(beta, sq, n, factor_log)
            log_s += factor_log
    return beta, log_s, bad


def linearize(a2: complex, a3: complex, lam: complex, N: int | None = None) -> CoeffSequence:
    """Coefficients b_1..b_N of the linearizing map of lam z + a2 z^2 + a3 z^3."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("the multiplier must be nonzero")
    if N is None:
        N = default_order(lam)
    if N < 1:
        raise ValueError("N must be positive")
    beta, log_s, bad = _linearize_kernel(complex(a2), complex(a3), lam, int(N), 64 * np.finfo(float).eps)
    if bad:
        raise SmallDivisorZero(f"lam^{bad} - lam vanishes to rounding: lam is a low-order root of unity")
    return CoeffSequence(scaled=beta[1:].copy(), log_scale=float(log_s), N=int(N))


def hadamard_radius(s: CoeffSequence, window: float = 0.5) -> RadiusEstimate:
    if s.N < 64:
        raise ValueError("at least 64 coefficients are needed")
    if not 0 < window <= 1:
        raise ValueError("window must be a fraction in (0, 1]")
    start = max(1, int(math.ceil((1 - window) * s.N)))
    n = np.arange(start, s.N + 1)
    la = s.log_abs()[start - 1:]
    keep = np.isfinite(la)
    if not keep.any():
        raise DegenerateSequence("all tail coefficients are zero; the radius is +inf")
    n, la = n[keep], la[keep]
    log_r_tail = -np.max(la / n)
    if len(n) > 1:
        slope = np.polyfit(n.astype(float), la, 1)[0]
        log_r_fit = -slope
    else:
        log_r_fit = log_r_tail
    return RadiusEstimate(
        r_hat=float(math.exp((log_r_tail + log_r_fit) / 2)),
        r_tail=math.exp(log_r_tail),
        r_fit=math.exp(log_r_fit),
        uncertainty=float(abs(log_r_tail - log_r_fit)),
    )


@njit(cache=True)
def _horner(beta, w):
    acc = 0j
    for k in range(len(beta) - 1, -1, -1):
        acc = acc * w + beta[k]
    return acc * w


def eval_psi(s: CoeffSequence, z: complex, r_hat: float | None = None) -> tuple[complex, bool]:
    """Partial sum of psi at z; the flag is set when the last term is not negligible."""
    if r_hat is None:
        r_hat = hadamard_radius(s).r_hat
    z = complex(z)
    if abs(z) >= r_hat:
        raise OutsideDisk(f"|z| = {abs(z):.6g} is not inside the disk of radius {r_hat:.6g}")
    if z == 0:
        return 0j, False
    w = z * math.exp(-s.log_scale)
    value = complex(_horner(s.scaled, w))
    last = s.log_abs()[-1] + s.N * math.log(abs(z))
    truncated = bool(np.isfinite(last) and last > math.log(1e-10) + math.log(abs(value)))
    return value, truncated
