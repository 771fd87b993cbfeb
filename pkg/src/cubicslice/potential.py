"""Potentials of measures on the c-plane and the weak-* convergence experiment.

The kernel is l(z) = log|z| / (2 pi), so the potential u = mu * l of a measure
satisfies Laplacian(u) = mu and a measure of mass 2 pi has u(z) = log|z| + o(1)
at infinity.

For a rotation number theta of bounded type the Siegel potential is

    u_theta(c) = -log r(P_{lam,c}) + log|c| + log r(Q_lam),   lam = e^{2 pi i theta},

and for the convergents p_n/q_n the potentials of the parabolic measures
should approach it from below. ``convergence_table`` measures both the sup of
u_n - u_theta and a weak-* distance on a fixed dictionary of Gaussian bumps.
"""

from __future__ import annotations

import cmath
import functools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .family import CubicSlicePoint
from .grid import GridField, GridSpec
from .parabolic import DiracMeasure, parabolic_measure
from .rotation import RotationNumber, convergents
from .series import DEFAULT_N_NEUTRAL, hadamard_radius, linearize

TWO_PI = 2 * math.pi
MASK_LIMIT = 0.01
EXCISION_STEPS = 2.0
ASYMPTOTIC_BAND = 0.2


class MaskTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class PotentialValue:
    value: float
    uncertainty: float


@dataclass(frozen=True)
class ConvergenceRow:
    p: int
    q: int
    sup_gap: float
    weak_star_gap: float
    u_n_at_zero: float
    seconds: float


@dataclass(frozen=True)
class ConvergenceReport:
    rows: list[ConvergenceRow]
    siegel: GridField
    uncertainty: float = 0.0
    notes: dict = field(default_factory=dict)

    def row(self, q: int) -> ConvergenceRow:
        for r in self.rows:
            if r.q == q:
                return r
        raise KeyError(q)


# ---------------------------------------------------------------- potentials


def dirac_potential(m: DiracMeasure, z):
    """sum_i (w_i / 2 pi) log|z - c_i|; exactly -inf at an atom.

    The terms are sorted before summing, so the result does not depend on the
    order of the atoms.
    """
    pts = np.asarray(m.points, dtype=np.complex128)
    w = np.asarray(m.weights, dtype=float) / TWO_PI
    if np.ndim(z) == 0:
        with np.errstate(divide="ignore"):
            terms = w * np.log(np.abs(complex(z) - pts))
        if np.any(np.isneginf(terms)):
            return -math.inf
        return math.fsum(np.sort(terms))
    z = np.asarray(z, dtype=np.complex128)
    flat = z.ravel()
    out = np.empty(flat.shape)
    chunk = max(1, 2_000_000 // max(1, len(pts)))
    for s in range(0, len(flat), chunk):
        block = flat[s : s + chunk]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = w[None, :] * np.log(np.abs(block[:, None] - pts[None, :]))
        terms.sort(axis=1)
        out[s : s + chunk] = terms.sum(axis=1)
    return out.reshape(z.shape)


def _multiplier_of(theta: RotationNumber) -> complex:
    return cmath.exp(2j * math.pi * theta.value)


@functools.lru_cache(maxsize=64)
def _quadratic_log_radius(lam: complex, N: int) -> tuple[float, float]:
    est = hadamard_radius(linearize(-lam / 2, 0, lam, N))
    return math.log(est.r_hat), float(est.uncertainty)


def _cubic_log_radius(lam: complex, c: complex, N: int) -> tuple[float, float]:
    _, a2, a3 = CubicSlicePoint(lam, c).coefficients()
    est = hadamard_radius(linearize(a2, a3, lam, N))
    return math.log(est.r_hat), float(est.uncertainty)


def siegel_potential(theta: RotationNumber, c: complex, N: int = DEFAULT_N_NEUTRAL) -> PotentialValue:
    """u_theta(c) from the two series radii; the uncertainty adds their log spreads.

    At c = 0 the continuous extension u_theta(0) = 0 is returned.
    """
    c = complex(c)
    if c == 0:
        return PotentialValue(0.0, 0.0)
    lam = _multiplier_of(theta)
    log_rq, unc_q = _quadratic_log_radius(lam, int(N))
    log_rp, unc_p = _cubic_log_radius(lam, c, int(N))
    return PotentialValue(-log_rp + math.log(abs(c)) + log_rq, unc_p + unc_q)


def siegel_field(theta: RotationNumber, grid: GridSpec, N: int = DEFAULT_N_NEUTRAL, threads: int = 1):
    """u_theta and its uncertainty on every sample of ``grid``; rows run in parallel."""
    pts = grid.points()

    def row(i):
        vals = [siegel_potential(theta, c, N) for c in pts[i]]
        return [v.value for v in vals], [v.uncertainty for v in vals]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(row, range(grid.resolution)))
    values = np.array([r[0] for r in rows])
    unc = np.array([r[1] for r in rows])
    return grid.field(values), unc


# ---------------------------------------------------------------- grid measures


def _interior_masked_fraction(f: GridField) -> float:
    inner = f.mask[1:-1, 1:-1]
    return 1.0 - inner.mean() if inner.size else 0.0


def grid_mass(f: GridField) -> tuple[float, float]:
    """Total Laplacian mass of the field, from the 5-point stencil and from its growth at the edge.

    The sum of the 5-point stencil over all interior samples telescopes to the
    net flux through the grid edge, so it only involves the two outermost
    rings of samples. Masked interior samples (excised atoms) therefore do not
    enter the sum, while the mass they carry is still counted.

    The asymptotic estimator is 2 pi times the slope of the mean over circles
    around the grid centre against log radius, fitted over the outer 20% of
    the inscribed disk.
    """
    v = f.values
    ny, nx = v.shape
    if ny < 5 or nx < 5:
        raise ValueError("the grid must be at least 5 x 5")
    if _interior_masked_fraction(f) > MASK_LIMIT:
        raise MaskTooLarge(f"{100 * _interior_masked_fraction(f):.2f}% of interior samples are masked")
    ring = np.ones_like(f.mask)
    ring[2:-2, 2:-2] = False
    if not f.mask[ring].all():
        raise MaskTooLarge("masked samples in the two outermost rings")
    flux = np.concatenate(
        [
            v[1:-1, -1] - v[1:-1, -2],
            v[1:-1, 0] - v[1:-1, 1],
            v[-1, 1:-1] - v[-2, 1:-1],
            v[0, 1:-1] - v[1, 1:-1],
        ]
    )
    mass_laplacian = math.fsum(flux)
    return mass_laplacian, _asymptotic_mass(f)


def _bilinear(f: GridField, z: np.ndarray) -> np.ndarray:
    """Bilinear interpolation; NaN where any of the four neighbours is masked."""
    x = (z.real - f.origin.real) / f.step
    y = (z.imag - f.origin.imag) / f.step
    j = np.floor(x).astype(int)
    i = np.floor(y).astype(int)
    ny, nx = f.shape
    ok = (j >= 0) & (i >= 0) & (j < nx - 1) & (i < ny - 1)
    j = np.clip(j, 0, nx - 2)
    i = np.clip(i, 0, ny - 2)
    tx = x - j
    ty = y - i
    v, m = f.values, f.mask
    ok &= m[i, j] & m[i, j + 1] & m[i + 1, j] & m[i + 1, j + 1]
    with np.errstate(invalid="ignore"):
        val = (1 - ty) * ((1 - tx) * v[i, j] + tx * v[i, j + 1]) + ty * ((1 - tx) * v[i + 1, j] + tx * v[i + 1, j + 1])
    return np.where(ok, val, np.nan)


def _asymptotic_mass(f: GridField, n_radii: int = 16) -> float:
    ny, nx = f.shape
    outer = (min(nx, ny) - 1) / 2 * f.step - f.step
    radii = np.linspace((1 - ASYMPTOTIC_BAND) * outer, outer, n_radii)
    n_angles = max(256, 4 * max(nx, ny))
    angles = 2 * math.pi * (np.arange(n_angles) + 0.5) / n_angles
    ring = np.exp(1j * angles)
    means = []
    for rho in radii:
        vals = _bilinear(f, f.center + rho * ring)
        vals = vals[np.isfinite(vals)]
        if len(vals) < n_angles // 2:
            raise MaskTooLarge(f"circle of radius {rho:.4g} is mostly masked")
        means.append(float(np.mean(vals)))
    slope = np.polyfit(np.log(radii), np.array(means), 1)[0]
    return float(TWO_PI * slope)


def laplacian_measure(f: GridField) -> DiracMeasure:
    """Discrete measure with one atom per interior sample whose full stencil is valid.

    The weight is the raw 5-point stencil sum, i.e. (stencil / step^2) * step^2.
    """
    v, m = f.values, f.mask
    c = v[1:-1, 1:-1]
    full = m[1:-1, 1:-1] & m[2:, 1:-1] & m[:-2, 1:-1] & m[1:-1, 2:] & m[1:-1, :-2]
    with np.errstate(invalid="ignore"):
        stencil = v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2] - 4 * c
    pts = f.points()[1:-1, 1:-1][full]
    w = stencil[full]
    return DiracMeasure(points=pts, weights=w, total_mass=math.fsum(w))


# ---------------------------------------------------------------- weak-* distance


@dataclass(frozen=True)
class GaussianDictionary:
    """Test functions exp(-|z - z0|^2 / (2 sigma^2)) on a square lattice of centres z0.

    Distances computed with it are a metric on this finite dictionary, not the
    full weak-* topology.
    """

    centers: np.ndarray
    widths: tuple[float, ...]

    @classmethod
    def lattice(cls, half_width: float = 3.0, n: int = 13, widths=(0.15, 0.45)) -> "GaussianDictionary":
        xs = np.linspace(-half_width, half_width, n)
        centers = (xs[None, :] + 1j * xs[:, None]).ravel()
        return cls(centers=centers, widths=tuple(float(w) for w in widths))

    def __len__(self) -> int:
        return len(self.centers) * len(self.widths)

    @property
    def max_gradient(self) -> float:
        return math.exp(-0.5) / min(self.widths)

    def integrals(self, m: DiracMeasure) -> np.ndarray:
        pts = np.asarray(m.points, dtype=np.complex128)
        w = np.asarray(m.weights, dtype=float)
        d2 = np.abs(self.centers[:, None] - pts[None, :]) ** 2
        return np.concatenate([np.exp(-d2 / (2 * s * s)) @ w for s in self.widths])


DEFAULT_DICTIONARY = GaussianDictionary.lattice()


def _as_measure(x) -> DiracMeasure:
    if isinstance(x, GridField):
        return laplacian_measure(x)
    if isinstance(x, DiracMeasure):
        return x
    raise TypeError(f"expected a DiracMeasure or a GridField, got {type(x).__name__}")


def weak_star_gap(a, b, dictionary: GaussianDictionary | None = None) -> float:
    """max over the dictionary of |int phi d mu_a - int phi d mu_b|.

    A GridField argument stands for its discrete Laplacian measure.
    """
    d = DEFAULT_DICTIONARY if dictionary is None else dictionary
    return float(np.max(np.abs(d.integrals(_as_measure(a)) - d.integrals(_as_measure(b)))))


# ---------------------------------------------------------------- experiment


def atom_mask(grid: GridSpec, m: DiracMeasure, radius_steps: float = EXCISION_STEPS) -> np.ndarray:
    """True where the sample is farther than ``radius_steps`` grid steps from every atom."""
    pts = grid.points()
    keep = np.ones(pts.shape, dtype=bool)
    lim = radius_steps * grid.step
    for c in np.asarray(m.points):
        keep &= np.abs(pts - c) > lim
    return keep


def convergence_table(
    theta: RotationNumber,
    depth: int,
    grid: GridSpec,
    N: int = DEFAULT_N_NEUTRAL,
    seed: int = 0,
    threads: int = 1,
    dictionary: GaussianDictionary | None = None,
) -> ConvergenceReport:
    """Compare the parabolic potentials of the convergents with the Siegel potential on a grid."""
    conv = convergents(theta, depth)
    if conv[-1][1] > 144:
        raise ValueError(f"depth {depth} reaches q = {conv[-1][1]}; at most 144 is supported")
    t0 = time.perf_counter()
    siegel, unc = siegel_field(theta, grid, N, threads)
    siegel_seconds = time.perf_counter() - t0
    uncertainty = float(np.max(unc[siegel.mask])) if siegel.mask.any() else math.nan
    pts = grid.points()
    rows = []
    for p, q in sorted(conv, key=lambda pq: pq[1]):
        t = time.perf_counter()
        mu = parabolic_measure(p, q, seed=seed)
        u_n = dirac_potential(mu, pts)
        keep = siegel.mask & atom_mask(grid, mu)
        sup_gap = float(np.max((u_n - siegel.values)[keep])) if keep.any() else math.nan
        gap = weak_star_gap(mu, siegel, dictionary)
        rows.append(
            ConvergenceRow(
                p=p,
                q=q,
                sup_gap=sup_gap,
                weak_star_gap=gap,
                u_n_at_zero=float(dirac_potential(mu, 0)),
                seconds=time.perf_counter() - t,
            )
        )
    return ConvergenceReport(rows=rows, siegel=siegel, uncertainty=uncertainty, notes={"siegel_seconds": siegel_seconds})
