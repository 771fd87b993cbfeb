"""The fifteen acceptance criteria, each at its stated tolerance.

Every criterion records one "criterion N: PASS|FAIL ..." line; the lines are
printed in the pytest terminal summary, and running this file directly
(``python3 tests/test_acceptance.py``) prints them without pytest.
"""

import cmath
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from PIL import Image

from cubicslice.attracting import OrbitTag, classify_orbit, phi, quadratic_radius, radius_attracting, zcurve
from cubicslice.cli import main as cli_main
from cubicslice.family import CubicSlicePoint, eval_cubic, quadratic_like_bound
from cubicslice.grid import GridSpec
from cubicslice.parabolic import cq_poly, cq_roots, parabolic_measure, quadratic_c
from cubicslice.potential import convergence_table, grid_mass
from cubicslice.render import PALETTE, heightfield, read_sidecar
from cubicslice.rotation import convergents, golden_mean
from cubicslice.series import CoeffSequence, hadamard_radius

sys.path.insert(0, str(Path(__file__).parent))
from oracles import mp_compose_coefficient, sympy_cq  # noqa: E402

LAM = 0.4j
GOLDEN = [(p, q) for p, q in convergents(golden_mean(), 10)]
QS = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]

LINES: dict[int, str] = {}


def _record(n: int, ok: bool, detail: str) -> bool:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    LINES[n] = line
    print(line)
    return ok


def _polys():
    if not hasattr(_polys, "cache"):
        _polys.cache = {q: cq_poly(p, q) for p, q in GOLDEN}
    return _polys.cache


def _roots():
    if not hasattr(_roots, "cache"):
        _roots.cache = {q: cq_roots(poly) for q, poly in _polys().items()}
    return _roots.cache


def criterion_1():
    parabolic_measure(0, 1)  # compile once; the runtime bound is about the computation
    t = time.perf_counter()
    worst = 0.0
    counts_ok = True
    for p, q in GOLDEN:
        m = parabolic_measure(p, q)
        counts_ok &= len(m.points) == q and bool(np.all(m.weights == 2 * math.pi / q))
        worst = max(worst, abs(m.total_mass - 2 * math.pi))
    seconds = time.perf_counter() - t
    ok = counts_ok and worst <= 4 * np.spacing(2 * math.pi) and seconds < 5 and [q for _, q in GOLDEN] == QS
    return _record(1, ok, f"atoms and weights {'ok' if counts_ok else 'wrong'}, |mass - 2pi| = {worst:.2e}, {seconds:.2f} s")


def criterion_2():
    worst = max(poly.palindrome_defect() for poly in _polys().values())
    return _record(2, worst < 1e-10, f"max palindrome defect {worst:.2e} (< 1e-10)")


def criterion_3():
    worst = 0.0
    for u in _roots().values():
        d = np.abs(u[:, None] - 1 / u[None, :])
        worst = max(worst, d.min(axis=0).max(), d.min(axis=1).max())
    return _record(3, worst < 1e-8, f"max Hausdorff distance {worst:.2e} (< 1e-8)")


def criterion_4():
    worst = max(abs(math.fsum(np.log(np.abs(1 / u)))) for u in _roots().values())
    return _record(4, worst < 1e-8, f"max |sum log|c_i|| {worst:.2e} (< 1e-8)")


def criterion_5():
    worst = oracle = 0.0
    for p, q in GOLDEN:
        lead = _polys()[q].leading
        ref = quadratic_c(p, q)
        worst = max(worst, abs(lead - ref) / abs(ref))
        # u = 0 turns the cubic into the quadratic, so brute composition gives C_0 independently
        brute = mp_compose_coefficient(p, q, 0)
        oracle = max(oracle, abs(ref - brute) / abs(brute))
    ok = worst < 1e-10 and oracle < 1e-10
    return _record(5, ok, f"max relative gap {worst:.2e}, quadratic_c against composition {oracle:.2e} (< 1e-10)")


def criterion_6():
    mods = np.concatenate([np.abs(1 / u) for u in _roots().values()])
    ok = mods.min() >= 1 / 40 and mods.max() <= 40
    return _record(6, ok, f"|c_i| in [{mods.min():.4g}, {mods.max():.4g}] (within [1/40, 40])")


def criterion_7():
    exact = {1: [-0.5, -0.5], 2: [-0.5, -1 / 3, -0.5]}
    worst = 0.0
    for (p, q), ref in zip([(0, 1), (1, 2)], [exact[1], exact[2]]):
        got = cq_poly(p, q).coeffs
        brute = [complex(c) for c in reversed(sympy_cq(q).all_coeffs())]
        worst = max(worst, np.max(np.abs(got - ref)), np.max(np.abs(np.array(brute) - ref)))
        for u in (0.7 - 0.2j, -1.5 + 2j):
            worst = max(worst, abs(cq_poly(p, q)(u) - mp_compose_coefficient(p, q, u)))
    return _record(7, worst < 1e-12, f"max deviation from the composed coefficients {worst:.2e} (< 1e-12)")


def criterion_8():
    t = time.perf_counter()
    rng = np.random.default_rng(8)
    worst_ratio = 0.0
    worst_gap = 0.0
    for _ in range(100):
        c = math.exp(rng.uniform(math.log(0.1), math.log(10))) * cmath.exp(2j * math.pi * rng.uniform())
        a = radius_attracting(CubicSlicePoint(LAM, c))
        b = radius_attracting(CubicSlicePoint(LAM, 1 / c))
        gap = abs(-math.log(a.r) + math.log(abs(c)) + math.log(b.r))
        tol = max(1e-2, 3 * (a.uncertainty + b.uncertainty))
        worst_ratio = max(worst_ratio, gap / tol)
        worst_gap = max(worst_gap, gap)
    seconds = time.perf_counter() - t
    ok = worst_ratio < 1 and seconds < 120
    return _record(8, ok, f"max gap {worst_gap:.2e}, worst gap/tolerance {worst_ratio:.3f}, {seconds:.1f} s")


def criterion_9():
    t = time.perf_counter()
    half = 1.25 * quadratic_like_bound(LAM)
    f, _ = heightfield(LAM, GridSpec(0, half, 512))
    ml, ma = grid_mass(f.map(lambda v: -v))
    seconds = time.perf_counter() - t
    target = 2 * math.pi
    ok = abs(ml / target - 1) < 0.05 and abs(ma / target - 1) < 0.05 and seconds < 600
    return _record(9, ok, f"stencil mass {ml:.6f}, asymptotic mass {ma:.6f} (2pi = {target:.6f}), {seconds:.1f} s")


def criterion_10():
    worst = 0.0
    for lam in (0.4j, 0.8j, 0.5):
        rq = quadratic_radius(lam).r_hat
        rp = radius_attracting(CubicSlicePoint(lam, 1e4)).r
        worst = max(worst, abs(rp - rq) / rq)
    return _record(10, worst < 1e-2, f"max relative gap {worst:.2e} (< 1e-2)")


def criterion_11():
    t = time.perf_counter()
    pts = zcurve(LAM, n_rays=256)
    seconds = time.perf_counter() - t
    c = np.array([p.c for p in pts])
    psi = np.array([p.psi for p in pts])
    mod = np.max(np.abs(np.abs(psi) - 1))
    ends = []
    for target in (1, -1):
        k = np.argmin(np.abs(c - target))
        ends.append(max(abs(c[k] - target), abs(psi[k] - target)))
    d = np.abs(c[:, None] - 1 / c[None, :])
    sym = max(d.min(axis=0).max(), d.min(axis=1).max())
    ok = len(pts) == 256 and mod < 1e-3 and max(ends) < 1e-3 and sym < 1e-3 and seconds < 300
    return _record(
        11, ok, f"max ||psi|-1| {mod:.2e}, at c=+-1 {max(ends):.2e}, inversion {sym:.2e}, {seconds:.1f} s"
    )


def criterion_12():
    t = time.perf_counter()
    rep = convergence_table(golden_mean(), 10, GridSpec(0, 3, 21), N=16384)
    seconds = time.perf_counter() - t
    s2, s89 = rep.row(2).sup_gap, rep.row(89).sup_gap
    w5, w89 = rep.row(5).weak_star_gap, rep.row(89).weak_star_gap
    bound = 0.1 + 3 * rep.uncertainty
    ok = s89 < s2 and s89 < bound and w89 < w5 / 2 and seconds < 1800
    return _record(
        12,
        ok,
        f"sup gap q=2 {s2:.4f} -> q=89 {s89:.4f} (bound {bound:.4f}); "
        f"weak-* gap q=5 {w5:.4f} -> q=89 {w89:.4f}; {seconds:.1f} s",
    )


def criterion_13():
    n = np.arange(1, 1025)
    worst = 0.0
    for rho in (0.1, 1, 2, 10):
        est = hadamard_radius(CoeffSequence.from_log_abs(-n * math.log(rho)))
        worst = max(worst, abs(est.r_hat - rho))
    return _record(13, worst < 1e-6, f"max |r - rho| {worst:.2e} (< 1e-6)")


def criterion_14():
    p = CubicSlicePoint(LAM, 2)
    rng = np.random.default_rng(14)
    worst = 0.0
    k = 0
    while k < 100:
        z = complex(*rng.uniform(-3, 3, 2))
        if classify_orbit(p, z).tag is not OrbitTag.ATTRACTED_TO_ZERO:
            continue
        k += 1
        a = phi(p, z).value
        worst = max(worst, abs(phi(p, eval_cubic(p, z)).value - LAM * a) / max(1.0, abs(a)))
    return _record(14, worst < 1e-8, f"max residual {worst:.2e} on 100 basin points (< 1e-8)")


def criterion_15():
    with tempfile.TemporaryDirectory() as tmp:
        rc = cli_main(["slice", "--lambda=0+0.4i", "--center=0", "--half-width=8", "--res=1024", f"--out={tmp}"])
        if rc != 0:
            return _record(15, False, f"slice exited with {rc}")
        head, raw = read_sidecar(Path(tmp) / "slice.slcf")
        pixels = np.asarray(Image.open(Path(tmp) / "slice.png").convert("RGB"))
    g = GridSpec(head["center"], head["half_width"], head["width"])
    raw = raw.astype(int)
    s1, sc = raw // 3, raw % 3
    pts = g.points()
    rng = np.random.default_rng(15)
    agree = n = 0
    while n < 1000:
        i, j = rng.integers(0, g.resolution, 2)
        c = pts[i, j]
        # sample inside the unit disk so that 1/c lands in the window and pixel offsets contract
        if not 1 / g.half_width < abs(c) < 1:
            continue
        w = 1 / c
        jj = int(math.floor((w.real - g.origin.real) / g.step + 0.5))
        ii = int(math.floor((w.imag - g.origin.imag) / g.step + 0.5))
        n += 1
        agree += s1[i, j] == sc[ii, jj] and sc[i, j] == s1[ii, jj]
    rate = agree / n
    top_first = pts[::-1]
    red = np.all(pixels == PALETTE["locus_outer"][:3], axis=-1)
    blue = np.all(pixels == PALETTE["locus_inner"][:3], axis=-1)
    r_red = float(np.median(np.abs(top_first[red]))) if red.any() else math.nan
    r_blue = float(np.median(np.abs(top_first[blue]))) if blue.any() else math.nan
    ok = rate >= 0.99 and r_red > 1 and r_blue < 1
    return _record(15, ok, f"swap agreement {rate:.1%} on {n} pairs; median |c| red {r_red:.3g}, blue {r_blue:.3g}")


CRITERIA = [globals()[f"criterion_{k}"] for k in range(1, 16)]


def test_criterion_1():
    assert criterion_1()


def test_criterion_2():
    assert criterion_2()


def test_criterion_3():
    assert criterion_3()


def test_criterion_4():
    assert criterion_4()


def test_criterion_5():
    assert criterion_5()


def test_criterion_6():
    assert criterion_6()


def test_criterion_7():
    assert criterion_7()


def test_criterion_8():
    assert criterion_8()


def test_criterion_9():
    assert criterion_9()


def test_criterion_10():
    assert criterion_10()


def test_criterion_11():
    assert criterion_11()


def test_criterion_12():
    assert criterion_12()


def test_criterion_13():
    assert criterion_13()


def test_criterion_14():
    assert criterion_14()


def test_criterion_15():
    assert criterion_15()


if __name__ == "__main__":
    results = [fn() for fn in CRITERIA]
    sys.exit(0 if all(results) else 1)
