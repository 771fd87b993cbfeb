import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicslice.family import CubicSlicePoint
from cubicslice.grid import GridSpec
from cubicslice.parabolic import DiracMeasure, asymptotic_size, parabolic_measure, quadratic_c
from cubicslice.potential import (
    GaussianDictionary,
    MaskTooLarge,
    atom_mask,
    convergence_table,
    dirac_potential,
    grid_mass,
    laplacian_measure,
    siegel_potential,
    weak_star_gap,
)
from cubicslice.rotation import convergents, golden_mean
from cubicslice.series import hadamard_radius, linearize

from oracles import naive_dirac_potential

TWO_PI = 2 * math.pi
GOLDEN = golden_mean()


def test_single_atom_potential():
    m = parabolic_measure(0, 1)
    for c in (2 + 1j, -0.3j, 5.0):
        assert abs(dirac_potential(m, c) - math.log(abs(c + 1))) < 1e-14


def test_potential_vanishes_at_zero():
    for p, q in convergents(GOLDEN, 10):
        assert abs(dirac_potential(parabolic_measure(p, q), 0)) < 1e-8


def test_potential_grows_like_log():
    m = parabolic_measure(5, 13)
    for R in (1e3, 1e6):
        z = R * cmath.exp(0.3j)
        assert abs(dirac_potential(m, z) - math.log(R)) < 3 / R


def test_minus_infinity_at_atoms():
    m = parabolic_measure(2, 5)
    assert dirac_potential(m, m.points[2]) == -math.inf
    assert dirac_potential(m, m.points[:2])[0] == -math.inf


def test_matches_naive_sum():
    m = parabolic_measure(3, 8)
    for z in (0.3 + 0.1j, -2.0, 4j):
        assert abs(dirac_potential(m, z) - naive_dirac_potential(m.points, m.weights, z)) < 1e-13


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(range(13))), st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_permutation_invariance(perm, z):
    m = parabolic_measure(5, 13)
    m2 = DiracMeasure(m.points[list(perm)], m.weights[list(perm)], m.total_mass)
    a, b = dirac_potential(m, z), dirac_potential(m2, z)
    assert a == b
    grid = np.array([z, z + 1, z - 1j])
    assert dirac_potential(m, grid).tobytes() == dirac_potential(m2, grid).tobytes()


def test_siegel_potential_limit_at_zero():
    v = siegel_potential(GOLDEN, 1e-3 * cmath.exp(0.7j), N=8192)
    assert abs(v.value) < max(3 * v.uncertainty, 2e-3)


def test_siegel_potential_symmetry():
    for c in (2.5 + 1j, -0.4 + 0.3j):
        a = siegel_potential(GOLDEN, c, N=8192)
        b = siegel_potential(GOLDEN, 1 / c, N=8192)
        assert abs(a.value - (b.value + math.log(abs(c)))) < 3 * (a.uncertainty + b.uncertainty) + 1e-3


def test_siegel_potential_reproducible():
    a = siegel_potential(GOLDEN, 5)
    b = siegel_potential(GOLDEN, 5)
    assert a == b
    assert a.uncertainty < 0.02


def test_grid_mass_of_log():
    g = GridSpec(0.2 - 0.1j, 4, 200)
    f = g.field(np.log(np.abs(g.points() - (0.7 + 0.4j))))
    ml, ma = grid_mass(f)
    assert abs(ml / TWO_PI - 1) < 0.02 and abs(ma / TWO_PI - 1) < 0.02


def test_grid_mass_of_zero_field():
    g = GridSpec(0, 1, 32)
    assert grid_mass(g.field(np.zeros((32, 32)))) == (0.0, 0.0)


def test_grid_mass_of_parabolic_potential():
    g = GridSpec(0, 4, 256)
    m = parabolic_measure(1, 2)
    f = g.field(dirac_potential(m, g.points())).with_mask(atom_mask(g, m))
    ml, ma = grid_mass(f)
    assert abs(ml / TWO_PI - 1) < 0.02 and abs(ma / TWO_PI - 1) < 0.02
    assert abs(ml - ma) < 0.03 * TWO_PI


def test_grid_mass_rejects_large_masks():
    g = GridSpec(0, 4, 64)
    mask = np.abs(g.points()) > 1
    with pytest.raises(MaskTooLarge):
        grid_mass(g.field(np.log(np.abs(g.points())), mask))


def test_laplacian_measure_mass_away_from_mask():
    g = GridSpec(0, 3, 120)
    pts = g.points()
    vals = np.exp(-4 * np.abs(pts) ** 2)
    m = laplacian_measure(g.field(vals))
    assert abs(m.total_mass) < 1e-3


def test_weak_star_gap_identity():
    m = parabolic_measure(3, 8)
    assert weak_star_gap(m, m) == 0


def test_weak_star_gap_lipschitz():
    d = GaussianDictionary.lattice()
    c0 = 0.4 + 0.3j
    for eps in (1e-3, 1e-2, 0.1):
        a = DiracMeasure(np.array([c0]), np.array([1.0]), 1.0)
        b = DiracMeasure(np.array([c0 + eps]), np.array([1.0]), 1.0)
        assert weak_star_gap(a, b, d) <= eps * d.max_gradient


def test_weak_star_gap_golden_trend():
    conv = convergents(GOLDEN, 10)
    gaps = [
        weak_star_gap(parabolic_measure(*conv[k]), parabolic_measure(*conv[k + 1]))
        for k in range(2, len(conv) - 1)
    ]
    assert gaps[-1] < gaps[0]
    assert sum(b < a for a, b in zip(gaps, gaps[1:])) >= len(gaps) // 2


def test_weak_star_accepts_grid_fields():
    g = GridSpec(0, 3, 64)
    m = parabolic_measure(1, 2)
    f = g.field(dirac_potential(m, g.points()))
    assert weak_star_gap(f, laplacian_measure(f)) == 0


def test_convergence_table_small():
    rep = convergence_table(GOLDEN, 6, GridSpec(0, 3, 17), N=1024)
    qs = [r.q for r in rep.rows]
    assert qs == sorted(qs) == [1, 2, 3, 5, 8, 13]
    assert all(abs(r.u_n_at_zero) < 1e-8 for r in rep.rows)
    assert rep.rows[-1].sup_gap < rep.rows[1].sup_gap


def test_convergence_table_depth_limit():
    with pytest.raises(ValueError):
        convergence_table(GOLDEN, 12, GridSpec(0, 3, 16), N=256)


def test_representation_formula():
    # -log L(c) + log L(Q) + log|c| - u_{p/q}(c) vanishes identically
    p, q = 13, 34
    mu = parabolic_measure(p, q)
    LQ = abs(quadratic_c(p, q)) ** (-1 / q)
    rng = np.random.default_rng(5)
    for c in 1.5 * (rng.normal(size=10) + 1j * rng.normal(size=10)):
        L = asymptotic_size(p, q, c).L
        assert abs(-math.log(L) + math.log(LQ) + math.log(abs(c)) - dirac_potential(mu, c)) < 1e-8


def test_parabolic_sizes_bounded_by_siegel_radius():
    c = 3.0
    lam = cmath.exp(2j * math.pi * GOLDEN.value)
    _, a2, a3 = CubicSlicePoint(lam, c).coefficients()
    r_theta = hadamard_radius(linearize(a2, a3, lam, 16384)).r_hat
    for p, q in convergents(GOLDEN, 10)[-3:]:
        C = asymptotic_size(p, q, c).C
        assert abs(C) ** (1 / q) <= 1 / r_theta + 0.05
