import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubicslice.rotation import (
    DepthExceeded,
    PrecisionExhausted,
    RationalRotation,
    RotationNumber,
    brjuno_sum,
    cf_expand,
    convergents,
    golden_mean,
    is_bounded_type,
    parse_theta,
)

quotients = st.lists(st.integers(1, 50), min_size=2, max_size=25)


def long_division_cf(num: int, den: int, depth: int) -> list[int]:
    """Euclid on integers: the continued fraction of num/den."""
    out = []
    while den and len(out) < depth + 1:
        a, r = divmod(num, den)
        out.append(a)
        num, den = den, r
    return out[1:]


def test_golden_convergents_are_fibonacci_ratios():
    got = convergents(golden_mean(), 8)
    assert got == [(1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13), (13, 21), (21, 34)]


def test_golden_convergent_error():
    theta = (math.sqrt(5) - 1) / 2
    for p, q in convergents(golden_mean(), 12):
        assert abs(theta - p / q) <= 1 / q**2


def test_depth_exceeded():
    with pytest.raises(DepthExceeded):
        convergents(RotationNumber((1, 2)), 3)


def test_third_terminates():
    r = cf_expand(1 / 3, 10)
    assert r.terminating and r.partial_quotients == (3,)
    assert convergents(r, 1)[-1] == (1, 3)


def test_half():
    assert cf_expand(0.5, 5).partial_quotients == (2,)


def test_golden_expansion():
    r = cf_expand((math.sqrt(5) - 1) / 2, 20)
    assert set(r.partial_quotients) == {1}


def test_pi_against_long_division():
    r = cf_expand(math.pi - 3, 8)
    x = Fraction(math.pi - 3)
    assert list(r.partial_quotients) == long_division_cf(x.numerator, x.denominator, 8)[:8]
    assert r.partial_quotients[:3] == (7, 15, 1)


def test_round_trip_value():
    x = 0.2718281828
    r = cf_expand(x, 12)
    _, q = convergents(r, len(r.partial_quotients))[-1]
    assert abs(r.exact_prefix_value() - Fraction(x)) <= Fraction(1, q * q)


def test_deep_expansion_warns_or_raises():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        with pytest.raises(PrecisionExhausted):
            cf_expand((math.sqrt(5) - 1) / 2, 60)
    assert any("unreliable" in str(w.message) for w in rec)


def test_brjuno_golden_increments_shrink():
    r = golden_mean()
    values = [brjuno_sum(r, d) for d in range(2, 21)]
    inc = [b - a for a, b in zip(values, values[1:])]
    assert all(x > 0 for x in inc)
    assert all(b < a for a, b in zip(inc, inc[1:]))
    assert math.isfinite(values[-1])


def test_brjuno_rejects_rational():
    with pytest.raises(RationalRotation):
        brjuno_sum(cf_expand(0.5, 4), 2)


def test_bounded_type():
    assert is_bounded_type(golden_mean(), 1)
    assert not is_bounded_type(RotationNumber((1, 5, 2)), 4)
    assert is_bounded_type(RotationNumber((1, 5, 2)), 5)


def test_parse_theta_forms():
    assert parse_theta("golden").partial_quotients == (1,) * 64
    assert parse_theta("cf:2,1,...", depth=6).partial_quotients == (2, 1, 1, 1, 1, 1)
    assert parse_theta("cf:3,4").partial_quotients == (3, 4)
    assert parse_theta("0.5").partial_quotients == (2,)


def test_partial_quotients_validated():
    with pytest.raises(ValueError):
        RotationNumber((1, 0, 2))


@settings(max_examples=100, deadline=None)
@given(quotients)
def test_convergent_invariants(pq):
    r = RotationNumber(tuple(pq))
    conv = convergents(r, len(pq))
    fib = [1, 1]
    while len(fib) < len(pq) + 2:
        fib.append(fib[-1] + fib[-2])
    theta = r.exact_prefix_value()
    prev_q = 0
    for k, (p, q) in enumerate(conv):
        assert math.gcd(p, q) == 1
        assert q > prev_q
        assert q >= fib[k + 1]
        prev_q = q
    signs = [(Fraction(p, q) > theta) - (Fraction(p, q) < theta) for p, q in conv[:-1]]
    assert all(a == -b for a, b in zip(signs, signs[1:]))
