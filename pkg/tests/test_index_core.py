from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from ppot.index_core import Theta, ceil_mul, dim, enumerate_index_set, floor_mul

thetas = st.builds(
    lambda q, p: Theta(p % (q + 1), q), st.integers(1, 60), st.integers(0, 10**6)
)


@pytest.mark.parametrize("N,theta,expected", [(5, "1/3", 2), (4, "1/2", 2), (7, "2/3", 5)])
def test_ceil_mul_examples(N, theta, expected):
    assert ceil_mul(N, Theta.parse(theta)) == expected


def test_theta_lowest_terms_and_bounds():
    t = Theta(2, 4)
    assert (t.p, t.q) == (1, 2)
    assert str(t) == "1/2"
    with pytest.raises(ValueError):
        Theta(3, 2)
    with pytest.raises(ValueError):
        Theta(1, 0)


@pytest.mark.parametrize("text,frac", [("1/3", Fraction(1, 3)), ("0.25", Fraction(1, 4)), ("1", Fraction(1)),
                                       ("0.000001", Fraction(1, 10**6))])
def test_theta_parse(text, frac):
    assert Theta.parse(text).fraction == frac


@pytest.mark.parametrize("text", ["0.0000001", "abc", "3/2", "-1/2", "1/0"])
def test_theta_parse_rejects(text):
    with pytest.raises(ValueError):
        Theta.parse(text)


def test_enumerate_examples():
    s = enumerate_index_set(5, "0", 1)
    assert list(s) == [(k,) for k in range(6)]
    s = enumerate_index_set(4, "1/2", 2)
    assert len(s) == 12
    assert all(2 <= sum(a) <= 4 for a in s)
    assert list(enumerate_index_set(3, "1", 1)) == [(3,)]


def test_graded_lex_order():
    s = enumerate_index_set(3, "1/3", 2)
    assert list(s)[:3] == [(0, 1), (1, 0), (0, 2)]
    keys = [(sum(a), a) for a in s]
    assert keys == sorted(keys)


def test_enumeration_matches_brute_force():
    for N, th, d in [(4, "1/2", 2), (6, "1/3", 3), (5, "2/5", 2)]:
        t = Theta.parse(th)
        brute = {a for a in product(range(N + 1), repeat=d) if ceil_mul(N, t) <= sum(a) <= N}
        assert set(enumerate_index_set(N, t, d)) == brute


@pytest.mark.parametrize("N,theta,d,expected", [(5, "1/3", 1, 4), (4, "1/2", 2, 12), (10, "0", 2, 66)])
def test_dim_examples(N, theta, d, expected):
    assert dim(N, theta, d) == expected
    assert len(enumerate_index_set(N, theta, d)) == expected


def test_zero_degree_is_constants():
    assert dim(0, "1/2") == 1
    assert list(enumerate_index_set(0, "3/4", 2)) == [(0, 0)]


@given(st.integers(0, 500), st.integers(0, 500), thetas)
def test_ceil_superadditive(I, J, t):
    assert ceil_mul(J, t) + ceil_mul(I, t) >= ceil_mul(J + I, t)


@given(st.integers(0, 10**6), thetas)
def test_ceil_and_floor_exact(N, t):
    exact = Fraction(N) * t.fraction
    assert ceil_mul(N, t) == -((-exact.numerator) // exact.denominator)
    assert floor_mul(N, t) == exact.numerator // exact.denominator
    assert ceil_mul(N, t) <= N


@given(st.integers(0, 40), st.integers(1, 3), thetas, thetas)
def test_dim_monotone_in_theta(N, d, a, b):
    lo, hi = sorted([a, b], key=lambda t: t.fraction)
    assert dim(N, hi, d) <= dim(N, lo, d)


@pytest.mark.parametrize("N", [50, 100, 200])
@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("theta", ["1/4", "1/2", "3/4"])
def test_dimension_ratio_limit(N, d, theta):
    ratio = dim(N, theta, d) / dim(N, "0", d)
    assert abs(ratio - (1 - float(Fraction(theta)) ** d)) <= 5 * d / N
