import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppot.geometry_measure import Circle, Disk, build_mesh, gaussian_weight
from ppot.index_core import Theta, ceil_mul
from ppot.poly_core import (
    MultiPolynomial,
    evaluate,
    is_incomplete,
    log_abs,
    loads,
    multiply,
    split_incomplete,
    sup_norm_on_mesh,
)

P1 = MultiPolynomial.from_univariate


def test_evaluate_examples():
    assert evaluate(MultiPolynomial.monomial((2,)), 2) == 4
    P = MultiPolynomial(2, {(0, 0): 1, (1, 1): 1})
    assert evaluate(P, [1, 3]) == 4
    assert evaluate(P1([-1, 0, 2]), 2) == 7


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(MultiPolynomial(2, {(1, 0): 1}), np.ones((3, 3)))


def test_canonical_form():
    P = MultiPolynomial(1, {(0,): 0, (1,): 1e-301, (2,): 3})
    assert P.coeffs == {(2,): 3}
    assert MultiPolynomial(1, {}).is_zero
    assert (P1([1, 1]) - P1([1, 1])).is_zero


def test_multiply_examples():
    z2, z3 = MultiPolynomial.monomial((2,)), MultiPolynomial.monomial((3,))
    assert multiply(z2, z3).coeffs == {(5,): 1}
    P = P1([0, 0, 1, 1])
    Q = MultiPolynomial.monomial((1,))
    PQ = multiply(P, Q)
    assert PQ.coeffs == {(3,): 1, (4,): 1}
    assert is_incomplete(PQ, 5, "1/2")
    assert multiply(MultiPolynomial(1, {}), P).is_zero


def test_is_incomplete_examples():
    assert is_incomplete(MultiPolynomial.monomial((3,)), 3, "1")
    assert not is_incomplete(P1([1, 1]), 3, "1/2")
    assert is_incomplete(P1([0, 0, 1, 1]), 3, "1/2")
    assert is_incomplete(MultiPolynomial(1, {}), 3, "1")


def test_split_examples():
    low, tail = split_incomplete(P1([1, 1, 0, 1]), 3, "1/2")
    assert low.coeffs == {(0,): 1, (1,): 1} and tail.coeffs == {(3,): 1}
    P = MultiPolynomial.monomial((4,), 2.5)
    low, tail = split_incomplete(P, 4, "3/4")
    assert low.is_zero and tail.coeffs == P.coeffs
    low, tail = split_incomplete(P1([1] * 5), 4, "1/2")
    assert set(low.coeffs) == {(0,), (1,), (2,)} and set(tail.coeffs) == {(3,), (4,)}


def test_sup_norm_examples():
    z = MultiPolynomial.monomial((1,))
    s = sup_norm_on_mesh(z, np.array([-1, -0.5, 0.5, 1]))
    assert s.value == 1 and abs(s.argmax[0]) == 1
    s = sup_norm_on_mesh(MultiPolynomial.monomial((2,)), build_mesh(Circle(1), 32))
    assert s.value == pytest.approx(1, abs=1e-14)
    s = sup_norm_on_mesh(z, build_mesh(Disk(2), 801), gaussian_weight(), 1)
    assert s.value == pytest.approx(math.exp(-0.5) / math.sqrt(2), abs=1e-5)
    assert abs(abs(s.argmax[0]) - 1 / math.sqrt(2)) < 2e-3


def test_sup_norm_errors():
    with pytest.raises(ValueError):
        sup_norm_on_mesh(P1([1]), np.zeros((0, 1)))
    with pytest.raises(ValueError):
        sup_norm_on_mesh(P1([1]), np.ones(3), gaussian_weight())


def test_log_abs_scaled_path():
    P = MultiPolynomial.monomial((600,))
    val = log_abs(P, np.array([[10.0 + 0j]]))[0]
    assert val == pytest.approx(600 * math.log(10), rel=1e-13)


def test_serialization_round_trip_bit_exact():
    P = MultiPolynomial(2, {(0, 1): 1 / 3 + 2j / 7, (2, 0): -math.pi, (1, 1): 1e-200})
    Q, N, theta = loads(P.to_text(N=3, theta="1/3"))
    assert Q.coeffs == P.coeffs and N == 3 and theta == Theta(1, 3)


# random polynomials inside a band


def band_poly(draw, N, theta, d=1):
    lo = ceil_mul(N, theta)
    coeffs = {}
    for m in range(lo, N + 1):
        if d == 1:
            alphas = [(m,)]
        else:
            alphas = [(k, m - k) for k in range(m + 1)]
        for a in alphas:
            if draw(st.booleans()):
                coeffs[a] = complex(draw(st.floats(-3, 3)), draw(st.floats(-3, 3)))
    return MultiPolynomial(d, coeffs)


thetas = st.builds(lambda q, p: Theta(p % (q + 1), q), st.integers(1, 12), st.integers(0, 100))


@settings(max_examples=60, deadline=None)
@given(st.data(), st.integers(0, 12), st.integers(0, 12), thetas, st.sampled_from([1, 2]))
def test_incomplete_closure(data, J, I, theta, d):
    P = band_poly(data.draw, J, theta, d)
    Q = band_poly(data.draw, I, theta, d)
    assert is_incomplete(multiply(P, Q), J + I, theta)


@settings(max_examples=60, deadline=None)
@given(st.data(), st.integers(1, 15), st.integers(1, 15))
def test_degree_and_valuation_add(data, J, I):
    P = band_poly(data.draw, J, Theta(0))
    Q = band_poly(data.draw, I, Theta(0))
    if P.is_zero or Q.is_zero:
        return
    PQ = multiply(P, Q)
    assert PQ.degree == P.degree + Q.degree
    assert PQ.valuation == P.valuation + Q.valuation


@settings(max_examples=60, deadline=None)
@given(st.data(), st.integers(0, 15), st.integers(0, 15), st.floats(0, 4), st.floats(0, 2 * math.pi))
def test_product_evaluation_consistency(data, J, I, r, t):
    P = band_poly(data.draw, J, Theta(0))
    Q = band_poly(data.draw, I, Theta(0))
    z = r * complex(math.cos(t), math.sin(t))
    lhs = evaluate(multiply(P, Q), z)
    rhs = evaluate(P, z) * evaluate(Q, z)
    scale = sum(abs(c) * r ** sum(a) for a, c in multiply(P, Q).coeffs.items()) or 1.0
    # relative to the absolute coefficient sum, which bounds cancellation
    assert abs(lhs - rhs) <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(st.data(), st.integers(0, 15), thetas)
def test_split_reconstruction(data, N, theta):
    P = band_poly(data.draw, N, Theta(0))
    low, tail = split_incomplete(P, N, theta)
    assert (low + tail).coeffs == P.coeffs
    assert is_incomplete(tail, N, theta)
