import math
from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from signed_ce.errors import QuadratureTolNotMet
from signed_ce.functions import Bump, Cutoff, Polynomial
from signed_ce.quadrature import (
    adaptive_simpson,
    gauss_adaptive,
    gauss_interval,
    gauss_legendre,
    gauss_region,
    integrate_poly_exact,
    newton_cotes_weights,
)
from signed_ce.rational import format_float, format_q, parse_q, to_q


def test_rational_helpers():
    assert format_q(Q(3, 6)) == "1/2"
    assert format_q(2) == "2/1"
    assert parse_q("-7/21") == Q(-1, 3)
    assert parse_q("0.25") == Q(1, 4)
    assert to_q("3/5") == Q(3, 5)
    assert format_float(0.1) == "0.10000000000000001"


def test_newton_cotes_small_cases():
    assert newton_cotes_weights(1) == (Q(1, 2), Q(1, 2))
    assert newton_cotes_weights(2) == (Q(1, 6), Q(2, 3), Q(1, 6))
    assert newton_cotes_weights(4) == (Q(7, 90), Q(16, 45), Q(2, 15), Q(16, 45), Q(7, 90))


@given(
    st.lists(st.fractions(-5, 5, max_denominator=9), min_size=1, max_size=8),
    st.fractions(-2, 2, max_denominator=7),
    st.fractions(-2, 2, max_denominator=7),
)
def test_exact_integration_of_polynomials(coeffs, a, b):
    def p(x):
        return sum(c * x**k for k, c in enumerate(coeffs))

    def antider(x):
        return sum(c * x ** (k + 1) / (k + 1) for k, c in enumerate(coeffs))

    assert integrate_poly_exact(p, a, b, len(coeffs) - 1) == antider(b) - antider(a)


def test_adaptive_simpson_known_integrals():
    assert adaptive_simpson(math.sin, 0, math.pi, 1e-12) == pytest.approx(2, abs=1e-11)
    assert adaptive_simpson(lambda x: 1 / x, 1, math.e, 1e-12) == pytest.approx(1, abs=1e-11)
    assert adaptive_simpson(math.exp, 1, 0, 1e-12) == pytest.approx(1 - math.e, abs=1e-11)


def test_adaptive_simpson_gives_up():
    with pytest.raises(QuadratureTolNotMet):
        adaptive_simpson(lambda x: 1 / math.sqrt(x) if x > 0 else 1e300, 0, 1, 1e-14, max_depth=10)


def test_gauss_rules():
    x, w = gauss_legendre(5)
    assert w.sum() == pytest.approx(1)
    assert np.all((x > 0) & (x < 1))
    assert gauss_interval(lambda t: t**9, 0, 2, 5) == pytest.approx(2**10 / 10)
    assert gauss_adaptive(np.cos, 0, 10, tol=1e-13) == pytest.approx(math.sin(10), abs=1e-12)
    # area of the triangle 0 <= v <= u on [0, 1]
    assert gauss_region(lambda U, V: np.ones_like(U), 0, 1, lambda u: 0 * u, lambda u: u) == pytest.approx(0.5)
    val = gauss_region(lambda U, V: U * V**2, 0, 1, lambda u: 0 * u, lambda u: 1 - u)
    assert val == pytest.approx(1 / 60)


def test_polynomial_exact_and_vectorised():
    p = Polynomial.from_dict({(2, 1): Q(1, 2), (0, 0): 3, (1, 0): 0}, 2)
    assert p.degree == 3
    assert p(Q(2), Q(3)) == Q(9)
    arr = p(np.array([2.0, 1.0]), np.array([3.0, 0.0]))
    assert arr.tolist() == [9.0, 3.0]
    assert p.diff(0)(Q(2), Q(3)) == 6
    assert p.grad(Q(1), Q(1)) == (1, Q(1, 2))
    assert Polynomial.constant(4, 3)(1, 2, 3) == 4


def test_cutoff():
    c = Cutoff.of(Q(1, 2), 1, 3, Q(7, 2))
    assert c.knots == (Q(1, 2), 1, 3, Q(7, 2))
    assert c(0) == 0 and c(Q(1, 2)) == 0 and c(2) == 1 and c(4) == 0
    assert c(Q(3, 4)) == Q(1, 2)
    # C^1 at every knot
    for k in c.knots:
        h = Q(1, 10**6)
        assert abs(c.deriv(k - h) - c.deriv(k + h)) < Q(1, 10**4)
        assert abs(c(k - h) - c(k + h)) < Q(1, 10**4)
    with pytest.raises(ValueError):
        Cutoff.of(1, 1, 2, 3)


def test_cutoff_derivative_matches_difference_quotient():
    c = Cutoff.of(0, 1, 2, 4)
    for t in (Q(1, 3), Q(5, 2), Q(7, 2), Q(3, 2)):
        h = Q(1, 10**8)
        assert abs((c(t + h) - c(t - h)) / (2 * h) - c.deriv(t)) < Q(1, 10**6)


def test_bump():
    b = Bump((0.0, 1.0), (1.0, 0.5), 2.0)
    assert b(0.0, 1.0) == pytest.approx(2.0)
    assert b(1.0, 1.0) == 0.0 and b(0.0, 1.6) == 0.0
    h = 1e-6
    gx, gy = b.grad(0.3, 1.1)
    assert gx == pytest.approx((b(0.3 + h, 1.1) - b(0.3 - h, 1.1)) / (2 * h), rel=1e-6)
    assert gy == pytest.approx((b(0.3, 1.1 + h) - b(0.3, 1.1 - h)) / (2 * h), rel=1e-6)
    assert b.sup() == 2.0
