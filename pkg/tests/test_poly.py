from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from newton_resolve.poly import (
    Polynomial,
    PolynomialSyntaxError,
    ResiduePoint,
    TruncatedSeries,
    compose_linear,
    compose_monomial,
    derivative,
    eval_exact,
    eval_mod,
    format_polynomial,
    parse_polynomial,
    prescale,
    substitute,
)


def P(text, n=2):
    return parse_polynomial(text, n)


def test_parse_and_print_canonical():
    assert format_polynomial(P("3*x1^2*x2 - 1/2*x2^5")) == "-1/2*x2^5 + 3*x1^2*x2"
    assert format_polynomial(P("(x1^2*(1+x2))^3")) == "x1^6*x2^3 + 3*x1^6*x2^2 + 3*x1^6*x2 + x1^6"
    assert format_polynomial(P("0")) == "0"
    assert format_polynomial(P("x1 - x1")) == "0"


def test_optional_star_after_coefficient():
    assert P("2x1 - 1/3x2^2") == P("2*x1 - 1/3*x2^2")


def test_round_trip():
    f = P("-2/3*x1^3*x2 + x2^4 - 7 + x1")
    assert P(format_polynomial(f)) == f


@pytest.mark.parametrize("text", ["x1^", "x3", "x1**2", "x1^-1", "x1 +", "1/0", "x0"])
def test_parse_errors_carry_position(text):
    with pytest.raises(PolynomialSyntaxError) as exc:
        parse_polynomial(text, 2)
    assert exc.value.position >= 0


def test_truncated_series_product():
    a = TruncatedSeries(P("x1 + x2"), 3)
    b = TruncatedSeries(P("x1 - x2 + x1^2"), 3)
    prod = (a * b).poly
    assert prod == P("x1^2 - x2^2")


def test_truncated_series_prints_order():
    s = TruncatedSeries(P("x2^2 - 1/4*x1^2 + x1^3"), 3)
    assert str(s) == "-1/4*x1^2 + x2^2 + O(3)"


def test_derivative_and_eval():
    f = P("x1^3*x2 + 2*x2^2")
    assert derivative(f, 1) == P("3*x1^2*x2")
    assert derivative(f, 2, 2) == P("4")
    assert eval_exact(f, [Fraction(1, 2), 3]) == Fraction(3, 8) + 18


def test_eval_mod():
    f = P("x1^2 + x2^3")
    assert eval_mod(f, ResiduePoint((9, 0), 3, 3)) == 81 % 27
    assert eval_mod(P("x1^2", 1), ResiduePoint((9,), 3, 3)) == 0
    with pytest.raises(ValueError):
        eval_mod(P("x1/3", 1), ResiduePoint((1,), 3, 2))


def test_compose_monomial_rule():
    f = P("x1^2 + x2^3")
    g = compose_monomial(f, ((1, 3), (0, 2)))
    assert g == P("x1^2*x2^6 + x2^6")


def test_compose_linear_and_prescale():
    f = P("x1*x2")
    assert compose_linear(f, ((1, 1), (0, 1))) == P("x1*x2 + x2^2")
    assert prescale(P("x1^2 + x2^3"), 3, (3, 2)) == P("729*x1^2 + 729*x2^3")


coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
polys = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coeffs, max_size=5).map(lambda d: Polynomial(2, d))
points = st.tuples(st.fractions(-3, 3, max_denominator=5), st.fractions(-3, 3, max_denominator=5))


@settings(max_examples=60, deadline=None)
@given(polys, polys, points)
def test_arithmetic_matches_evaluation(f, g, x):
    assert eval_exact(f * g, x) == eval_exact(f, x) * eval_exact(g, x)
    assert eval_exact(f + g, x) == eval_exact(f, x) + eval_exact(g, x)
    assert f * g == g * f


@settings(max_examples=40, deadline=None)
@given(polys, polys, polys, points)
def test_substitution_matches_evaluation(f, g1, g2, x):
    h = substitute(f, [g1, g2])
    assert eval_exact(h, x) == eval_exact(f, [eval_exact(g1, x), eval_exact(g2, x)])


@settings(max_examples=40, deadline=None)
@given(polys)
def test_print_parse_round_trip(f):
    assert parse_polynomial(format_polynomial(f), 2) == f
