import time
from fractions import Fraction

import pytest

import oracles
from newton_resolve.geometry import (
    central_face,
    face_polynomial,
    face_zero_order,
    newton_distance,
    newton_polyhedron,
    predict_growth,
)
from newton_resolve.poly import parse_polynomial

# (text, nvars, d, k, case, s) frozen from oracles.classify
BATTERY = [
    ("x1^2+x2^3", 2, Fraction(6, 5), 1, "a", None),
    ("x1*x2", 2, Fraction(1), 0, "a", None),
    ("x1^2*x2^2", 2, Fraction(2), 0, "a", None),
    ("x1^2*x2+x1*x2^3", 2, Fraction(5, 3), 1, "a", None),
    ("x1^2-2*x1*x2+x2^2", 2, Fraction(1), 1, "c", 2),
    ("x1^3", 2, Fraction(3), 1, "a", None),
    ("x2^2-x1^3", 2, Fraction(6, 5), 1, "a", None),
    ("x1*x2*(x1+x2)", 2, Fraction(3, 2), 1, "a", None),
    ("x1^2+x2^2+x3^3", 3, Fraction(3, 4), 2, "c", 1),
    ("x1*x2*x3", 3, Fraction(1), 0, "a", None),
]


@pytest.mark.parametrize("text,n,d,k,case,s", BATTERY)
def test_frozen_table_matches_oracle(text, n, d, k, case, s):
    assert oracles.classify(parse_polynomial(text, n)) == (d, k, case, s)


@pytest.mark.parametrize("text,n,d,k,case,s", BATTERY)
def test_battery(text, n, d, k, case, s):
    f = parse_polynomial(text, n)
    N = newton_polyhedron(f)
    assert newton_distance(N) == d
    assert central_face(N)[1] == k
    pred = predict_growth(f, "real")
    assert pred.case == case
    assert pred.s == s


def test_battery_runtime():
    t = time.perf_counter()
    for text, n, *_ in BATTERY:
        predict_growth(parse_polynomial(text, n), "real")
    assert time.perf_counter() - t < 5


def test_cusp_polyhedron():
    N = newton_polyhedron(parse_polynomial("x1^2+x2^3", 2))
    assert sorted(N.vertices) == [(0, 3), (2, 0)]
    normals = sorted((F.normal, F.offset) for F in N.facets)
    assert normals == [((0, 1), 0), ((1, 0), 0), ((3, 2), 6)]
    assert len(N.compact_faces) == 3


def test_dominated_points_are_pruned():
    N = newton_polyhedron(parse_polynomial("x1^3 + x2^3 + x1*x2 + x1^2*x2^2 + x1^2*x2", 2))
    assert sorted(N.vertices) == [(0, 3), (1, 1), (3, 0)]
    N = newton_polyhedron(parse_polynomial("x1^2 + x2^2 + x1*x2", 2))
    assert sorted(N.vertices) == [(0, 2), (2, 0)]


def test_face_polynomial_of_edge():
    f = parse_polynomial("x1^2+x2^3+x1*x2^2", 2)
    N = newton_polyhedron(f)
    edge = [F for F in N.compact_faces if F.dim == 1][0]
    assert face_polynomial(f, edge, N) == parse_polynomial("x1^2+x2^3", 2)


@pytest.mark.parametrize("text,field,expected", [
    ("x1^2-2*x1*x2+x2^2", "real", 2),
    ("x1^2+x2^2", "real", 0),
    ("x1^2+x2^2", "complex", 1),
    ("x1^2-x2^3", "real", 1),
    ("(x1-x2)^3*(x1+x2)", "real", 3),
])
def test_zero_order_on_edges(text, field, expected):
    fF = parse_polynomial(text, 2)
    assert face_zero_order(fF, field=field)[0] == expected


def test_padic_zero_order_needs_square_root():
    # x1^2 - 2 x2^2 has torus zeros over Q_7 (2 is a square mod 7) but not over Q_5
    fF = parse_polynomial("x1^2-2*x2^2", 2)
    assert face_zero_order(fF, field="padic", p=7)[0] == 1
    assert face_zero_order(fF, field="padic", p=5)[0] == 0


def test_user_override():
    fF = parse_polynomial("x1^2+x2^3", 2)
    assert face_zero_order(fF, method="user_override", value=1) == (1, "override")


def test_prediction_exponents():
    pred = predict_growth(parse_polynomial("x1*x2", 2), "complex")
    assert pred.decay == 2 and pred.log_power == 1
    pred = predict_growth(parse_polynomial("x1^2+x2^3", 2), "real")
    assert pred.decay == Fraction(5, 6) and pred.log_power == 0


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        predict_growth(parse_polynomial("1+x1", 1))
    with pytest.raises(ValueError):
        newton_polyhedron(parse_polynomial("0", 2))
