import random
from fractions import Fraction

import pytest

from newton_resolve.fan import (
    Cone,
    MonomialMap,
    chart_atlas,
    check_atlas_distance,
    check_factorization,
    triangulate,
    unit_certificate,
)
from newton_resolve.poly import parse_polynomial
from test_geometry import BATTERY


@pytest.mark.parametrize("text,n", [(b[0], b[1]) for b in BATTERY])
def test_atlas_exponent_relations(text, n):
    rep = check_atlas_distance(parse_polynomial(text, n))
    assert rep["ok"], rep


@pytest.mark.parametrize("text,n", [(b[0], b[1]) for b in BATTERY])
def test_atlas_factorization_and_units(text, n):
    f = parse_polynomial(text, n)
    for i, chart in enumerate(chart_atlas(f)):
        assert check_factorization(f, chart)["ok"]
        assert unit_certificate(chart, 1000, 0.05, 100, seed=i)["ok"]


def test_cusp_atlas_shape():
    atlas = chart_atlas(parse_polynomial("x1^2+x2^3", 2))
    assert len(atlas) == 3
    rep = check_atlas_distance(parse_polynomial("x1^2+x2^3", 2), atlas)
    assert [c["equality_count"] for c in rep["charts"]] == [1, 1, 1]
    face = [c for c in atlas if c.i == 1][0]
    assert face.map.matrix == ((3, 1), (2, 0))
    assert face.unit == parse_polynomial("x2^2+1", 2)
    assert face.tail_center == (Fraction(1),)


def test_identity_chart_for_monomial():
    atlas = chart_atlas(parse_polynomial("x1*x2", 2))
    assert len(atlas) == 1
    assert atlas[0].map.matrix == ((1, 0), (0, 1))
    assert atlas[0].ratios() == [1, 1]


def test_tail_center_avoids_roots():
    atlas = chart_atlas(parse_polynomial("x1^2-2*x1*x2+x2^2", 2))
    face = [c for c in atlas if c.i == 1][0]
    assert face.tail_center == (Fraction(-1),)


def test_monomial_map():
    M = MonomialMap(((1, 3), (0, 2)))
    assert M.det == 2
    assert M.pullback_exponent((2, 0)) == (2, 6)
    assert M.jacobian_exponents() == (0, 4)
    assert M.apply([2, 3]) == [54, 9]
    with pytest.raises(ValueError):
        MonomialMap(((1, 2), (2, 4)))


def test_cone_validation():
    with pytest.raises(ValueError):
        Cone(((2, 0), (0, 1)))
    with pytest.raises(ValueError):
        Cone(((1, -1), (0, 1)))
    with pytest.raises(ValueError):
        Cone(((1, 1), (2, 2)))


def test_triangulation_covers_square_cone():
    cone = Cone(((1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)))
    parts = triangulate(cone)
    assert len(parts) == 2
    assert all(p.is_simplicial() for p in parts)
    rng = random.Random(1)
    for _ in range(200):
        c = [Fraction(rng.randint(1, 50)) for _ in range(4)]
        v = [sum(ci * g[j] for ci, g in zip(c, cone.generators)) for j in range(3)]
        inside = [p.contains(v, strict=True) for p in parts]
        assert sum(inside) <= 1
        assert any(p.contains(v) for p in parts)


def test_simplicial_cone_is_kept():
    cone = Cone(((1, 0), (1, 1)))
    assert triangulate(cone) == [cone]
