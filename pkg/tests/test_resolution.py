from fractions import Fraction

import pytest

from newton_resolve.poly import Polynomial, TruncatedSeries, parse_polynomial
from newton_resolve.resolution import (
    ChartNode,
    ResolutionConfig,
    ResolutionError,
    coefficient_split,
    corrupt_leaf,
    implicit_residual,
    implicit_series,
    min_order_direction,
    resolve,
    sibling_disjointness,
    verify_chart,
)

ENGINE_SET = ["x1^2-x2^2", "x2^2-x1^3", "x1^2+x2^3", "x1*x2*(x1+x2)"]


@pytest.fixture(scope="module")
def trees():
    return {t: resolve(parse_polynomial(t, 2)) for t in ENGINE_SET}


@pytest.mark.parametrize("text", ENGINE_SET)
def test_tree_properties(trees, text):
    res = trees[text]
    assert res.depth() <= 8
    assert not res.partial_nodes()
    assert all(leaf.certificate["ok"] for leaf in res.leaves())
    assert all(c["vanishes_to_order"] and c["order"] == 12 for c in res.implicit_checks)
    assert res.order_paths_ok()
    assert sibling_disjointness(res)["ok"]


def test_expected_steps(trees):
    cusp = trees["x2^2-x1^3"].to_json()["tree"]
    assert cusp["tag"] == "quasitranslation" and cusp["m"] == 2
    face = [c for c in cusp["children"][0]["children"] if c["data"]["face_dim"] == 1][0]
    assert face["moves"][0]["matrix"] == [[2, 1], [3, 0]]
    assert [r["value"] for r in face["data"]["roots"]] == ["1"]
    swap = trees["x1^2+x2^3"].to_json()["tree"]
    assert swap["tag"] == "rotation"
    assert swap["moves"][0]["matrix"] == [["0", "1"], ["1", "0"]]
    triple = trees["x1*x2*(x1+x2)"].to_json()["tree"]
    assert triple["moves"][0]["matrix"] == [["1", "1"], ["0", "1"]]
    q = triple["children"][0]
    assert q["moves"][0]["g"] == "-1/2*x1"


def test_coordinate_is_single_leaf():
    res = resolve(parse_polynomial("x1", 1))
    assert res.root.is_leaf and res.root.moves == []
    assert res.root.monomial == (1,)
    assert res.root.certificate["function_band"] == [1.0, 1.0]


def test_certificate_on_known_unit():
    f = parse_polynomial("x1^6*(1+x2^3)", 2)
    leaf = ChartNode("leaf", [], monomial=(6, 0), jacobian_monomial=(0, 0))
    cert = verify_chart(f, leaf, ResolutionConfig(radius=Fraction(1, 10)))
    assert cert["ok"]
    lo, hi = cert["unit_range"]
    assert 0.999 <= lo and hi <= 1.001


def test_corrupted_leaf_fails_with_witness(trees):
    res = trees["x2^2-x1^3"]
    for leaf in res.leaves():
        for j in range(2):
            cert = verify_chart(res.f, corrupt_leaf(leaf, j), res.config)
            assert not cert["ok"]
            assert "witness" in cert


def test_min_order_direction():
    assert min_order_direction(parse_polynomial("x1^2-x2^2", 2)) == (2, ((1, 0), (0, 1)))
    m, A = min_order_direction(parse_polynomial("x1^2+x2^3", 2))
    assert m == 2 and A == ((0, 1), (1, 0))
    m, A = min_order_direction(parse_polynomial("x1*x2", 2))
    assert m == 2 and A == ((1, 1), (0, 1))


def test_implicit_series_postcondition():
    F = TruncatedSeries(parse_polynomial("x2^2 - 2*x1*x2 + x1^3 + x1*x2^3", 2), 12)
    g = implicit_series(F, 2)
    assert implicit_residual(F, 2, g).is_zero()
    assert g.poly.constant_term() == 0


def test_implicit_series_rejects_low_order():
    F = TruncatedSeries(parse_polynomial("x1 + x2^3", 2), 12)
    with pytest.raises(ResolutionError):
        implicit_series(F, 2)


def test_coefficient_split():
    F = TruncatedSeries(parse_polynomial("x2^3 + x1*x2^3 + x1^2*x2 + x1^5", 2), 12)
    hm, lower = coefficient_split(F, 3)
    assert hm.poly == parse_polynomial("1 + x1", 2)
    assert lower[1].poly == parse_polynomial("x1^2", 2)
    assert lower[0].poly == parse_polynomial("x1^5", 2)
    with pytest.raises(ResolutionError):
        coefficient_split(TruncatedSeries(parse_polynomial("x2^3 + x1*x2^2", 2), 12), 3)


def test_depth_cap_gives_flagged_partial_tree():
    res = resolve(parse_polynomial("x1^2*x2+x1*x2^3", 2), ResolutionConfig(max_depth=3), certify=False)
    assert res.partial_nodes()
    assert not res.to_json()["complete"]


def test_config_validation():
    with pytest.raises(ValueError):
        ResolutionConfig(max_depth=0)
    with pytest.raises(ValueError):
        ResolutionConfig(truncation=-1)


def test_json_is_deterministic(trees):
    import json

    again = resolve(parse_polynomial("x1^2+x2^3", 2))
    assert json.dumps(again.to_json()) == json.dumps(trees["x1^2+x2^3"].to_json())
