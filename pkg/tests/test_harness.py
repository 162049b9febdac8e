import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from newton_resolve.harness import (
    CapExceeded,
    CountSeries,
    count_brute,
    count_divisibility,
    count_hensel,
    count_series,
    cross_check_identity,
    exp_sum,
    exp_sum_family,
    fit_growth,
    grid_volume,
    monomial_count_oracle,
    oscillatory_integral,
    sublevel_sweep,
    sublevel_volume,
    thread_count,
)
from newton_resolve.poly import Polynomial, parse_polynomial

P = parse_polynomial


def test_count_examples():
    assert count_divisibility(P("x1", 1), 7, 3, "brute") == Fraction(1, 343)
    assert count_divisibility(P("x1", 1), 7, 3, "hensel") == Fraction(1, 343)
    assert count_brute(P("x1^2", 1), 3, 3) == Fraction(1, 9)
    cusp = P("x1^2+x2^3", 2)
    assert count_brute(cusp, 3, 2) == Fraction(15, 81)
    assert count_hensel(cusp, 3, 2) == Fraction(15, 81)


def test_counts_match_enumeration_oracle():
    for text, n, p, l in [("x1^2+x2^3", 2, 3, 2), ("x1*x2*(x1+x2)", 2, 2, 3), ("x1^2-2*x1*x2+x2^2", 2, 3, 2), ("x1*x2*x3", 3, 2, 2)]:
        f = P(text, n)
        assert count_hensel(f, p, l) == oracles.count_by_enumeration(f, p, l)


def test_brute_cap():
    with pytest.raises(CapExceeded):
        count_brute(P("x1*x2", 2), 5, 5, cap=10**6)


def test_rational_coefficients_prime_to_p():
    f = P("1/2*x1^2 + x2^3", 2)
    assert count_hensel(f, 3, 3) == count_brute(f, 3, 3) == count_brute(P("x1^2 + 2*x2^3", 2), 3, 3)
    with pytest.raises(ValueError):
        count_brute(P("1/3*x1", 1), 3, 2)


def test_monomial_staircase():
    for gamma, p, l in [((2, 3), 2, 6), ((1, 1), 5, 3), ((3,), 3, 5)]:
        f = Polynomial.monomial(gamma)
        assert count_hensel(f, p, l) == monomial_count_oracle(gamma, p, l) == oracles.count_by_enumeration(f, p, l)


def test_product_closed_form():
    s = count_series(P("x1*x2", 2), 2, range(1, 21))
    assert all(v == Fraction(1, 2**l) * ((1 - Fraction(1, 2)) * l + 1) for l, v in zip(s.levels, s.values))


small = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(-3, 3).filter(bool), min_size=1, max_size=4)


@settings(max_examples=25, deadline=None)
@given(small, st.sampled_from([2, 3]), st.integers(1, 3))
def test_brute_and_hensel_agree(terms, p, l):
    terms = {e: c for e, c in terms.items() if any(e)}
    if not terms:
        return
    f = Polynomial(2, terms)
    s = count_series(f, p, range(1, l + 1))
    b = count_series(f, p, range(1, l + 1), "brute")
    assert s.values == b.values
    assert all(a >= c for a, c in zip(s.values, s.values[1:]))
    assert all(v * p ** (lv * 2) == int(v * p ** (lv * 2)) for lv, v in zip(s.levels, s.values))


def test_exp_sum_examples():
    assert abs(exp_sum(P("x1", 1), 3, 1)) < 1e-12
    assert abs(abs(exp_sum(P("x1^2", 1), 3, 1)) - 3**-0.5) < 1e-12
    cusp = P("x1^2+x2^3", 2)
    assert abs(exp_sum(cusp, 3, 2) - oracles.exp_sum_by_enumeration(cusp, 3, 2)) < 1e-12
    assert exp_sum(cusp, 3, 0) == 1


def test_stratified_sums_match_brute():
    for text, n, p, l in [("x1^2+x2^3", 2, 3, 4), ("x1*x2", 2, 5, 2), ("x1^3", 1, 2, 6)]:
        f = P(text, n)
        assert abs(exp_sum(f, p, l) - exp_sum(f, p, l, "stratified")) < 1e-12


def test_exp_sum_symmetries():
    f = P("x1^2+2*x2^3+x1*x2", 2)
    assert abs(exp_sum(-f, 3, 3) - exp_sum(f, 3, 3).conjugate()) < 1e-12
    assert abs(exp_sum(f, 2, 4)) <= 1 + 1e-12
    assert exp_sum(Polynomial(2, {(1, 0): 5}), 5, 1) == pytest.approx(1)


def test_cross_check_identity():
    assert cross_check_identity(P("x1", 1), 3, 1)["ok"]
    assert cross_check_identity(P("x1^2", 1), 3, 2)["ok"]
    rep = cross_check_identity(P("x1^2+x2^3", 2), 3, 2)
    assert rep["ok"] and rep["N_l"] == "5/27"
    assert not cross_check_identity(P("x1^2+x2^3", 2), 3, 2, char_level=3)["ok"]
    family = exp_sum_family(P("x1", 1), 3, 1)
    assert family[0] == pytest.approx(1)


def test_fit_synthetic():
    s = CountSeries(3, 1, list(range(1, 12)), [3 ** (-5 * l / 6) for l in range(1, 12)], "synthetic")
    r = fit_growth(s, -5 / 6, 0)
    assert abs(r.slope + 5 / 6) < 1e-9 and abs(r.log_power) < 1e-9 and r.verdict == "PASS"
    s = CountSeries(2, 1, list(range(1, 12)), [l * 2.0**-l for l in range(1, 12)], "synthetic")
    r = fit_growth(s, -1, 1)
    assert abs(r.slope + 1) < 1e-9 and abs(r.log_power - 1) < 1e-9


def test_fit_reports_degenerate_series():
    s = CountSeries(3, 1, list(range(1, 7)), [Fraction(0)] * 6, "synthetic")
    assert fit_growth(s, -1, 0).verdict == "N/A"


def test_fit_needs_points():
    s = CountSeries(3, 1, [1, 2, 3], [1, 1, 1], "synthetic")
    with pytest.raises(ValueError):
        fit_growth(s, -1, 0)


def test_cusp_count_fit():
    s = count_series(P("x1^2+x2^3", 2), 3, range(1, 8))
    r = fit_growth(s, -5 / 6, 0, pinned_log=0)
    assert r.verdict == "PASS"


def test_slab_volume():
    est = sublevel_volume(P("x1", 1), "real", 0.1, samples=10**5, seed=3)
    assert abs(est.value - 0.2) <= 3 * est.stderr


def test_volume_monotone_in_eps():
    tab = sublevel_sweep(P("x1^2+x2^3", 2), "real", [1e-3, 3e-3, 1e-2, 3e-2], 2 * 10**5, seed=1)
    vals = [e.value for e in tab.estimates]
    errs = [e.stderr for e in tab.estimates]
    assert all(b >= a - 3 * (ea + eb) for a, b, ea, eb in zip(vals, vals[1:], errs, errs[1:]))


def test_product_volume_against_quadrature():
    eps = [1e-2, 1e-3, 1e-4]
    tab = sublevel_sweep(P("x1*x2", 2), "real", eps, 10**6, seed=2)
    for e in tab.estimates:
        assert abs(e.value - oracles.product_volume(e.eps)) <= 4 * e.stderr
    ratios = [e.value / (2 * e.eps * math.log(1 / e.eps)) for e in tab.estimates]
    assert max(ratios) / min(ratios) < 2


def test_grid_volume_against_closed_form():
    est = grid_volume(P("x1^2*x2^2", 2), 1e-3, res=2000)
    assert est.value == pytest.approx(oracles.square_monomial_volume(1e-3), rel=1e-3)


def test_complex_volume_against_closed_form():
    tab = sublevel_sweep(P("x1*x2", 2), "complex", [1e-2], 10**6, seed=4)
    e = tab.estimates[0]
    assert abs(e.value - oracles.complex_product_volume(1e-2)) <= 4 * e.stderr


def test_monte_carlo_is_thread_independent(monkeypatch):
    f = P("x1^2+x2^3", 2)
    a = sublevel_sweep(f, "real", [1e-2], 300000, seed=5, threads=1, chunk=65536)
    b = sublevel_sweep(f, "real", [1e-2], 300000, seed=5, threads=4, chunk=65536)
    assert a.rows() == b.rows()
    monkeypatch.setenv("NEWTON_RESOLVE_THREADS", "3")
    assert thread_count() == 3


def test_oscillatory_examples():
    rows = oscillatory_integral(P("x1", 1), [1, 2, 4, 8, 16])
    assert rows[-1]["abs"] < 1e-3 * rows[0]["abs"]
    rows = oscillatory_integral(P("x1^2", 1), [10, 100, 1000])
    scaled = [r["abs"] * math.sqrt(r["lambda"]) for r in rows]
    assert max(scaled) / min(scaled) < 1.05
    rows = oscillatory_integral(P("x1^2+x2^3", 2), [10, 20, 40, 80, 160])
    slope = np.polyfit([math.log(r["lambda"]) for r in rows], [math.log(r["abs"]) for r in rows], 1)[0]
    assert abs(slope + 5 / 6) < 0.05
    with pytest.raises(ValueError):
        oscillatory_integral(P("x1", 1), [5, 2])
