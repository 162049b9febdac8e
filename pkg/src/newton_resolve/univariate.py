"""Root bookkeeping for one-variable rational polynomials (backed by sympy)."""

from fractions import Fraction

import sympy

_t = sympy.Symbol("t")


def _to_sympy(coeffs):
    # coeffs[k] is the coefficient of t^k
    expr = sum(sympy.Rational(c.numerator, c.denominator) * _t**k for k, c in enumerate(coeffs) if c)
    return sympy.Poly(expr, _t, domain="QQ")


def irreducible_factors(coeffs):
    """[(factor coefficient list low->high, multiplicity)] over Q, constants dropped."""
    poly = _to_sympy(coeffs)
    if poly.is_zero:
        raise ValueError("zero polynomial has no factorisation")
    _, factors = poly.factor_list()
    out = []
    for fac, mult in factors:
        cs = [Fraction(int(c.p), int(c.q)) for c in reversed(fac.all_coeffs())]
        out.append((cs, mult))
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out


def is_monomial_factor(cs):
    return len(cs) == 2 and cs[0] == 0


def real_roots(coeffs):
    """[(value as float, multiplicity, exact Fraction or None)] for the nonzero real roots."""
    out = []
    for cs, mult in irreducible_factors(coeffs):
        if is_monomial_factor(cs):
            continue
        if len(cs) == 2:
            r = -cs[0] / cs[1]
            out.append((float(r), mult, r))
            continue
        for root in _to_sympy(cs).real_roots():
            out.append((float(root.evalf(30)), mult, None))
    out.sort(key=lambda t: t[0])
    return out


def rational_roots(coeffs):
    return [(r, m) for _, m, r in real_roots(coeffs) if r is not None]


def has_padic_root(cs, p, depth=6):
    """Whether an irreducible integer-scaled polynomial has a nonzero root in Q_p.

    Returns True (certified by Hensel's lemma), or None when the bounded
    search found nothing (inconclusive).
    """
    den = 1
    for c in cs:
        den = den * c.denominator // _gcd(den, c.denominator)
    ints = [int(c * den) for c in cs]
    for poly in (ints, list(reversed(ints))):
        while poly and poly[0] == 0:
            poly = poly[1:]
        deriv = [k * c for k, c in enumerate(poly)][1:]
        for level in range(1, depth + 1):
            q = p**level
            for r in range(1, q):
                if r % p == 0:
                    continue
                val = _eval_int(poly, r)
                dval = _eval_int(deriv, r)
                if val == 0:
                    return True
                if dval == 0:
                    continue
                if _vp(val, p) > 2 * _vp(dval, p):
                    return True
    return None


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _eval_int(cs, x):
    total = 0
    for c in reversed(cs):
        total = total * x + c
    return total


def _vp(v, p):
    if v == 0:
        return float("inf")
    k = 0
    while v % p == 0:
        v //= p
        k += 1
    return k


def max_root_multiplicity(coeffs, field="real", p=None):
    """Largest multiplicity of a nonzero root in the field, 0 if none.

    Returns (multiplicity, exact flag).
    """
    best = 0
    exact = True
    for cs, mult in irreducible_factors(coeffs):
        if is_monomial_factor(cs) or len(cs) < 2:
            continue
        if field == "complex":
            present = True
        elif field == "real":
            present = len(cs) == 2 or _to_sympy(cs).count_roots() > 0
        else:
            found = len(cs) == 2 or has_padic_root(cs, p)
            present = bool(found)
            if not present:
                exact = False
        if present:
            best = max(best, mult)
    return best, exact
