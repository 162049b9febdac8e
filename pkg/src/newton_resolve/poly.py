"""Exact sparse multivariate polynomials over Q and truncated power series.

A polynomial is an immutable map from exponent tuples to nonzero Fractions.
Floats only appear in the evaluation helpers.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import re

import numpy as np


class PolynomialSyntaxError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


def _frac(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"non-rational coefficient {c!r}")


def grlex_key(exp):
    return (sum(exp), exp)


class Polynomial:
    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars, terms=None):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        self.nvars = nvars
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} has wrong length for {nvars} variables")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = _frac(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self._terms = clean
        self._hash = None

    # construction helpers

    @classmethod
    def zero(cls, nvars):
        return cls(nvars)

    @classmethod
    def constant(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars, index):
        """The coordinate x_index (1-based)."""
        if not 1 <= index <= nvars:
            raise IndexError(f"variable x{index} out of range for {nvars} variables")
        exp = [0] * nvars
        exp[index - 1] = 1
        return cls(nvars, {tuple(exp): 1})

    @classmethod
    def monomial(cls, exp, c=1):
        return cls(len(exp), {tuple(exp): c})

    # read access

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def support(self):
        return sorted(self._terms, key=grlex_key)

    def coeff(self, exp):
        return self._terms.get(tuple(exp), Fraction(0))

    def is_zero(self):
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def constant_term(self):
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def degree(self):
        return max((sum(e) for e in self._terms), default=-1)

    def order(self):
        """Lowest total degree of a term, or None for the zero polynomial."""
        return min((sum(e) for e in self._terms), default=None)

    def degree_in(self, index):
        return max((e[index - 1] for e in self._terms), default=-1)

    def min_exponents(self):
        if not self._terms:
            return (0,) * self.nvars
        return tuple(min(e[i] for e in self._terms) for i in range(self.nvars))

    def is_monomial(self):
        return len(self._terms) == 1

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.nvars, other) if other else Polynomial(self.nvars)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Polynomial(self.nvars, {e: c * other for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.mul_truncated(other, None)

    __rmul__ = __mul__

    def mul_truncated(self, other, order):
        """Product keeping only terms of total degree < order (all terms if order is None)."""
        out = {}
        for e1, c1 in self._terms.items():
            d1 = sum(e1)
            for e2, c2 in other._terms.items():
                if order is not None and d1 + sum(e2) >= order:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Polynomial(self.nvars, out)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / other)
        return NotImplemented

    def __pow__(self, k):
        return self.pow_truncated(k, None)

    def pow_truncated(self, k, order):
        if k < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result.mul_truncated(base, order)
            k >>= 1
            if k:
                base = base.mul_truncated(base, order)
        return result

    def truncate(self, order):
        return Polynomial(self.nvars, {e: c for e, c in self._terms.items() if sum(e) < order})

    def shift_exponents(self, shift):
        """Multiply by the monomial x^shift."""
        return Polynomial(
            self.nvars,
            {tuple(a + b for a, b in zip(e, shift)): c for e, c in self._terms.items()},
        )

    def divide_monomial(self, exp):
        """Exact division by x^exp; raises if some term is not divisible."""
        out = {}
        for e, c in self._terms.items():
            q = tuple(a - b for a, b in zip(e, exp))
            if any(v < 0 for v in q):
                raise ValueError(f"term with exponent {e} is not divisible by x^{exp}")
            out[q] = c
        return Polynomial(self.nvars, out)

    def slices(self, index):
        """Split by the degree in x_index: returns {k: coefficient polynomial without x_index}."""
        parts = {}
        i = index - 1
        for e, c in self._terms.items():
            k = e[i]
            rest = e[:i] + (0,) + e[i + 1:]
            parts.setdefault(k, {})[rest] = c
        return {k: Polynomial(self.nvars, t) for k, t in sorted(parts.items())}

    def restrict_zero(self, indices):
        """Set the listed variables (1-based) to zero."""
        idx = [i - 1 for i in indices]
        return Polynomial(
            self.nvars, {e: c for e, c in self._terms.items() if all(e[i] == 0 for i in idx)}
        )

    def drop_variable(self, index):
        """View a polynomial not involving x_index as one in nvars-1 variables."""
        i = index - 1
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                raise ValueError(f"polynomial involves x{index}")
            out[e[:i] + e[i + 1:]] = c
        return Polynomial(self.nvars - 1, out)

    def insert_variable(self, index):
        """Embed into nvars+1 variables with a new unused x_index."""
        i = index - 1
        return Polynomial(self.nvars + 1, {e[:i] + (0,) + e[i:]: c for e, c in self._terms.items()})

    def content_denominator(self):
        return math.lcm(*(c.denominator for c in self._terms.values())) if self._terms else 1

    def scaled_integer(self):
        """(D, D*f) with D the lcm of the coefficient denominators."""
        D = self.content_denominator()
        return D, {e: int(c * D) for e, c in self._terms.items()}

    # evaluation

    def __call__(self, *point):
        return eval_exact(self, point)

    def to_numpy(self):
        """Exponent matrix and float coefficient vector, for vectorised evaluation."""
        items = self.items()
        exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), self.nvars)
        coeffs = np.array([float(c) for _, c in items])
        return exps, coeffs

    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({self.nvars}, {format_polynomial(self)!r})"


@dataclass(frozen=True)
class TruncatedSeries:
    """A power series known modulo terms of total degree >= order."""

    poly: Polynomial
    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be positive")
        if any(sum(e) >= self.order for e in self.poly.terms):
            object.__setattr__(self, "poly", self.poly.truncate(self.order))

    @property
    def nvars(self):
        return self.poly.nvars

    def __add__(self, other):
        return TruncatedSeries(self.poly + other.poly, min(self.order, other.order))

    def __sub__(self, other):
        return TruncatedSeries(self.poly - other.poly, min(self.order, other.order))

    def __neg__(self):
        return TruncatedSeries(-self.poly, self.order)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            order = min(self.order, other.order)
            return TruncatedSeries(self.poly.mul_truncated(other.poly, order), order)
        return TruncatedSeries(self.poly * other, self.order)

    def derivative(self, var):
        return TruncatedSeries(derivative(self.poly, var), self.order)

    def is_zero(self):
        return self.poly.is_zero()

    def __str__(self):
        return f"{self.poly} + O({self.order})"


@dataclass(frozen=True)
class ResiduePoint:
    coords: tuple
    p: int
    level: int

    def __post_init__(self):
        q = self.p ** self.level
        if any(not 0 <= c < q for c in self.coords):
            raise ValueError(f"coordinates must lie in [0, {q - 1}]")


# text format

_TOKEN = re.compile(r"\s*(?:(\d+)|(x)(\d+)|(\^)|([+\-*/()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolynomialSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            tokens.append(("var", int(m.group(3)), start))
        elif m.group(4) is not None:
            tokens.append(("^", None, start))
        else:
            tokens.append((m.group(5), None, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    # expr := ['+'|'-'] term (('+'|'-') term)*
    # term := atom (['*'] atom)*   with a rational literal a/b allowed as an atom
    # atom := number ['/' number] | x<k> ['^' e] | '(' expr ')' ['^' e]

    def __init__(self, text, nvars):
        self.tokens = _tokenize(text)
        self.i = 0
        self.nvars = nvars

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise PolynomialSyntaxError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        if self.peek()[0] == "end":
            raise PolynomialSyntaxError("empty polynomial", 0)
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise PolynomialSyntaxError(f"unexpected {tok[0]!r}", tok[2])
        return value

    def expr(self):
        sign = 1
        if self.peek()[0] in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
        total = self.term() * sign
        while self.peek()[0] in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
            total = total + self.term() * sign
        return total

    def term(self):
        value = self.atom()
        while True:
            kind = self.peek()[0]
            if kind == "*":
                self.take()
                value = value * self.atom()
            elif kind in ("int", "var", "("):
                value = value * self.atom()
            else:
                return value

    def exponent(self):
        if self.peek()[0] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise PolynomialSyntaxError("exponent must be a nonnegative integer", tok[2])
            return tok[1]
        return 1

    def atom(self):
        tok = self.take()
        kind = tok[0]
        if kind == "int":
            value = Fraction(tok[1])
            if self.peek()[0] == "/":
                self.take()
                den = self.take()
                if den[0] != "int":
                    raise PolynomialSyntaxError("denominator must be an integer", den[2])
                if den[1] == 0:
                    raise PolynomialSyntaxError("zero denominator", den[2])
                value /= den[1]
            if self.peek()[0] == "^":
                raise PolynomialSyntaxError("powers of coefficients are not supported", self.peek()[2])
            return Polynomial.constant(self.nvars, value)
        if kind == "var":
            k = tok[1]
            if not 1 <= k <= self.nvars:
                raise PolynomialSyntaxError(f"variable x{k} out of range for {self.nvars} variables", tok[2])
            return Polynomial.variable(self.nvars, k) ** self.exponent()
        if kind == "(":
            inner = self.expr()
            self.take(")")
            return inner ** self.exponent()
        raise PolynomialSyntaxError(f"unexpected {kind!r}", tok[2])


def parse_polynomial(text, nvars):
    """Parse text such as ``"3*x1^2*x2 - 1/2*x2^5"`` into a Polynomial.

    Parenthesised sums and their integer powers are accepted as well.
    """
    return _Parser(text, nvars).parse()


def format_polynomial(f):
    if f.is_zero():
        return "0"
    parts = []
    for exp, c in f.items():
        factors = []
        for i, e in enumerate(exp):
            if e == 1:
                factors.append(f"x{i + 1}")
            elif e > 1:
                factors.append(f"x{i + 1}^{e}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = f"{mag}*" + "*".join(factors)
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts)


# operations


def derivative(f, var, times=1):
    if not 1 <= var <= f.nvars:
        raise IndexError(f"variable x{var} out of range for {f.nvars} variables")
    i = var - 1
    out = {}
    for e, c in f.terms.items():
        if e[i] < times:
            continue
        factor = 1
        for j in range(times):
            factor *= e[i] - j
        ne = e[:i] + (e[i] - times,) + e[i + 1:]
        out[ne] = c * factor
    return Polynomial(f.nvars, out)


def eval_exact(f, point):
    """Evaluate with exact arithmetic (ints or Fractions)."""
    if len(point) != f.nvars:
        raise ValueError("point length differs from nvars")
    total = Fraction(0)
    for e, c in f.terms.items():
        t = c
        for x, k in zip(point, e):
            if k:
                t *= x ** k
        total += t
    return total


def eval_real(f, point):
    if len(point) != f.nvars:
        raise ValueError("point length differs from nvars")
    point = [float(x) for x in point]
    vals = []
    for e, c in f.items():
        t = float(c)
        for x, k in zip(point, e):
            if k:
                t *= x ** k
        vals.append(t)
    try:
        return math.fsum(vals)
    except OverflowError:
        return math.inf


def eval_complex(f, point):
    if len(point) != f.nvars:
        raise ValueError("point length differs from nvars")
    point = [complex(*x) if isinstance(x, (tuple, list)) else complex(x) for x in point]
    re_parts, im_parts = [], []
    for e, c in f.items():
        t = complex(float(c))
        for x, k in zip(point, e):
            if k:
                t *= x ** k
        re_parts.append(t.real)
        im_parts.append(t.imag)
    return complex(math.fsum(re_parts), math.fsum(im_parts))


def eval_array(f, X):
    """Vectorised evaluation at the rows of X (real or complex array of shape (N, nvars))."""
    X = np.asarray(X)
    out = np.zeros(X.shape[0], dtype=np.result_type(X.dtype, np.float64))
    for e, c in f.items():
        t = np.full(X.shape[0], float(c), dtype=out.dtype)
        for i, k in enumerate(e):
            if k:
                t = t * X[:, i] ** k
        out += t
    return out


def modular_coefficients(f, modulus, p):
    """Coefficients reduced into Z/modulus; denominators must be prime to p."""
    out = {}
    for e, c in f.terms.items():
        if c.denominator % p == 0:
            raise ValueError(f"coefficient {c} has a denominator divisible by {p}")
        out[e] = c.numerator * pow(c.denominator, -1, modulus) % modulus
    return out


def eval_mod(f, point):
    if len(point.coords) != f.nvars:
        raise ValueError("point length differs from nvars")
    q = point.p ** point.level
    total = 0
    for e, c in modular_coefficients(f, q, point.p).items():
        t = c
        for x, k in zip(point.coords, e):
            if k:
                t = t * pow(x, k, q) % q
        total += t
    return total % q


def matrix_of(M):
    return M.matrix if hasattr(M, "matrix") else M


def compose_monomial(f, M):
    """Pull back f along x_j = prod_k z_k^M[j][k]; x^alpha becomes z^(M^T alpha)."""
    M = matrix_of(M)
    n = f.nvars
    if len(M) != n or any(len(row) != n for row in M):
        raise ValueError("monomial map dimension mismatch")
    if any(v < 0 for row in M for v in row):
        raise ValueError("monomial map exponents must be nonnegative")
    out = {}
    for e, c in f.terms.items():
        new = tuple(sum(M[j][k] * e[j] for j in range(n)) for k in range(n))
        out[new] = out.get(new, Fraction(0)) + c
    return Polynomial(n, out)


def substitute(f, images, order=None):
    """Compose f with the polynomial map x_j -> images[j], truncating at total degree order."""
    if len(images) != f.nvars:
        raise ValueError("need one image per variable")
    m = images[0].nvars
    power_cache = [{0: Polynomial.constant(m, 1)} for _ in images]

    def power(j, k):
        cache = power_cache[j]
        if k not in cache:
            lower = max(i for i in cache if i < k)
            cache[k] = power(j, lower).mul_truncated(images[j].pow_truncated(k - lower, order), order)
        return cache[k]

    total = Polynomial(m)
    for e, c in f.terms.items():
        t = Polynomial.constant(m, c)
        for j, k in enumerate(e):
            if k:
                t = t.mul_truncated(power(j, k), order)
        total = total + t
    return total


def compose_linear(f, A, shift=None):
    """Pull back along x = A y + shift (A rational, row j gives x_j)."""
    n = f.nvars
    images = []
    for j in range(n):
        img = Polynomial.constant(n, shift[j] if shift else 0)
        for k in range(n):
            if A[j][k]:
                img = img + Polynomial.variable(n, k + 1) * Fraction(A[j][k])
        images.append(img)
    return substitute(f, images)


def compose_quasitranslation(F, axis, g):
    """Substitute x_axis -> x_axis + g in the series F.

    g may be given in nvars-1 variables (the others) or in nvars variables
    without x_axis.
    """
    n = F.nvars
    if not 1 <= axis <= n:
        raise IndexError(f"axis {axis} out of range")
    gpoly = g.poly if isinstance(g, TruncatedSeries) else g
    if gpoly.nvars == n - 1:
        gpoly = gpoly.insert_variable(axis)
    if gpoly.nvars != n:
        raise ValueError("series has the wrong number of variables")
    if gpoly.degree_in(axis) > 0:
        raise ValueError(f"g must not involve x{axis}")
    if gpoly.constant_term():
        raise ValueError("g must have zero constant term")
    order = F.order
    if isinstance(g, TruncatedSeries):
        order = min(order, g.order)
    images = [Polynomial.variable(n, j + 1) for j in range(n)]
    images[axis - 1] = images[axis - 1] + gpoly
    return TruncatedSeries(substitute(F.poly, images, order), order)


def default_truncation(f):
    return max(2 * max(f.degree(), 0), 12)


def prescale(f, p, shifts):
    """f(p^a1 x1, ..., p^an xn), exact."""
    out = {}
    for e, c in f.terms.items():
        out[e] = c * Fraction(p) ** sum(a * k for a, k in zip(shifts, e))
    return Polynomial(f.nvars, out)
