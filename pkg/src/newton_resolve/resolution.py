"""Recursive chart tree that turns f into monomial x unit on each leaf.

Each round: rotate so a pure power of the last variable appears, remove the
next-to-top slice with a quasitranslation, monomialize the lower slices (trivial
in the plane), then pull back along the fan charts and localize at the real
zeros of the face units, where the order has dropped.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
import math
import random

from .fan import chart_atlas, MonomialMap
from .geometry import newton_polyhedron
from .linalg import det, inverse, matvec
from .poly import (
    Polynomial,
    TruncatedSeries,
    compose_linear,
    compose_monomial,
    default_truncation,
    derivative,
    eval_exact,
    format_polynomial,
    substitute,
)
from . import univariate


# moves: each maps the new (local) coordinates to the previous ones


@dataclass(frozen=True)
class AffineLinear:
    matrix: tuple
    shift: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(Fraction(v) for v in row) for row in self.matrix))
        object.__setattr__(self, "shift", tuple(Fraction(v) for v in self.shift))
        if det(self.matrix) == 0:
            raise ValueError("affine map is not invertible")

    @classmethod
    def translation(cls, n, axis, c):
        shift = [0] * n
        shift[axis - 1] = c
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), tuple(shift))

    def apply(self, z):
        return [sum((a * x for a, x in zip(row, z)), Fraction(0)) + s for row, s in zip(self.matrix, self.shift)]

    def jacobian(self, z):
        return det(self.matrix)

    def pull(self, W):
        return compose_linear(W, self.matrix, self.shift)

    def preimages(self, x):
        inv = inverse(self.matrix)
        return [[float(v) for v in matvec(inv, [Fraction(a) - s for a, s in zip(x, self.shift)])]]

    def to_json(self):
        return {
            "kind": "affine",
            "matrix": [[str(v) for v in row] for row in self.matrix],
            "shift": [str(v) for v in self.shift],
        }


@dataclass(frozen=True)
class Monomial:
    map: MonomialMap

    def apply(self, z):
        return self.map.apply(z)

    def jacobian(self, z):
        value = Fraction(self.map.det)
        for zk, ek in zip(z, self.map.jacobian_exponents()):
            value = value * zk**ek
        return value

    def pull(self, W):
        return compose_monomial(W, self.map)

    def preimages(self, x):
        """Real preimages of a point with nonzero coordinates."""
        n = self.map.n
        if any(v == 0 for v in x):
            return []
        logs = [math.log(abs(float(v))) for v in x]
        inv = inverse(self.map.matrix)
        mags = [math.exp(sum(float(inv[k][j]) * logs[j] for j in range(n))) for k in range(n)]
        out = []
        for signs in product((1, -1), repeat=n):
            ok = True
            for j in range(n):
                s = 1
                for k in range(n):
                    if self.map.matrix[j][k] % 2:
                        s *= signs[k]
                if (s > 0) != (float(x[j]) > 0):
                    ok = False
                    break
            if ok:
                out.append([s * m for s, m in zip(signs, mags)])
        return out

    def to_json(self):
        return {"kind": "monomial", "matrix": [list(r) for r in self.map.matrix], "det": self.map.det}


@dataclass(frozen=True)
class Quasitranslation:
    axis: int
    g: TruncatedSeries

    def __post_init__(self):
        if self.g.poly.constant_term():
            raise ValueError("quasitranslation needs g(0) = 0")

    def apply(self, z):
        x = list(z)
        x[self.axis - 1] = z[self.axis - 1] + eval_exact(self.g.poly, z)
        return x

    def jacobian(self, z):
        return Fraction(1)

    def pull(self, W):
        n = W.nvars
        images = [Polynomial.variable(n, j + 1) for j in range(n)]
        images[self.axis - 1] = images[self.axis - 1] + self.g.poly
        return substitute(W, images)

    def preimages(self, x):
        z = [float(v) for v in x]
        z[self.axis - 1] = z[self.axis - 1] - float(eval_exact(self.g.poly, [Fraction(v) for v in x]))
        return [z]

    def to_json(self):
        return {"kind": "quasitranslation", "axis": self.axis, "g": format_polynomial(self.g.poly), "order": self.g.order}


@dataclass(frozen=True)
class Dilation:
    scales: tuple

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(Fraction(s) for s in self.scales))
        if any(s == 0 for s in self.scales):
            raise ValueError("dilation scales must be nonzero")

    def apply(self, z):
        return [s * v for s, v in zip(self.scales, z)]

    def jacobian(self, z):
        return math.prod(self.scales, start=Fraction(1))

    def pull(self, W):
        n = W.nvars
        return substitute(W, [Polynomial.variable(n, j + 1) * s for j, s in enumerate(self.scales)])

    def preimages(self, x):
        return [[float(v) / float(s) for v, s in zip(x, self.scales)]]

    def to_json(self):
        return {"kind": "dilation", "scales": [str(s) for s in self.scales]}


@dataclass
class ResolutionConfig:
    truncation: int = None
    max_depth: int = 8
    samples: int = 1000
    radius: Fraction = Fraction(1, 20)
    rotation_bound: int = 3
    bound: float = 100.0
    seed: int = 0

    def __post_init__(self):
        self.radius = Fraction(self.radius)
        for name in ("max_depth", "samples", "rotation_bound"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.truncation is not None and self.truncation <= 0:
            raise ValueError("truncation must be positive")
        if self.radius <= 0 or self.bound <= 1:
            raise ValueError("radius must be positive and bound > 1")


@dataclass
class ChartNode:
    tag: str
    moves: list
    children: list = field(default_factory=list)
    m: int = None
    data: dict = field(default_factory=dict)
    monomial: tuple = None
    jacobian_monomial: tuple = None
    certificate: dict = None
    flags: list = field(default_factory=list)
    chain: list = field(default_factory=list)
    depth: int = 1

    @property
    def is_leaf(self):
        return self.monomial is not None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def leaves(self):
        return [n for n in self.walk() if n.is_leaf]

    def to_json(self):
        out = {"tag": self.tag, "moves": [mv.to_json() for mv in self.moves]}
        if self.m is not None:
            out["m"] = self.m
        if self.data:
            out["data"] = self.data
        if self.is_leaf:
            out["monomial"] = list(self.monomial)
            out["jacobian_monomial"] = list(self.jacobian_monomial)
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.flags:
            out["flags"] = list(self.flags)
        if self.children:
            out["children"] = [c.to_json() for c in self.children]
        return out


class ResolutionError(RuntimeError):
    pass


# the three single-round operations


def _homogeneous_part(f, degree):
    return Polynomial(f.nvars, {e: c for e, c in f.terms.items() if sum(e) == degree})


def _directions(n, bound, allowed):
    allowed = sorted(allowed)
    units = [tuple(int(j == i) for j in range(1, n + 1)) for i in reversed(allowed)]
    rest = []
    ranges = [range(-bound, bound + 1) if j in allowed else range(0, 1) for j in range(1, n + 1)]
    for v in product(*ranges):
        nz = [x for x in v if x]
        if not nz or nz[0] < 0 or v in units:
            continue
        rest.append(v)
    rest.sort(key=lambda v: (max(abs(x) for x in v), sum(1 for x in v if x), tuple(-x for x in v)))
    return units + rest


def _rotation_matrix(v):
    n = len(v)
    t = max(j for j in range(n) if v[j])
    others = [j for j in range(n) if j != t]
    cols = [[int(i == j) for i in range(n)] for j in others] + [list(v)]
    return tuple(tuple(cols[k][j] for k in range(n)) for j in range(n))


def min_order_direction(f, bound=3, allowed=None):
    """Order m of f along the allowed coordinates and a rational invertible A with a
    nonzero pure x_n^m coefficient in f(A y)."""
    f = f.poly if isinstance(f, TruncatedSeries) else f
    n = f.nvars
    allowed = list(range(1, n + 1)) if allowed is None else list(allowed)
    if f.constant_term():
        raise ValueError("f(0) must vanish")
    restricted = f.restrict_zero([j for j in range(1, n + 1) if j not in allowed])
    m = restricted.order()
    if m is None:
        raise ResolutionError("f vanishes to the truncation order along the allowed directions; raise the truncation")
    top = _homogeneous_part(restricted, m)
    for v in _directions(n, bound, allowed):
        if eval_exact(top, v) != 0:
            return m, _rotation_matrix(v)
    raise ResolutionError(f"no direction with entries in [-{bound}, {bound}] has a nonzero {m}-th derivative")


def series_inverse(q, order):
    """1/q as a truncated series (q(0) must be nonzero)."""
    q0 = q.constant_term()
    if q0 == 0:
        raise ResolutionError("series inverse of a non-unit")
    n = q.nvars
    rest = (q - q0) * (Fraction(-1) / q0)
    term = Polynomial.constant(n, 1)
    total = Polynomial.constant(n, 1)
    for _ in range(order):
        term = term.mul_truncated(rest, order)
        if term.is_zero():
            break
        total = total + term
    return total.truncate(order) * (Fraction(1) / q0)


def implicit_series(F, m, axis=None):
    """g(x') with the (m-1)-th x_axis derivative of F vanishing on x_axis = g(x')."""
    n = F.nvars
    axis = axis or n
    T = F.order
    P = derivative(F.poly, axis, m - 1)
    Q = derivative(F.poly, axis, m)
    if Q.constant_term() == 0:
        raise ResolutionError("the m-th derivative vanishes at 0")
    if P.constant_term() != 0:
        raise ResolutionError("the (m-1)-th derivative does not vanish at 0")

    def on_graph(h, g):
        images = [Polynomial.variable(n, j + 1) for j in range(n)]
        images[axis - 1] = g
        return substitute(h, images, T)

    g = Polynomial(n)
    for _ in range(2 * max(T, 1).bit_length() + 2):
        num = on_graph(P, g)
        if num.is_zero():
            break
        den = on_graph(Q, g)
        step = num.mul_truncated(series_inverse(den, T), T)
        g = (g - step).truncate(T)
    return TruncatedSeries(g, T)


def implicit_residual(F, m, g, axis=None, truncate=True):
    n = F.nvars
    axis = axis or n
    P = derivative(F.poly, axis, m - 1)
    images = [Polynomial.variable(n, j + 1) for j in range(n)]
    images[axis - 1] = g.poly
    return substitute(P, images, F.order if truncate else None)


def coefficient_split(F, m, axis=None):
    """h_m and the lower slices h_p (p < m-1) of F by degree in x_axis."""
    n = F.nvars
    axis = axis or n
    T = F.order
    slices = F.poly.slices(axis)
    if not slices.get(m - 1, Polynomial(n)).truncate(T).is_zero():
        raise ResolutionError("nonzero x_n^(m-1) slice: the quasitranslation failed, raise the truncation")
    hm = Polynomial(n)
    for q, s in slices.items():
        if q >= m:
            e = [0] * n
            e[axis - 1] = q - m
            hm = hm + s.shift_exponents(e)
    if hm.constant_term() == 0:
        raise ResolutionError("h_m(0) = 0")
    lower = {p: TruncatedSeries(slices.get(p, Polynomial(n)), T) for p in range(0, max(m - 1, 0))}
    return TruncatedSeries(hm, max(T - m, 1)), lower


# the recursion


def _minimal(gens):
    gens = set(gens)
    return frozenset(g for g in gens if not any(h != g and all(x <= y for x, y in zip(h, g)) for h in gens))


def _degree_shell(n, D):
    if n == 1:
        return [(D,)]
    return [(k,) + rest for k in range(D + 1) for rest in _degree_shell(n - 1, D - k)]


def _zero_axis(g, axis):
    return g[: axis - 1] + (0,) + g[axis:]


@dataclass(frozen=True)
class _Tracked:
    """A polynomial known up to an error inside the monomial ideal spanned by `errors`."""

    poly: Polynomial
    errors: frozenset = frozenset()

    def normalized(self):
        if not self.errors:
            return self
        errs = _minimal(self.errors)
        keep = {e: c for e, c in self.poly.terms.items() if not any(all(x >= y for x, y in zip(e, g)) for g in errs)}
        return _Tracked(Polynomial(self.poly.nvars, keep), errs)

    def linear(self, move):
        n = self.poly.nvars
        errs = set()
        for g in self.errors:
            try:
                errs.add(_transport(move.matrix, g))
            except ResolutionError:
                errs.update(_degree_shell(n, sum(g)))
        return _Tracked(move.pull(self.poly), frozenset(errs)).normalized()

    def monomial(self, move):
        errs = {move.map.pullback_exponent(g) for g in self.errors}
        return _Tracked(move.pull(self.poly), frozenset(errs)).normalized()

    def translate(self, move, axis):
        errs = {_zero_axis(g, axis) for g in self.errors}
        return _Tracked(move.pull(self.poly), frozenset(errs)).normalized()

    def quasitranslate(self, move, order):
        n = self.poly.nvars
        images = [Polynomial.variable(n, j + 1) for j in range(n)]
        images[move.axis - 1] = images[move.axis - 1] + move.g.poly
        errs = {_zero_axis(g, move.axis) for g in self.errors}
        if self.poly.degree() * max(move.g.poly.degree(), 1) < order:
            return _Tracked(substitute(self.poly, images), frozenset(errs)).normalized()
        errs |= set(_degree_shell(n, order))
        return _Tracked(substitute(self.poly, images, order), frozenset(errs)).normalized()


def _precision_ok(G, a, errors):
    """True when every possible error term sits inside the Newton polyhedron of G
    and off its compact faces, so the truncation cannot change the charts."""
    deltas = {tuple(max(x, y) - y for x, y in zip(g, a)) for g in errors}
    if not deltas:
        return True
    if G.is_zero():
        return False
    N = newton_polyhedron(G)
    for dlt in deltas:
        if not N.contains(dlt):
            return False
        for F in N.compact_faces:
            if all(N.facets[j].value(dlt) == N.facets[j].offset for j in F.active_facets):
                return False
    return True


class _Engine:
    def __init__(self, f, cfg):
        self.f = f
        self.cfg = cfg
        self.n = f.nvars
        self.T = cfg.truncation or default_truncation(f)
        self.D = 2 * self.T
        self.implicit_checks = []

    def node(self, tag, moves, parent_chain, depth, **kw):
        return ChartNode(tag, list(moves), chain=list(parent_chain) + list(moves), depth=depth, **kw)

    def leaf(self, node, monomial, b):
        node.monomial = tuple(monomial)
        node.jacobian_monomial = tuple(b)
        return node

    def precision(self, node, W, a):
        if _precision_ok(W.poly.divide_monomial(a), a, W.errors):
            return True
        node.flags.append("partial: truncated terms reach the Newton polyhedron; raise the truncation")
        return False

    def round(self, W, a, b, chain, depth, tag, moves, m_bound):
        """Start a round at the node carrying `moves` (already applied to W)."""
        n = self.n
        head = self.node(tag, moves, chain, depth)
        if not self.precision(head, W, a):
            return head
        mu = W.poly.min_exponents()
        if W.poly.divide_monomial(mu).constant_term() != 0:
            return self.leaf(head, mu, b)
        if depth >= self.cfg.max_depth:
            head.flags.append("partial: depth limit reached before the function became monomial")
            return head
        free = [j for j in range(1, n + 1) if a[j - 1] == 0 and b[j - 1] == 0]
        if not free:
            head.flags.append("partial: no free coordinate to rotate")
            return head
        m, A = min_order_direction(W.poly.divide_monomial(a), self.cfg.rotation_bound, free)
        head.m = m
        if m_bound is not None and m >= m_bound:
            head.flags.append(f"order did not drop at localization ({m} >= {m_bound})")
        if all(A[i][j] == int(i == j) for i in range(n) for j in range(n)):
            if head.moves:
                self.quasitranslation_into(head, W, a, b, m)
                return head
            return self.quasitranslation_into(head, W, a, b, m, inline=True)
        rot = AffineLinear(A, (0,) * n)
        W1 = W.linear(rot)
        a1 = _transport(A, a)
        b1 = _transport(A, b)
        if head.moves:
            child = self.node("rotation", [rot], head.chain, depth + 1, m=m)
            head.children.append(child)
        else:
            child = head
            child.tag = "rotation"
            child.moves = [rot]
            child.chain = child.chain + [rot]
        self.quasitranslation_into(child, W1, a1, b1, m)
        return head

    def quasitranslation_into(self, parent, W, a, b, m, inline=False):
        n = self.n
        T = self.T
        G = W.poly.divide_monomial(a)
        Fs = TruncatedSeries(G, T)
        g = implicit_series(Fs, m, n)
        residual = implicit_residual(Fs, m, g)
        exact = False
        if not W.errors and G.degree() < T and G.degree() * max(g.poly.degree(), 1) <= 4 * T:
            exact = implicit_residual(TruncatedSeries(G, G.degree() * max(g.poly.degree(), 1) + 1), m, g).is_zero()
        check = {
            "m": m,
            "order": T,
            "g": format_polynomial(g.poly),
            "vanishes_to_order": residual.is_zero(),
            "exact": exact,
        }
        self.implicit_checks.append(check)
        move = Quasitranslation(n, g)
        if inline:
            node = parent
            node.tag = "quasitranslation"
            node.moves = [move]
            node.chain = node.chain + [move]
        else:
            node = self.node("quasitranslation", [move], parent.chain, parent.depth + 1, m=m)
            parent.children.append(node)
        node.m = m
        node.data = {"implicit_check": check}
        if not check["vanishes_to_order"]:
            node.flags.append("partial: implicit series postcondition failed")
            return node
        W2 = W.quasitranslate(move, self.D)
        G2 = W2.poly.divide_monomial(a)
        hm, lower = coefficient_split(TruncatedSeries(G2, T), m, n)
        node.data["split"] = {
            "h_m0": str(hm.poly.constant_term()),
            "lower_orders": {str(p): h.poly.order() for p, h in lower.items()},
        }
        if m == 1 or all(h.is_zero() for h in lower.values()):
            mono = list(a)
            mono[n - 1] += m
            return self.leaf(node, mono, b)
        sub = self.node("subresolution", [], node.chain, node.depth + 1)
        node.children.append(sub)
        if n > 2:
            bad = [p for p, h in lower.items() if not h.is_zero() and h.poly.divide_monomial(h.poly.min_exponents()).constant_term() == 0]
            if bad:
                sub.flags.append("partial: lower slices are not monomial x unit in n-1 >= 2 variables")
                return node
        if self.precision(sub, W2, a):
            self.fan(sub, W2, a, b, m)
        return node

    def fan(self, parent, W, a, b, m):
        n = self.n
        G = W.poly.divide_monomial(a)
        for chart in chart_atlas(G):
            move = Monomial(chart.map)
            M = chart.map.matrix
            a3 = tuple(sum(M[j][k] * a[j] for j in range(n)) + chart.a[k] for k in range(n))
            b3 = tuple(sum(M[j][k] * b[j] for j in range(n)) + chart.e[k] for k in range(n))
            info = {"face": [list(v) for v in chart.face.vertex_set], "face_dim": chart.i, "unit": format_polynomial(chart.unit)}
            node = self.node("fan_chart", [move], parent.chain, parent.depth + 1, data=info)
            parent.children.append(node)
            if chart.i == 0:
                self.leaf(node, a3, b3)
                continue
            if n != 2 or chart.i != 1:
                node.flags.append("partial: localization on faces of dimension >= 2 is not implemented")
                continue
            restricted = chart.unit.restrict_zero([1])
            coeffs = [Fraction(0)] * (restricted.degree() + 1)
            for e, c in restricted.terms.items():
                coeffs[e[1]] = c
            roots = univariate.real_roots(coeffs) if restricted.degree() > 0 else []
            info["roots"] = [{"value": str(r) if r is not None else repr(v), "multiplicity": mult} for v, mult, r in roots]
            a4 = a3[:-1] + (0,)
            b4 = b3[:-1] + (0,)
            c0 = chart.tail_center[0]
            reg = self.node("regular", [AffineLinear.translation(n, n, c0)], node.chain, node.depth + 1, data={"center": str(c0)})
            node.children.append(reg)
            self.leaf(reg, a4, b4)
            if roots:
                W3 = W.monomial(move)
            for value, mult, r in roots:
                if r is None:
                    loc = self.node("localization", [], node.chain, node.depth + 1, m=mult, data={"center": repr(value)})
                    loc.flags.append("partial: irrational localization center")
                    node.children.append(loc)
                    continue
                shift = AffineLinear.translation(n, n, r)
                loc = self.round(W3.translate(shift, n), a4, b4, node.chain, node.depth + 1, "localization", [shift], m)
                loc.data = dict(loc.data, center=str(r), root_multiplicity=mult)
                if loc.m is None:
                    loc.m = mult
                node.children.append(loc)


def _transport(A, b):
    n = len(A)
    out = [0] * n
    for j in range(n):
        if b[j]:
            row = A[j]
            ks = [k for k in range(n) if row[k]]
            if len(ks) != 1 or row[ks[0]] != 1:
                raise ResolutionError("rotation mixes a coordinate carrying a Jacobian factor")
            out[ks[0]] += b[j]
    return tuple(out)


@dataclass
class Resolution:
    f: Polynomial
    root: ChartNode
    config: ResolutionConfig
    truncation: int
    implicit_checks: list

    def leaves(self):
        return self.root.leaves()

    def partial_nodes(self):
        return [n for n in self.root.walk() if any(fl.startswith("partial") or "limit" in fl for fl in n.flags)]

    def depth(self):
        return max(n.depth for n in self.root.walk())

    def order_paths_ok(self):
        """Recorded orders strictly decrease across localization nodes on every path."""

        def visit(node, last):
            here = last
            if node.tag == "localization" or node is self.root:
                if node.m is not None:
                    if last is not None and node.m >= last:
                        return False
                    here = node.m
            return all(visit(c, here) for c in node.children)

        return visit(self.root, None)

    def to_json(self):
        return {
            "polynomial": format_polynomial(self.f),
            "nvars": self.f.nvars,
            "truncation": self.truncation,
            "depth": self.depth(),
            "complete": not self.partial_nodes(),
            "order_decreases": self.order_paths_ok(),
            "tree": self.root.to_json(),
        }


def resolve(f, cfg=None, certify=True):
    cfg = cfg or ResolutionConfig()
    f = f.poly if isinstance(f, TruncatedSeries) else f
    if f.is_zero():
        raise ValueError("zero polynomial")
    if f.constant_term():
        raise ValueError("f(0) must vanish")
    eng = _Engine(f, cfg)
    root = eng.round(_Tracked(f), (0,) * f.nvars, (0,) * f.nvars, [], 1, "leaf", [], None)
    if root.is_leaf and not root.moves:
        root.tag = "leaf"
    res = Resolution(f, root, cfg, eng.T, eng.implicit_checks)
    if certify:
        for i, leaf in enumerate(res.leaves()):
            leaf.certificate = verify_chart(f, leaf, cfg, seed=cfg.seed + i)
    return res


# certificates


def _forward(chain, z):
    """Push a leaf-local point through the chain; returns the points seen by each move."""
    points = []
    x = list(z)
    for move in reversed(chain):
        points.append(x)
        x = move.apply(x)
    return x, points


def _sample_points(n, count, radius, rng, resolution=4096):
    pts = []
    for _ in range(count):
        z = []
        for _ in range(n):
            k = rng.randint(1, resolution) * rng.choice((1, -1))
            z.append(Fraction(k, resolution) * radius)
        pts.append(z)
    return pts


def _monomial_value(z, exps):
    v = Fraction(1)
    for zj, ej in zip(z, exps):
        if ej:
            v *= zj**ej
    return v


def chain_jacobian(chain, z):
    _, points = _forward(chain, z)
    value = Fraction(1)
    for move, pt in zip(reversed(chain), points):
        value *= move.jacobian(pt)
    return value


def _finite_difference_jacobian(chain, z, h=Fraction(1, 10**7)):
    n = len(z)
    cols = []
    for k in range(n):
        up = list(z)
        dn = list(z)
        up[k] += h
        dn[k] -= h
        xu, _ = _forward(chain, up)
        xd, _ = _forward(chain, dn)
        cols.append([(a - b) / (2 * h) for a, b in zip(xu, xd)])
    matrix = [[cols[k][j] for k in range(n)] for j in range(n)]
    return det(matrix)


def _band_check(values, bound):
    ref = values[0]
    if ref == 0:
        return False, 0, None
    for i, v in enumerate(values):
        r = v / ref
        if not (1 / bound <= r <= bound):
            return False, i, float(r)
    return True, None, None


def verify_chart(f, leaf, cfg=None, seed=0, monomial=None):
    """Sample f through the leaf's chain on the punctured box and check that
    f / z^monomial and J / z^jacobian_monomial stay inside a fixed band with a constant sign."""
    cfg = cfg or ResolutionConfig()
    monomial = tuple(monomial if monomial is not None else leaf.monomial)
    jmono = tuple(leaf.jacobian_monomial)
    n = f.nvars
    rng = random.Random(seed)
    r = cfg.radius
    ref = [r / 4] * n
    pts = [ref] + _sample_points(n, cfg.samples, r, rng)
    fvals = []
    jvals = []
    for z in pts:
        x, points = _forward(leaf.chain, z)
        fvals.append(float(eval_exact(f, x) / _monomial_value(z, monomial)))
        jac = Fraction(1)
        for move, pt in zip(reversed(leaf.chain), points):
            jac *= move.jacobian(pt)
        jvals.append(float(jac / _monomial_value(z, jmono)))
    ok_f, bad_f, ratio_f = _band_check(fvals, cfg.bound)
    ok_j, bad_j, ratio_j = _band_check(jvals, cfg.bound)
    fd = []
    for z in pts[1:4]:
        exact = chain_jacobian(leaf.chain, z)
        approx = _finite_difference_jacobian(leaf.chain, z)
        rel = abs(float(approx - exact)) / max(abs(float(exact)), 1e-300)
        fd.append(rel)
    ok_fd = all(v <= 1e-6 for v in fd)
    cert = {
        "ok": ok_f and ok_j and ok_fd,
        "seed": seed,
        "samples": cfg.samples,
        "radius": str(r),
        "unit_range": [min(fvals), max(fvals)],
        "function_band": [min(v / fvals[0] for v in fvals), max(v / fvals[0] for v in fvals)] if fvals[0] else None,
        "jacobian_band": [min(v / jvals[0] for v in jvals), max(v / jvals[0] for v in jvals)] if jvals[0] else None,
        "finite_difference_rel_error": max(fd) if fd else 0.0,
    }
    if not ok_f:
        cert["witness"] = {"kind": "function", "point": [str(v) for v in pts[bad_f]], "ratio": ratio_f}
    elif not ok_j:
        cert["witness"] = {"kind": "jacobian", "point": [str(v) for v in pts[bad_j]], "ratio": ratio_j}
    elif not ok_fd:
        cert["witness"] = {"kind": "finite_difference", "errors": fd}
    for key in ("unit_range", "function_band", "jacobian_band"):
        if cert[key]:
            cert[key] = [round(v, 12) for v in cert[key]]
    cert["finite_difference_rel_error"] = float(f"{cert['finite_difference_rel_error']:.3e}")
    return cert


def sibling_disjointness(res, samples=200, seed=0):
    """For each fan node, map samples of each child box forward and make sure no
    sibling box contains them (real semantics)."""
    cfg = res.config
    r = float(cfg.radius)
    rng = random.Random(seed)
    overlaps = []
    checked = 0
    for node in res.root.walk():
        if node.tag != "subresolution":
            continue
        regions = []
        for chart in node.children:
            if chart.is_leaf:
                regions.append([chart.moves[0]])
            for child in chart.children:
                if child.moves:
                    regions.append(chart.moves + child.moves)
        for i, A in enumerate(regions):
            for j, B in enumerate(regions):
                if i == j:
                    continue
                n = res.f.nvars
                for z in _sample_points(n, samples, cfg.radius, rng, 1024):
                    y = list(z)
                    for move in reversed(A):
                        y = move.apply(y)
                    checked += 1
                    if _in_box(B, [float(v) for v in y], r):
                        overlaps.append({"from": i, "into": j, "point": [str(v) for v in z]})
                        break
    return {"ok": not overlaps, "pairs_checked": checked, "overlaps": overlaps}


def _in_box(chain, y, r):
    candidates = [y]
    for move in chain:
        nxt = []
        for pt in candidates:
            nxt.extend(move.preimages(pt))
        candidates = nxt
    return any(all(abs(v) < r for v in pt) for pt in candidates)


def corrupt_leaf(leaf, index=0):
    """Copy of a leaf whose claimed monomial is off by one in one exponent."""
    mono = list(leaf.monomial)
    mono[index] += 1
    return ChartNode(leaf.tag, leaf.moves, m=leaf.m, monomial=tuple(mono), jacobian_monomial=leaf.jacobian_monomial, chain=list(leaf.chain), depth=leaf.depth)
