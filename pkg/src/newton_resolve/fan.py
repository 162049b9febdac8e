"""Monomial chart atlas built from the normal fan of a Newton polyhedron."""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
import math

import numpy as np

from .geometry import newton_polyhedron, newton_distance, central_face, face_polynomial
from .linalg import det, inverse, matvec, nullspace, primitive, rank, solve, transpose, dot
from .poly import Polynomial, compose_monomial, eval_array, format_polynomial
from . import univariate


def canonical_key(g):
    s = sum(g)
    return tuple(-Fraction(x, s) for x in g) + tuple(-x for x in g)


@dataclass(frozen=True)
class Cone:
    generators: tuple

    def __post_init__(self):
        gens = tuple(tuple(int(x) for x in g) for g in self.generators)
        for g in gens:
            if any(x < 0 for x in g) or not any(g):
                raise ValueError(f"generator {g} is not a nonzero nonnegative vector")
            if math.gcd(*g) != 1:
                raise ValueError(f"generator {g} is not primitive")
        for g, h in combinations(gens, 2):
            if rank([g, h]) < 2:
                raise ValueError(f"generators {g} and {h} are proportional")
        object.__setattr__(self, "generators", gens)

    @property
    def dim(self):
        return rank(self.generators) if self.generators else 0

    def is_simplicial(self):
        return len(self.generators) == self.dim

    def contains(self, v, strict=False):
        """Whether v lies in the cone (its relative interior if strict); simplicial cones only."""
        gens = list(self.generators)
        r = len(gens)
        if r == 0:
            return False
        A = transpose(gens)
        # least-squares-free exact solve on a set of independent rows
        rows = _independent_rows(A, r)
        try:
            coef = solve([A[i] for i in rows], [v[i] for i in rows])
        except ValueError:
            return False
        if any(dot(row, coef) != v[i] for i, row in enumerate(A)):
            return False
        if strict:
            return all(c > 0 for c in coef)
        return all(c >= 0 for c in coef)


def _independent_rows(A, r):
    chosen = []
    for i in range(len(A)):
        if rank([A[j] for j in chosen + [i]]) > len(chosen):
            chosen.append(i)
        if len(chosen) == r:
            break
    return chosen


@dataclass(frozen=True)
class MonomialMap:
    """x_j = prod_k z_k^matrix[j][k]."""

    matrix: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(int(v) for v in row) for row in self.matrix))
        if det(self.matrix) == 0:
            raise ValueError("monomial map matrix is singular")

    @classmethod
    def from_columns(cls, columns):
        n = len(columns)
        return cls(tuple(tuple(columns[k][j] for k in range(n)) for j in range(n)))

    @property
    def n(self):
        return len(self.matrix)

    @property
    def det(self):
        return int(det(self.matrix))

    def pullback_exponent(self, alpha):
        n = self.n
        return tuple(sum(self.matrix[j][k] * alpha[j] for j in range(n)) for k in range(n))

    def jacobian_exponents(self):
        n = self.n
        return tuple(sum(self.matrix[j][k] for j in range(n)) - 1 for k in range(n))

    def apply(self, z):
        n = self.n
        out = []
        for j in range(n):
            v = 1
            for k in range(n):
                if self.matrix[j][k]:
                    v = v * z[k] ** self.matrix[j][k]
            out.append(v)
        return out


@dataclass
class SubdivisionConfig:
    C: list = field(default_factory=lambda: [Fraction(2), Fraction(4)])

    def __post_init__(self):
        self.C = [Fraction(c) for c in self.C]
        if not self.C or self.C[0] <= 1 or any(b <= a for a, b in zip(self.C, self.C[1:])):
            raise ValueError("need 1 < C_1 < C_2 < ...")


@dataclass
class FaceChart:
    face: object
    map: MonomialMap
    a: tuple
    e: tuple
    unit: Polynomial
    multiplicity: int
    cone: Cone
    pullback: Polynomial
    tail_center: tuple = ()
    completion_vertex: tuple = None

    @property
    def i(self):
        return self.face.dim

    @property
    def n(self):
        return self.map.n

    @property
    def head(self):
        return self.n - self.i

    def ratios(self):
        return [Fraction(a, e + 1) for a, e in zip(self.a, self.e)]

    def to_json(self, d=None):
        out = {
            "face": [list(v) for v in self.face.vertex_set],
            "face_dim": self.i,
            "M": [list(r) for r in self.map.matrix],
            "det": self.map.det,
            "a": list(self.a),
            "e": list(self.e),
            "unit": format_polynomial(self.unit),
            "n_m": self.multiplicity,
            "ratios": [str(r) for r in self.ratios()],
        }
        if self.tail_center:
            out["tail_center"] = [str(c) for c in self.tail_center]
        return out


def normal_cone(N, F):
    if not F.compact:
        raise ValueError("normal cones are built for compact faces only")
    gens = sorted((N.facets[j].normal for j in F.active_facets), key=canonical_key)
    return Cone(tuple(gens))


def _span_coordinates(vectors, basis):
    A = transpose([list(b) for b in basis])
    rows = _independent_rows(A, len(basis))
    sub = [A[i] for i in rows]
    return [solve(sub, [v[i] for i in rows]) for v in vectors]


def triangulate(cone):
    """Placing triangulation in canonical generator order."""
    gens = sorted(cone.generators, key=canonical_key)
    r = rank(gens) if gens else 0
    if r == 0:
        raise ValueError("degenerate cone")
    if len(gens) == r:
        return [Cone(tuple(gens))]
    start = []
    for g in gens:
        if rank(start + [g]) > len(start):
            start.append(g)
        if len(start) == r:
            break
    coords = dict(zip(gens, _span_coordinates(gens, start)))
    simplices = [tuple(start)]
    for g in gens:
        if g in start:
            continue
        facet_count = {}
        owner = {}
        for S in simplices:
            for sub in combinations(S, r - 1):
                key = frozenset(sub)
                facet_count[key] = facet_count.get(key, 0) + 1
                owner[key] = S
        added = []
        for key, count in facet_count.items():
            if count != 1:
                continue
            S = owner[key]
            sub = [h for h in S if h in key]
            apex = next(h for h in S if h not in key)
            (normal,) = nullspace([coords[h] for h in sub], r) if r > 1 else ([Fraction(1)],)
            side = dot(normal, coords[apex])
            if side < 0:
                normal = [-x for x in normal]
            if dot(normal, coords[g]) < 0:
                added.append(tuple(sorted(sub + [g], key=canonical_key)))
        simplices.extend(added)
    simplices.sort(key=lambda S: [canonical_key(g) for g in S])
    return [Cone(S) for S in simplices]


def _complete(N, F, head):
    """Extend the head generators to n independent ones using facet normals at the
    lex-least vertex of the face."""
    v = min(F.vertex_set)
    n = N.nvars
    at_v = sorted((G.normal for G in N.facets if G.value(v) == G.offset), key=canonical_key)
    tail = []
    for w in at_v:
        if w in head:
            continue
        if rank(list(head) + tail + [w]) > len(head) + len(tail):
            tail.append(w)
        if len(head) + len(tail) == n:
            break
    if len(head) + len(tail) != n:
        raise ValueError("could not complete the cone to a full chart")
    return tail, v


TAIL_CANDIDATES = [Fraction(1), Fraction(-1), Fraction(2), Fraction(-2), Fraction(1, 2), Fraction(-1, 2), Fraction(3), Fraction(-3)]


def regular_tail_point(U, head):
    """A point of the tail torus where U(0, c) is comfortably nonzero."""
    n = U.nvars
    restricted = U.restrict_zero(range(1, head + 1))
    tail_dim = n - head
    if tail_dim == 0:
        return ()
    if tail_dim == 1:
        coeffs = [Fraction(0)] * (restricted.degree() + 1)
        for e, c in restricted.terms.items():
            coeffs[e[-1]] = c
        roots = [r for r, _, _ in univariate.real_roots(coeffs)] if restricted.degree() > 0 else []
        for c in TAIL_CANDIDATES:
            value = sum((coef * c**k for k, coef in enumerate(coeffs)), Fraction(0))
            if value and all(abs(float(c) - r) >= 0.5 for r in roots):
                return (c,)
        raise ValueError("no regular tail point among the candidates")
    for cand in product(TAIL_CANDIDATES, repeat=tail_dim):
        point = (Fraction(0),) * head + cand
        terms = [c * math.prod(x**k for x, k in zip(point, e)) for e, c in restricted.terms.items()]
        value = sum(terms, Fraction(0))
        scale = sum(abs(t) for t in terms)
        if value and abs(value) * 4 >= scale:
            return cand
    raise ValueError("no regular tail point among the candidates")


def cone_to_chart(f, F, sigma, N=None):
    """Chart attached to face F and a simplicial cone sigma inside F's normal cone.

    sigma may hold n - dim(F) generators (it is then completed at the lex-least
    vertex of F) or already n generators.
    """
    N = N or newton_polyhedron(f)
    n = f.nvars
    if not sigma.is_simplicial():
        raise ValueError("cone is not simplicial")
    head_count = n - F.dim
    gens = list(sigma.generators)
    face_cone = normal_cone(N, F) if F.compact else None
    if len(gens) == head_count:
        for g in gens:
            if not _minimised_on(N, g, F):
                raise ValueError(f"generator {g} is not in the normal cone of the face")
        tail, v = _complete(N, F, gens) if head_count < n else ([], None)
        columns = gens + tail
    elif len(gens) == n:
        columns = gens
        v = None
        for g in gens:
            if not any(dot(g, u) == min(dot(g, w) for w in N.vertices) for u in F.vertex_set):
                raise ValueError(f"generator {g} is outside the fan")
    else:
        raise ValueError("cone has the wrong number of generators")
    M = MonomialMap.from_columns(columns)
    pull = compose_monomial(f, M)
    mins = pull.min_exponents()
    a = tuple(mins[j] if j < head_count else 0 for j in range(n))
    U = pull.divide_monomial(a)
    e = M.jacobian_exponents()
    center = regular_tail_point(U, head_count) if head_count < n else ()
    return FaceChart(F, M, a, e, U, abs(M.det), Cone(tuple(gens)), pull, center, v)


def _minimised_on(N, g, F):
    low = min(dot(g, w) for w in N.vertices)
    return all(dot(g, u) == low for u in F.vertex_set)


def chart_atlas(f, N=None):
    if f.is_zero():
        raise ValueError("zero polynomial")
    if f.constant_term():
        raise ValueError("f(0) must vanish")
    N = N or newton_polyhedron(f)
    charts = []
    for F in N.compact_faces:
        for sigma in triangulate(normal_cone(N, F)):
            charts.append(cone_to_chart(f, F, sigma, N))
    return charts


# exponent relations


def check_distance_relation(chart, d, k):
    n = chart.n
    head = chart.head
    ratios = chart.ratios()
    eq = sum(1 for j in range(head) if ratios[j] == d)
    bounded = all(r <= d for r in ratios)
    return {
        "ratios": [str(r) for r in ratios],
        "all_bounded": bounded,
        "equality_count": eq,
        "ok": bounded and eq <= n - k,
    }


def check_atlas_distance(f, atlas=None, N=None):
    N = N or newton_polyhedron(f)
    atlas = atlas if atlas is not None else chart_atlas(f, N)
    d = newton_distance(N)
    central, k = central_face(N)
    n = f.nvars
    reports = []
    attained = False
    misplaced = []
    for idx, chart in enumerate(atlas):
        rep = check_distance_relation(chart, d, k)
        rep["face"] = [list(v) for v in chart.face.vertex_set]
        rep["face_in_central"] = central.contains_face(chart.face)
        reports.append(rep)
        if rep["equality_count"] == n - k:
            attained = True
        if rep["equality_count"] and not rep["face_in_central"]:
            misplaced.append(idx)
    ok = all(r["ok"] for r in reports) and attained and not misplaced
    return {
        "d": str(d),
        "k": k,
        "charts": reports,
        "max_equality_attained": attained,
        "equality_outside_central_face": misplaced,
        "ok": ok,
    }


def check_factorization(f, chart):
    """Exact checks: pullback = z^a U, U not divisible by head variables, vertex units,
    face restriction, and exponent domination."""
    n = chart.n
    head = chart.head
    pull = compose_monomial(f, chart.map)
    problems = []
    if pull != chart.unit.shift_exponents(chart.a):
        problems.append("pullback differs from z^a U")
    Umins = chart.unit.min_exponents()
    for j in range(head):
        if Umins[j] > 0:
            problems.append(f"U divisible by z{j + 1}")
    if chart.i == 0 and chart.unit.constant_term() == 0:
        problems.append("vertex chart unit vanishes at 0")
    if chart.i > 0:
        N = newton_polyhedron(f)
        fF = face_polynomial(f, chart.face, N)
        restricted = chart.unit.restrict_zero(range(1, head + 1))
        if restricted != compose_monomial(fF, chart.map).divide_monomial(chart.a):
            problems.append("U restricted to the head axes is not the pulled back face polynomial")
        if restricted.is_zero():
            problems.append("face restriction vanishes")
    face_points = [alpha for alpha in f.terms if _on_face(alpha, chart)]
    for alpha in f.terms:
        ga = chart.map.pullback_exponent(alpha)
        for beta in face_points:
            gb = chart.map.pullback_exponent(beta)
            if any(gb[m] > ga[m] for m in range(head)):
                problems.append(f"domination fails for {alpha}")
        on = alpha in face_points
        if face_points:
            gb = chart.map.pullback_exponent(face_points[0])
            equal = all(gb[m] == ga[m] for m in range(head))
            if equal != on:
                problems.append(f"equality pattern wrong for {alpha}")
    return {"ok": not problems, "problems": sorted(set(problems))}


def _on_face(alpha, chart):
    verts = chart.face.vertex_set
    head_gens = chart.cone.generators[: chart.head]
    return all(dot(g, alpha) == dot(g, verts[0]) for g in head_gens)


def unit_certificate(chart, samples=1000, radius=0.05, bound=100.0, seed=0):
    """Sample U on the punctured head box (tail coordinates near the tail center)
    and check it stays within a factor `bound` of its reference value with one sign."""
    rng = np.random.default_rng(seed)
    n = chart.n
    head = chart.head
    center = np.array([0.0] * head + [float(c) for c in chart.tail_center])
    Z = rng.uniform(-radius, radius, size=(samples, n))
    Z[Z == 0] = radius / 2
    Z = Z + center
    ref = center.copy()
    ref[:head] = radius / 4
    vals = eval_array(chart.unit, Z)
    ref_val = float(eval_array(chart.unit, ref[None, :])[0])
    if ref_val == 0:
        return {"ok": False, "reason": "unit vanishes at the reference point", "witness": ref.tolist()}
    ratio = vals / ref_val
    bad = np.nonzero((ratio < 1.0 / bound) | (ratio > bound))[0]
    if bad.size:
        i = int(bad[0])
        return {"ok": False, "reason": "unit magnitude outside the band", "witness": Z[i].tolist(), "ratio": float(ratio[i])}
    return {
        "ok": True,
        "samples": samples,
        "radius": radius,
        "ratio_range": [float(ratio.min()), float(ratio.max())],
        "reference_value": ref_val,
    }


def region_membership(chart, cfg, z):
    """Whether the original-coordinate point z lies in the chart's region: the chart
    coordinates of z are small on the head and bounded by C_1 on the tail, and z is
    inside the box |z_j| < 1/C_n."""
    if any(x == 0 for x in z):
        raise ValueError("region membership needs a point with nonzero coordinates")
    logs = [-math.log(abs(float(x))) for x in z]
    Minv = [[float(v) for v in row] for row in inverse(chart.map.matrix)]
    u = [sum(Minv[k][j] * logs[j] for j in range(chart.n)) for k in range(chart.n)]
    c1 = math.log(float(cfg.C[0]))
    cn = float(cfg.C[-1])
    if any(abs(float(x)) >= 1 / cn for x in z):
        return False
    head = chart.head
    if any(u[j] < 0 for j in range(head)):
        return False
    return all(abs(u[j]) <= c1 for j in range(head, chart.n))
