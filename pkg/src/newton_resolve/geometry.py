"""Newton polyhedra with exact arithmetic: facets, faces, distance, growth prediction."""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .linalg import nullspace, primitive, rank, dot
from .poly import Polynomial, derivative, eval_array
from . import univariate

import numpy as np


@dataclass(frozen=True)
class Facet:
    normal: tuple
    offset: int

    def __post_init__(self):
        if any(a < 0 for a in self.normal) or not any(self.normal):
            raise ValueError(f"invalid facet normal {self.normal}")

    def value(self, point):
        return dot(self.normal, point)

    def to_json(self):
        return {"normal": list(self.normal), "offset": self.offset}


@dataclass(frozen=True)
class Face:
    dim: int
    active_facets: tuple
    vertex_set: tuple
    compact: bool
    rays: tuple = ()

    def contains_face(self, other):
        return set(other.vertex_set) <= set(self.vertex_set) and set(other.rays) <= set(self.rays)

    def to_json(self, vertices=None):
        out = {
            "dim": self.dim,
            "active_facets": list(self.active_facets),
            "compact": self.compact,
        }
        if vertices is not None:
            out["vertex_indices"] = [vertices.index(v) for v in self.vertex_set]
        out["vertices"] = [list(v) for v in self.vertex_set]
        return out


@dataclass
class NewtonPolyhedron:
    nvars: int
    vertices: list
    facets: list
    faces: list
    support: list

    @property
    def compact_faces(self):
        return [F for F in self.faces if F.compact]

    def contains(self, point):
        return all(F.value(point) >= F.offset for F in self.facets)

    def face_of(self, facet_indices):
        """The face cut out by the equalities of the given facets."""
        facet_indices = sorted(set(facet_indices))
        verts = tuple(v for v in self.vertices if all(self.facets[j].value(v) == self.facets[j].offset for j in facet_indices))
        rays = tuple(i for i in range(self.nvars) if all(self.facets[j].normal[i] == 0 for j in facet_indices))
        return self._make_face(verts, rays)

    def _make_face(self, verts, rays):
        active = tuple(
            j
            for j, F in enumerate(self.facets)
            if all(F.value(v) == F.offset for v in verts) and all(F.normal[i] == 0 for i in rays)
        )
        return Face(_affine_dim(verts, rays, self.nvars), active, verts, not rays, rays)

    def to_json(self):
        return {
            "nvars": self.nvars,
            "vertices": [list(v) for v in self.vertices],
            "facets": [F.to_json() for F in self.facets],
            "faces": [F.to_json(self.vertices) for F in self.compact_faces],
        }


def _affine_dim(verts, rays, n):
    if not verts:
        return -1
    base = verts[0]
    dirs = [[a - b for a, b in zip(v, base)] for v in verts[1:]]
    for i in rays:
        dirs.append([int(j == i) for j in range(n)])
    return rank(dirs) if dirs else 0


def _nondominated(points):
    pts = sorted(set(points))
    keep = []
    for p in pts:
        if any(q != p and all(a <= b for a, b in zip(q, p)) for q in pts):
            continue
        keep.append(p)
    return keep


def newton_polyhedron(f):
    if f.is_zero():
        raise ValueError("the zero polynomial has no Newton polyhedron")
    n = f.nvars
    support = sorted(f.terms)
    pts = _nondominated(support)
    units = [tuple(int(j == i) for j in range(n)) for i in range(n)]
    normals = set()
    if n == 1:
        normals.add((1,))
    else:
        for p0 in pts:
            dirs = [tuple(a - b for a, b in zip(p, p0)) for p in pts if p != p0] + units
            for chosen in combinations(dirs, n - 1):
                if rank(chosen) != n - 1:
                    continue
                (v,) = nullspace([list(c) for c in chosen])
                a = primitive(v)
                if all(x <= 0 for x in a):
                    a = tuple(-x for x in a)
                if any(x < 0 for x in a):
                    continue
                b = dot(a, p0)
                if all(dot(a, q) >= b for q in pts):
                    normals.add(a)
    facets = sorted(
        (Facet(a, min(dot(a, q) for q in pts)) for a in normals), key=lambda F: F.normal
    )
    vertices = []
    for p in pts:
        tight = [F.normal for F in facets if F.value(p) == F.offset]
        if len(tight) >= n and rank(tight) == n:
            vertices.append(p)
    N = NewtonPolyhedron(n, sorted(vertices), facets, [], support)
    N.faces = _enumerate_faces(N)
    return N


def _enumerate_faces(N):
    n = N.nvars
    tight_sets = []
    for F in N.facets:
        verts = frozenset(v for v in N.vertices if F.value(v) == F.offset)
        rays = frozenset(i for i in range(n) if F.normal[i] == 0)
        tight_sets.append((verts, rays))
    found = set(tight_sets)
    frontier = list(found)
    while frontier:
        new = []
        for a in frontier:
            for b in tight_sets:
                c = (a[0] & b[0], a[1] & b[1])
                if c[0] and c not in found:
                    found.add(c)
                    new.append(c)
        frontier = new
    faces = [N._make_face(tuple(sorted(v)), tuple(sorted(r))) for v, r in found]
    faces.sort(key=lambda F: (F.dim, not F.compact, F.vertex_set, F.rays))
    return faces


def compact_faces(N):
    return N.compact_faces


def face_polynomial(f, F, N=None):
    if N is not None and not set(F.vertex_set) <= set(N.vertices):
        raise ValueError("face does not belong to this polyhedron")
    if N is None:
        N = newton_polyhedron(f)
        if not set(F.vertex_set) <= set(N.vertices):
            raise ValueError("face does not belong to this polyhedron")
    eqs = [N.facets[j] for j in F.active_facets]
    return Polynomial(f.nvars, {e: c for e, c in f.terms.items() if all(H.value(e) == H.offset for H in eqs)})


def newton_distance(N):
    return max(Fraction(F.offset, sum(F.normal)) for F in N.facets)


def central_face(N):
    d = newton_distance(N)
    tight = [j for j, F in enumerate(N.facets) if F.offset == d * sum(F.normal)]
    face = N.face_of(tight)
    return face, face.dim


# zero orders of face polynomials


def _edge_reduction(fF):
    """One-variable polynomial whose nonzero roots encode torus zeros of a 2-variable
    quasi-homogeneous polynomial supported on a segment."""
    support = sorted(fF.terms)
    base = support[0]
    if len(support) == 1:
        return None
    diffs = [tuple(a - b for a, b in zip(e, base)) for e in support[1:]]
    step = primitive(diffs[0])
    if step[0] < 0 or (step[0] == 0 and step[1] < 0):
        step = tuple(-x for x in step)
    coeffs = {}
    for e, c in fF.terms.items():
        delta = tuple(a - b for a, b in zip(e, base))
        k = next(Fraction(x, s) for x, s in zip(delta, step) if s)
        if k.denominator != 1 or any(x != k * s for x, s in zip(delta, step)):
            raise ValueError("face polynomial is not supported on a lattice segment")
        coeffs[int(k)] = c
    deg = max(coeffs)
    return [coeffs.get(k, Fraction(0)) for k in range(deg + 1)]


DEFAULT_CHECK_PRIMES = (31, 37, 41, 43, 47)


def face_zero_order(fF, F=None, method="auto", field="real", p=None, primes=None, value=None, seed=0):
    """Maximum order of a zero of fF on the torus (K minus 0)^n.

    Returns (order, certainty) with certainty one of exact, heuristic,
    override, unknown.
    """
    if method == "user_override":
        return int(value), "override"
    if fF.is_zero():
        raise ValueError("zero face polynomial")
    if fF.is_monomial():
        return 0, "exact"
    n = fF.nvars
    if method == "auto":
        method = "exact2d" if n <= 2 else "gradient_check"
    if method == "exact2d":
        if n != 2:
            raise ValueError("exact2d applies to two variables only")
        coeffs = _edge_reduction(fF)
        mult, exact = univariate.max_root_multiplicity(coeffs, field, p)
        return mult, "exact" if exact else "heuristic"
    if method in ("gradient_check", "sampled"):
        return _gradient_check(fF, field, p, primes or DEFAULT_CHECK_PRIMES, seed)
    raise ValueError(f"unknown method {method!r}")


def _torus_zero_exists(fF, field, p, seed):
    """True when a zero on the torus is certified, None when none was found."""
    if field == "complex":
        return True
    if field == "real":
        rng = np.random.default_rng(seed)
        n = fF.nvars
        for signs in np.array(np.meshgrid(*[[-1.0, 1.0]] * n)).T.reshape(-1, n):
            X = np.exp(rng.uniform(-2.0, 2.0, size=(4000, n))) * signs
            vals = eval_array(fF, X)
            if (vals > 0).any() and (vals < 0).any():
                return True
        return None
    # p-adic: a simple zero mod p with unit coordinates lifts by Hensel's lemma
    for x, val, grads in _residue_scan(fF, p):
        if val == 0 and any(g != 0 for g in grads):
            return True
    return None


def _residue_scan(fF, p):
    n = fF.nvars
    D, ints = fF.scaled_integer()
    if D % p == 0:
        return
    grads = [derivative(fF, i + 1) for i in range(n)]
    gints = [g.scaled_integer()[1] for g in grads]
    grid = np.array(np.meshgrid(*[np.arange(1, p)] * n, indexing="ij")).reshape(n, -1).T
    vals = _mod_eval(ints, grid, p)
    gvals = [_mod_eval(gi, grid, p) for gi in gints]
    for idx in range(grid.shape[0]):
        yield tuple(grid[idx]), int(vals[idx]), [int(g[idx]) for g in gvals]


def _mod_eval(ints, grid, q):
    out = np.zeros(grid.shape[0], dtype=np.int64)
    for e, c in ints.items():
        t = np.full(grid.shape[0], c % q, dtype=np.int64)
        for i, k in enumerate(e):
            if k:
                t = t * _powmod(grid[:, i], k, q) % q
        out = (out + t) % q
    return out


def _powmod(x, k, q):
    result = np.ones_like(x)
    base = x % q
    while k:
        if k & 1:
            result = result * base % q
        base = base * base % q
        k >>= 1
    return result


def _gradient_check(fF, field, p, primes, seed):
    n = fF.nvars
    D, ints = fF.scaled_integer()
    grads = [derivative(fF, i + 1).scaled_integer()[1] for i in range(n)]
    singular = False
    for q in primes:
        if D % q == 0:
            continue
        grid = np.array(np.meshgrid(*[np.arange(1, q)] * n, indexing="ij")).reshape(n, -1).T
        zero = _mod_eval(ints, grid, q) == 0
        for g in grads:
            if not zero.any():
                break
            zero &= _mod_eval(g, grid, q) == 0
        if zero.any():
            singular = True
            break
    exists = _torus_zero_exists(fF, field, p, seed)
    if singular:
        return None, "unknown"
    if exists:
        return 1, "heuristic"
    return 0, "heuristic"


@dataclass
class GrowthPrediction:
    field: str
    b_K: int
    d: Fraction
    k: int
    case: str
    decay: Fraction
    log_power: int
    log_power_upper: int
    upper_decay: Fraction
    s: object = None
    face_orders: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    nvars: int = 0

    @property
    def log_bracket(self):
        return [self.log_power, self.log_power_upper]

    def to_json(self):
        return {
            "field": self.field,
            "b_K": self.b_K,
            "d": str(self.d),
            "k": self.k,
            "case": self.case,
            "s": None if self.s is None else str(self.s),
            "decay_exponent": str(self.decay),
            "upper_decay_exponent": str(self.upper_decay),
            "log_power": self.log_power if self.case == "a" else None,
            "log_power_bracket": self.log_bracket,
            "upper_bound_only": self.case == "c",
            "face_orders": self.face_orders,
            "flags": list(self.flags),
        }


FIELD_WEIGHT = {"real": 1, "complex": 2, "padic": 1}


def predict_growth(f, field="real", p=None, overrides=None, method="auto"):
    """Classify f into the three growth regimes and fill in the exponents.

    overrides maps a face's vertex tuple to a user-supplied zero order.
    """
    if field not in FIELD_WEIGHT:
        raise ValueError(f"unknown field {field!r}")
    if field == "padic" and not p:
        raise ValueError("p-adic predictions need a prime")
    if f.is_zero():
        raise ValueError("zero polynomial")
    if f.constant_term():
        raise ValueError("f(0) must vanish")
    N = newton_polyhedron(f)
    d = newton_distance(N)
    central, k = central_face(N)
    n = f.nvars
    orders = []
    flags = []
    for F in N.compact_faces:
        fF = face_polynomial(f, F, N)
        if overrides and F.vertex_set in overrides:
            o, cert = face_zero_order(fF, F, "user_override", value=overrides[F.vertex_set])
        else:
            o, cert = face_zero_order(fF, F, method, field=field, p=p)
        inside = central.contains_face(F)
        orders.append({"vertices": [list(v) for v in F.vertex_set], "dim": F.dim, "o": o, "certainty": cert, "in_central_face": inside})
        if cert != "exact":
            flags.append(f"o(F) for face {[list(v) for v in F.vertex_set]} is {cert}")
    known = [r["o"] for r in orders if r["o"] is not None]
    if len(known) < len(orders):
        flags.append("some zero orders are unknown; classification uses the known ones")
    b_K = FIELD_WEIGHT[field]
    s = None
    if any(o > d for o in known):
        case = "c"
        s = max(known)
    elif any(r["o"] == d and r["in_central_face"] for r in orders if r["o"] is not None):
        case = "b"
    else:
        case = "a"
    decay = Fraction(b_K) / d
    low = n - k - 1
    if case == "a":
        high, upper = low, decay
    elif case == "b":
        high, upper = n - k, decay
    else:
        high, upper = 0, Fraction(b_K) / s
    return GrowthPrediction(field, b_K, d, k, case, decay, low, high, upper, s, orders, flags, n)
