"""Numerical experiments: counting mod p^l, exponential sums, sublevel volumes,
oscillatory integrals and growth-exponent fits."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
import math
import os
import time

import numpy as np

from .poly import eval_array

DEFAULT_CAP = 10**6


class CapExceeded(ValueError):
    pass


class HenselBlowup(RuntimeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


def thread_count(threads=None):
    if threads is None:
        threads = os.environ.get("NEWTON_RESOLVE_THREADS")
    threads = int(threads) if threads else 1
    if threads < 1:
        raise ValueError("threads must be positive")
    return threads


def _integer_terms(f, p):
    """Terms of D*f with D the coefficient denominator; D must be prime to p."""
    D, ints = f.scaled_integer()
    if D % p == 0:
        raise ValueError(f"coefficient denominators are divisible by {p}; pre-scale or rescale f")
    return [(e, c) for e, c in sorted(ints.items())]


def _check_prime(p):
    if p < 2 or any(p % q == 0 for q in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"{p} is not a prime")


# series types


@dataclass
class CountSeries:
    p: int
    nvars: int
    levels: list
    values: list
    strategy: str
    seconds: float = 0.0

    def counts(self):
        return [int(v * self.p ** (l * self.nvars)) for l, v in zip(self.levels, self.values)]

    def rows(self):
        return [{"p": self.p, "l": l, "N_l": str(v), "count": c} for l, v, c in zip(self.levels, self.values, self.counts())]

    def to_json(self):
        return {"kind": "count", "p": self.p, "strategy": self.strategy, "rows": self.rows()}


@dataclass
class ExpSumSeries:
    p: int
    levels: list
    values: list
    strategy: str
    seconds: float = 0.0

    def rows(self):
        return [
            {"p": self.p, "l": l, "re": _r(v.real), "im": _r(v.imag), "abs": _r(abs(v))}
            for l, v in zip(self.levels, self.values)
        ]

    def to_json(self):
        return {"kind": "expsum", "p": self.p, "strategy": self.strategy, "rows": self.rows()}


@dataclass
class VolumeEstimate:
    eps: float
    value: float
    stderr: float
    hits: int
    samples: int
    method: str


@dataclass
class VolumeTable:
    field: str
    radius: float
    estimates: list

    def rows(self):
        return [
            {"eps": e.eps, "volume": _r(e.value), "stderr": _r(e.stderr), "hits": e.hits, "samples": e.samples, "method": e.method}
            for e in self.estimates
        ]

    def to_json(self):
        return {"kind": "volume", "field": self.field, "radius": self.radius, "rows": self.rows()}


def _r(x, digits=12):
    return float(f"{x:.{digits}g}")


# exact counting


def _value_grid(f, p, modulus, level):
    """f(x) mod `modulus` over all x in {0, ..., p^level - 1}^n, as an n-dim int64 array."""
    q = p**level
    n = f.nvars
    if modulus > 3 * 10**9:
        raise CapExceeded("modulus too large for the vectorised brute force")
    xs = np.arange(q, dtype=np.int64)
    powers = {}

    def power(k):
        if k not in powers:
            v = np.ones(q, dtype=np.int64)
            for _ in range(k):
                v = v * (xs % modulus) % modulus
            powers[k] = v
        return powers[k]

    total = np.zeros((q,) * n, dtype=np.int64)
    for e, c in _integer_terms(f, p):
        term = np.full((1,) * n, c % modulus, dtype=np.int64)
        for i, k in enumerate(e):
            shape = [1] * n
            shape[i] = q
            term = term * power(k).reshape(shape) % modulus
        total = (total + term) % modulus
    return total


def count_brute(f, p, l, cap=DEFAULT_CAP):
    _check_prime(p)
    n = f.nvars
    if p ** (l * n) > cap:
        raise CapExceeded(f"p^(l n) = {p}^{l * n} exceeds the cap {cap}")
    q = p**l
    vals = _value_grid(f, p, q, l)
    return Fraction(int(np.count_nonzero(vals == 0)), q**n)


def _valuation(v, p, cap):
    if v == 0:
        return cap
    k = 0
    while v % p == 0 and k < cap:
        v //= p
        k += 1
    return k


def _hensel_tree(f, p, L, max_balls=2_000_000):
    """Walk the ball tree and return integer numerators with denominator p^(L n + L)."""
    n = f.nvars
    terms = _integer_terms(f, p)
    grads = []
    for i in range(n):
        g = {}
        for e, c in terms:
            if e[i]:
                ee = list(e)
                ee[i] -= 1
                g[tuple(ee)] = g.get(tuple(ee), 0) + c * e[i]
        grads.append(list(g.items()))
    cap = 2 * L + 2
    mod = p**cap

    def ev(ts, x):
        total = 0
        for e, c in ts:
            t = c
            for xi, k in zip(x, e):
                if k:
                    t = t * pow(xi, k, mod)
            total += t
        return total % mod

    num = [0] * (L + 1)  # num[l] for l = 1..L
    den_exp = L * n + L
    balls = 0
    stack = [((0,) * n, 0)]
    while stack:
        x, j = stack.pop()
        balls += 1
        if balls > max_balls:
            raise HenselBlowup(f"more than {max_balls} balls", partial=None)
        if j > 0:
            w = _valuation(ev(terms, x), p, cap)
            e = min(_valuation(ev(g, x), p, cap) for g in grads) if grads else cap
        else:
            w = e = 0
        vol_exp = den_exp - j * n
        if j > 0 and e < j:
            k = j + e
            if w >= k:
                for l in range(1, L + 1):
                    num[l] += p ** (vol_exp - max(0, l - k))
            else:
                for l in range(1, min(w, L) + 1):
                    num[l] += p**vol_exp
            continue
        if j > 0 and w < j:
            for l in range(1, min(w, L) + 1):
                num[l] += p**vol_exp
            continue
        if j >= L:
            for l in range(1, L + 1):
                num[l] += p**vol_exp
            continue
        step = p**j
        for digits in np.ndindex(*(p,) * n):
            stack.append((tuple(xi + d * step for xi, d in zip(x, digits)), j + 1))
    return [Fraction(num[l], p**den_exp) for l in range(1, L + 1)], balls


def count_hensel(f, p, l, max_balls=2_000_000):
    _check_prime(p)
    return _hensel_tree(f, p, l, max_balls)[0][-1]


def count_series(f, p, levels, strategy="hensel", cap=DEFAULT_CAP, max_balls=2_000_000):
    """N_l for l in `levels` (exact)."""
    _check_prime(p)
    levels = sorted(set(levels))
    if not levels or levels[0] < 1:
        raise ValueError("levels must be positive")
    t = time.perf_counter()
    if strategy == "hensel":
        vals, _ = _hensel_tree(f, p, levels[-1], max_balls)
        values = [vals[l - 1] for l in levels]
    elif strategy == "brute":
        values = [count_brute(f, p, l, cap) for l in levels]
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return CountSeries(p, f.nvars, levels, values, strategy, time.perf_counter() - t)


def count_divisibility(f, p, l, strategy="hensel", cap=DEFAULT_CAP):
    if strategy == "brute":
        return count_brute(f, p, l, cap)
    if strategy == "hensel":
        return count_hensel(f, p, l)
    raise ValueError(f"unknown strategy {strategy!r}")


# exponential sums


def _character_sum(hist, modulus, u=1):
    """sum_v hist[v] e^{2 pi i u v / modulus} with compensated accumulation."""
    vs = np.nonzero(hist)[0]
    angles = 2 * np.pi * ((u * vs) % modulus) / modulus
    weights = hist[vs].astype(float)
    return complex(math.fsum(weights * np.cos(angles)), math.fsum(weights * np.sin(angles)))


def value_histogram(f, p, l, modulus=None, cap=DEFAULT_CAP):
    n = f.nvars
    if p ** (l * n) > cap:
        raise CapExceeded(f"p^(l n) = {p}^{l * n} exceeds the cap {cap}")
    modulus = modulus or p**l
    vals = _value_grid(f, p, modulus, l)
    return np.bincount(vals.ravel(), minlength=modulus)


def _stratified_sum(f, p, l, max_balls=2_000_000):
    """Exponential sum by the ball tree: balls where f is constant mod p^l contribute
    one character value, balls with a dominant linear term cancel."""
    n = f.nvars
    terms = _integer_terms(f, p)
    grads = []
    for i in range(n):
        g = {}
        for e, c in terms:
            if e[i]:
                ee = list(e)
                ee[i] -= 1
                g[tuple(ee)] = g.get(tuple(ee), 0) + c * e[i]
        grads.append(list(g.items()))
    q = p**l
    cap = 2 * l + 2
    mod = p**cap

    def ev(ts, x, m):
        total = 0
        for e, c in ts:
            t = c
            for xi, k in zip(x, e):
                if k:
                    t = t * pow(xi, k, m)
            total += t
        return total % m

    hist = {}
    balls = 0
    stack = [((0,) * n, 0)]
    while stack:
        x, j = stack.pop()
        balls += 1
        if balls > max_balls:
            raise HenselBlowup(f"more than {max_balls} balls")
        e = min(_valuation(ev(g, x, mod), p, cap) for g in grads) if j > 0 else 0
        if j >= l or (j > 0 and e < j):
            if j + e >= l:
                v = ev(terms, x, q)
                hist[v] = hist.get(v, 0) + p ** (n * (l - j))
            continue
        step = p**j
        for digits in np.ndindex(*(p,) * n):
            stack.append((tuple(xi + d * step for xi, d in zip(x, digits)), j + 1))
    arr = np.zeros(q, dtype=np.int64)
    for v, c in hist.items():
        arr[v] = c
    return arr


def exp_sum(f, p, l, strategy="brute", cap=DEFAULT_CAP):
    """S_l = p^(-l n) sum_x e^{2 pi i f(x) / p^l}."""
    _check_prime(p)
    if l == 0:
        return complex(1.0)
    q = p**l
    if strategy == "brute":
        hist = value_histogram(f, p, l, cap=cap)
    elif strategy == "stratified":
        hist = _stratified_sum(f, p, l)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    # the integer-scaled f differs from f by a unit D; S_l uses f itself
    D = f.content_denominator()
    u = pow(D, -1, q)
    total = _character_sum(hist, q, u)
    return total / float(p ** (l * f.nvars))


def exp_sum_series(f, p, levels, strategy="brute", cap=DEFAULT_CAP):
    t = time.perf_counter()
    values = [exp_sum(f, p, l, strategy, cap) for l in levels]
    return ExpSumSeries(p, list(levels), values, strategy, time.perf_counter() - t)


def exp_sum_family(f, p, l, char_level=None, cap=DEFAULT_CAP):
    """E(u) = p^(-l n) sum_x e^{2 pi i u f(x) / p^c} for u = 0..p^l - 1, with c = char_level (default l)."""
    c = l if char_level is None else char_level
    modulus = p**c
    hist = value_histogram(f, p, l, modulus=modulus, cap=cap)
    D = f.content_denominator()
    dinv = pow(D, -1, modulus)
    scale = float(p ** (l * f.nvars))
    return [_character_sum(hist, modulus, u * dinv % modulus) / scale for u in range(p**l)]


def cross_check_identity(f, p, l, char_level=None, cap=DEFAULT_CAP, tol=1e-9):
    """Compare N_l with p^(-l) sum_u E(u)."""
    count = count_brute(f, p, l, cap)
    family = exp_sum_family(f, p, l, char_level, cap)
    avg_re = math.fsum(v.real for v in family) / p**l
    avg_im = math.fsum(v.imag for v in family) / p**l
    err = abs(complex(avg_re, avg_im) - float(count))
    return {
        "p": p,
        "l": l,
        "character_level": l if char_level is None else char_level,
        "N_l": str(count),
        "character_average": [_r(avg_re), _r(avg_im)],
        "abs_error": _r(err, 6),
        "tolerance": tol,
        "ok": err <= tol,
    }


# sublevel volumes


def _sample_chunk(f, field, radius, size, seed, index):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
    n = f.nvars
    if field == "real":
        X = rng.uniform(-radius, radius, size=(size, n))
        return np.abs(eval_array(f, X))
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=(size, n)))
    theta = rng.uniform(0.0, 2 * np.pi, size=(size, n))
    return np.abs(eval_array(f, r * np.exp(1j * theta)))


def sublevel_sweep(f, field, eps_list, samples=10**7, seed=0, radius=0.5, threads=None, chunk=1 << 20):
    """Monte Carlo estimates of |{x in U : |f(x)| < eps}| for every eps, sharing one sample."""
    if field not in ("real", "complex"):
        raise ValueError("field must be real or complex")
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps must be positive")
    n = f.nvars
    box = (2 * radius) ** n if field == "real" else (math.pi * radius**2) ** n
    sizes = [chunk] * (samples // chunk) + ([samples % chunk] if samples % chunk else [])
    eps_arr = np.array(eps_list)

    def work(i):
        vals = _sample_chunk(f, field, radius, sizes[i], seed, i)
        vals.sort()
        return np.searchsorted(vals, eps_arr, side="left")

    workers = thread_count(threads)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(i) for i in range(len(sizes))]
    hits = np.sum(parts, axis=0) if parts else np.zeros(len(eps_list), dtype=np.int64)
    out = []
    for e, h in zip(eps_list, hits):
        frac = h / samples
        out.append(VolumeEstimate(e, float(box * frac), float(box * math.sqrt(frac * (1 - frac) / samples)), int(h), samples, "montecarlo"))
    return VolumeTable(field, radius, out)


def sublevel_volume(f, field, eps, sampler="montecarlo", samples=10**6, seed=0, radius=0.5, res=1000, threads=None):
    if sampler == "montecarlo":
        return sublevel_sweep(f, field, [eps], samples, seed, radius, threads).estimates[0]
    if sampler == "grid":
        return grid_volume(f, eps, res, radius)
    raise ValueError(f"unknown sampler {sampler!r}")


def grid_volume(f, eps, res=1000, radius=0.5):
    """Midpoint-grid estimate over the real box; error is of the order of the boundary cells."""
    n = f.nvars
    h = 2 * radius / res
    axis = -radius + h * (np.arange(res) + 0.5)
    hits = 0
    for idx in np.ndindex(*(res,) * (n - 1)):
        head = np.array([axis[i] for i in idx])
        X = np.empty((res, n))
        X[:, : n - 1] = head
        X[:, n - 1] = axis
        hits += int(np.count_nonzero(np.abs(eval_array(f, X)) < eps))
    vol = hits * h**n
    return VolumeEstimate(float(eps), vol, float("nan"), hits, res**n, f"grid({res})")


# oscillatory integrals


def oscillatory_integral(f, lambdas, res_factor=8.0, min_res=200, radius=1.0, max_points=4 * 10**6):
    """I(lambda) = int e^{i lambda f} phi with phi a product of cos^2 bumps on [-radius, radius]^n,
    by midpoint quadrature whose resolution grows with lambda."""
    n = f.nvars
    lambdas = [float(v) for v in lambdas]
    if any(v < 1 for v in lambdas) or lambdas != sorted(lambdas):
        raise ValueError("lambda values must be >= 1 and ascending")
    rows = []
    for lam in lambdas:
        res = max(min_res, int(math.ceil(res_factor * lam)))
        note = None
        if res**n > max_points:
            res = int(max_points ** (1.0 / n))
            note = "resolution capped; value unreliable"
        h = 2 * radius / res
        axis = -radius + h * (np.arange(res) + 0.5)
        bump = np.cos(np.pi * axis / (2 * radius)) ** 2
        total_re = []
        total_im = []
        for idx in np.ndindex(*(res,) * (n - 1)):
            X = np.empty((res, n))
            w = np.ones(res)
            for i, k in enumerate(idx):
                X[:, i] = axis[k]
                w = w * bump[k]
            X[:, n - 1] = axis
            w = w * bump
            phase = lam * eval_array(f, X)
            total_re.append(math.fsum(w * np.cos(phase)))
            total_im.append(math.fsum(w * np.sin(phase)))
        val = complex(math.fsum(total_re), math.fsum(total_im)) * h**n
        row = {"lambda": lam, "re": _r(val.real), "im": _r(val.imag), "abs": _r(abs(val)), "resolution": res}
        if note:
            row["note"] = note
        rows.append(row)
    return rows


# fitting


@dataclass
class FitResult:
    slope: float
    log_power: float
    intercept: float
    residuals: list
    xs: list
    pinned: bool
    target_slope: float = None
    target_log_power: float = None
    envelope: list = None
    verdict: str = "N/A"
    reasons: list = field(default_factory=list)

    def to_json(self):
        return {
            "slope": _r(self.slope),
            "log_power": _r(self.log_power),
            "log_power_pinned": self.pinned,
            "intercept": _r(self.intercept),
            "points": [_r(x) for x in self.xs],
            "residuals": [_r(v, 6) for v in self.residuals],
            "target_slope": None if self.target_slope is None else _r(self.target_slope),
            "target_log_power": self.target_log_power,
            "envelope": None if self.envelope is None else [_r(v, 6) for v in self.envelope],
            "verdict": self.verdict,
            "reasons": list(self.reasons),
        }


def fit_loglog(xs, ys, log_terms, pinned_log=None):
    """Least squares y = c + s x + w * log_term; w fixed when pinned_log is given."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    lt = np.asarray(log_terms, dtype=float)
    if pinned_log is not None:
        A = np.column_stack([np.ones_like(xs), xs])
        coef, *_ = np.linalg.lstsq(A, ys - pinned_log * lt, rcond=None)
        c, s, w = coef[0], coef[1], float(pinned_log)
    else:
        A = np.column_stack([np.ones_like(xs), xs, lt])
        coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        c, s, w = coef
    resid = ys - (c + s * xs + w * lt)
    return float(c), float(s), float(w), [float(v) for v in resid]


def fit_growth(series, target_slope=None, target_log_power=None, model="exponent-with-log", pinned_log=None,
               l_min=2, tol_slope=0.05, tol_log=0.3, span=10.0, upper_only=False):
    """Fit a count/exp-sum series (log_p of the value against l) or a volume table
    (ln volume against ln eps) and compare with the predicted exponents."""
    if isinstance(series, (CountSeries, ExpSumSeries)):
        base = series.p
        pts = [(l, abs(v)) for l, v in zip(series.levels, series.values) if l >= l_min]
        xs = [l for l, _ in pts]
        vals = [float(v) for _, v in pts]
        log_terms = [math.log(l, base) for l in xs]
        to_y = lambda v: math.log(v, base)
    elif isinstance(series, VolumeTable):
        pts = [(e.eps, e.value) for e in series.estimates]
        xs = [math.log(e) for e, _ in pts]
        vals = [v for _, v in pts]
        log_terms = [math.log(math.log(1 / e)) for e, _ in pts]
        to_y = math.log
    else:
        raise TypeError("unsupported series type")
    if len(xs) < 4:
        raise ValueError("need at least 4 usable points beyond l_min")
    if any(v == 0 for v in vals):
        return FitResult(float("nan"), float("nan"), float("nan"), [], xs, pinned_log is not None,
                         target_slope, target_log_power, None, "N/A", ["series has zero values (f vanishes identically at some level)"])
    ys = [to_y(v) for v in vals]
    if model == "pure-exponent" and pinned_log is None:
        pinned_log = 0.0
    c, s, w, resid = fit_loglog(xs, ys, log_terms, pinned_log)
    res = FitResult(s, w, c, resid, xs, pinned_log is not None, target_slope, target_log_power)
    if target_slope is None:
        return res
    reasons = []
    if not upper_only and abs(s - target_slope) > tol_slope:
        reasons.append(f"slope {s:.4f} differs from {target_slope:.4f} by more than {tol_slope}")
    wt = target_log_power if target_log_power is not None else 0.0
    env = [y - (target_slope * x + wt * lt) for x, y, lt in zip(xs, ys, log_terms)]
    env = [math.exp(v) if isinstance(series, VolumeTable) else series.p**v for v in env]
    res.envelope = [min(env), max(env)]
    if upper_only:
        if max(env) > span:
            reasons.append(f"upper envelope constant {max(env):.3f} exceeds {span}")
    elif max(env) / min(env) > span:
        reasons.append(f"envelope spans {max(env) / min(env):.3f} > {span}")
    if pinned_log is None and target_log_power is not None and abs(w - target_log_power) > tol_log:
        reasons.append(f"log power {w:.3f} differs from {target_log_power} by more than {tol_log}")
    res.reasons = reasons
    res.verdict = "FAIL" if reasons else "PASS"
    return res


def monomial_count_oracle(gamma, p, l):
    """N_l for f = x^gamma by summing over valuation vectors (exact)."""
    n = len(gamma)
    # probability that v(x_j) = k is (1 - 1/p) p^-k for k < l, and p^-l for k >= l (x_j = 0 mod p^l)
    total = Fraction(0)

    def rec(j, acc, prob):
        nonlocal total
        if j == n:
            if acc >= l:
                total += prob
            return
        for k in range(l + 1):
            pk = Fraction(1, p**l) if k == l else (1 - Fraction(1, p)) * Fraction(1, p**k)
            rec(j + 1, acc + gamma[j] * k, prob * pk)

    rec(0, 0, Fraction(1))
    return total


__all__ = [
    "CountSeries", "ExpSumSeries", "VolumeEstimate", "VolumeTable", "FitResult", "CapExceeded", "HenselBlowup",
    "count_brute", "count_hensel", "count_series", "count_divisibility", "exp_sum", "exp_sum_series",
    "exp_sum_family", "cross_check_identity", "sublevel_sweep", "sublevel_volume", "grid_volume",
    "oscillatory_integral", "fit_growth", "fit_loglog", "monomial_count_oracle", "thread_count", "value_histogram",
]
