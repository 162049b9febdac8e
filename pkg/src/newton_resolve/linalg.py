"""Small exact linear algebra over Q (lists of Fractions)."""

from fractions import Fraction
from functools import reduce
import math


def to_fraction_matrix(rows):
    return [[Fraction(v) for v in row] for row in rows]


def transpose(A):
    return [list(col) for col in zip(*A)]


def matmul(A, B):
    Bt = transpose(B)
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def matvec(A, v):
    return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in A]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def row_reduce(A):
    """Reduced row echelon form and pivot columns."""
    M = to_fraction_matrix(A)
    rows = len(M)
    cols = len(M[0]) if M else 0
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if pivot is None:
            continue
        M[r], M[pivot] = M[pivot], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                factor = M[i][c]
                M[i] = [a - factor * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, pivots


def rank(A):
    if not A:
        return 0
    return len(row_reduce(A)[1])


def nullspace(A, ncols=None):
    """Basis of {x : A x = 0}."""
    if not A:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    R, pivots = row_reduce(A)
    n = len(A[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -R[i][fc]
        basis.append(v)
    return basis


def det(A):
    M = to_fraction_matrix(A)
    n = len(M)
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if M[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            M[c], M[pivot] = M[pivot], M[c]
            result = -result
        result *= M[c][c]
        for i in range(c + 1, n):
            if M[i][c] != 0:
                factor = M[i][c] / M[c][c]
                M[i] = [a - factor * b for a, b in zip(M[i], M[c])]
    return result


def inverse(A):
    n = len(A)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(to_fraction_matrix(A))]
    R, pivots = row_reduce(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in R]


def solve(A, b):
    inv = inverse(A)
    return matvec(inv, [Fraction(v) for v in b])


def primitive(v):
    """Scale a rational vector to a primitive integer vector (same direction)."""
    v = [Fraction(x) for x in v]
    den = reduce(math.lcm, (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(math.gcd, (abs(x) for x in ints), 0)
    if g == 0:
        raise ValueError("zero vector")
    return tuple(x // g for x in ints)


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))
