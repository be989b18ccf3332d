"""Exact linear algebra over the integers and rationals.

Matrices are lists of rows of ``int`` or ``Fraction``. Everything here is
small (d <= ~10) so plain Python loops are fine and keep results exact.
"""

from fractions import Fraction


def identity(d):
    return [[1 if i == j else 0 for j in range(d)] for i in range(d)]


def matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def matvec(a, v):
    return [sum(row[k] * v[k] for k in range(len(v))) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def subtract(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _row_echelon(a):
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    rows = [[Fraction(x) for x in r] for r in a]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(a):
    return len(_row_echelon(a)[1])


def nullspace(a):
    """Basis of {x : a x = 0} as integer vectors (denominators cleared)."""
    ncols = len(a[0])
    rows, pivots = _row_echelon(a)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -rows[r][f]
        basis.append(clear_denominators(v))
    return basis


def clear_denominators(v):
    from math import gcd

    lcm = 1
    for x in v:
        x = Fraction(x)
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    ints = [int(Fraction(x) * lcm) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    return ints


def det(a):
    """Determinant by fraction-free Bareiss elimination."""
    m = [list(r) for r in a]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]
