"""Small dense linear algebra over exact or float scalars.

Matrices are tuples of row tuples.  The dimensions involved here are tiny
(at most the alphabet size), so plain Python beats pulling in a CAS.
"""

from fractions import Fraction


def identity(d, one=Fraction(1)):
    zero = one - one
    return tuple(tuple(one if i == j else zero for j in range(d)) for i in range(d))


def matmul(a, b):
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def matvec(a, x):
    return tuple(sum(r * xi for r, xi in zip(row, x)) for row in a)


def vadd(x, y):
    return tuple(a + b for a, b in zip(x, y))


def vsub(x, y):
    return tuple(a - b for a, b in zip(x, y))


def vscale(c, x):
    return tuple(c * a for a in x)


def dot(x, y):
    return sum(a * b for a, b in zip(x, y))


def _is_zero(x, tol):
    return abs(x) <= tol if tol else x == 0


def row_reduce(rows, tol=0):
    """Reduced row echelon form; returns (rref rows, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        if tol:
            best = max(range(r, len(m)), key=lambda i: abs(m[i][c]))
        else:
            best = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if best is None or _is_zero(m[best][c], tol):
            continue
        m[r], m[best] = m[best], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(len(m)):
            if i != r and not _is_zero(m[i][c], tol):
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(rows, tol=0):
    return len(row_reduce(rows, tol)[1])


def solve(a, b, tol=0):
    """Solve a x = b for a possibly overdetermined but consistent system.

    Returns None when the system is inconsistent or the solution is not
    unique.
    """
    n = len(a[0])
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    red, pivots = row_reduce(aug, tol)
    if n in pivots:
        return None
    if len(pivots) < n:
        return None
    x = [None] * n
    for row, c in zip(red, pivots):
        x[c] = row[n]
    return tuple(x)


def null_vector(rows, tol=0):
    """A non-zero vector orthogonal to every row, or None if the rows span."""
    n = len(rows[0])
    red, pivots = row_reduce(rows, tol)
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    f = free[0]
    one = Fraction(1) if not tol else 1.0
    x = [one - one] * n
    x[f] = one
    for row, c in zip(red, pivots):
        x[c] = -row[f]
    return tuple(x)
