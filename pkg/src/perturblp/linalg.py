"""Exact rational linear algebra on dense row-major ``Fraction`` matrices.

Matrices are plain ``list[list[Fraction]]`` and vectors ``list[Fraction]``.
No function here mutates its arguments.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

Vector = list[Fraction]
Matrix = list[list[Fraction]]

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def rat(num: int, den: int = 1) -> Fraction:
    """Reduced rational ``num/den``; the sign lives on the numerator."""
    if den == 0:
        raise ZeroDivisionError("rational with zero denominator")
    return Fraction(num, den)


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or a Python int into a Fraction.

    Decimal strings and floats are rejected so that problem files stay exact.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if m:
            den = int(m.group(2)) if m.group(2) is not None else 1
            return rat(int(m.group(1)), den)
    raise ValueError(f"not an exact rational: {value!r}")


def format_rational(q: Fraction) -> str:
    return str(q)


def as_vector(values: Iterable) -> Vector:
    return [Fraction(v) for v in values]


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def zeros(rows: int, cols: int) -> Matrix:
    return [[ZERO] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def shape(A: Matrix, cols: int | None = None) -> tuple[int, int]:
    """Shape of ``A``; ``cols`` disambiguates matrices with zero rows."""
    if not A:
        return 0, cols or 0
    return len(A), len(A[0])


def transpose(A: Matrix) -> Matrix:
    return [list(col) for col in zip(*A)]


def matvec(A: Matrix, x: Sequence[Fraction]) -> Vector:
    return [sum((a * xi for a, xi in zip(row, x)), ZERO) for row in A]


def vecmat(y: Sequence[Fraction], A: Matrix, cols: int | None = None) -> Vector:
    """Row vector times matrix, ``yᵀA``."""
    n = len(A[0]) if A else (cols or 0)
    out = [ZERO] * n
    for yi, row in zip(y, A):
        if yi:
            for j, a in enumerate(row):
                out[j] += yi * a
    return out


def matmul(A: Matrix, B: Matrix) -> Matrix:
    Bt = transpose(B)
    return [[sum((a * b for a, b in zip(row, col)), ZERO) for col in Bt] for row in A]


def add(A: Matrix, B: Matrix, scale: Fraction = ONE) -> Matrix:
    """``A + scale·B``."""
    return [[a + scale * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def dot(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(x, y)), ZERO)


def sub_columns(A: Matrix, cols: Sequence[int]) -> Matrix:
    return [[row[j] for j in cols] for row in A]


def norm_inf(x: Sequence[Fraction]) -> Fraction:
    return max((abs(v) for v in x), default=ZERO)


def row_echelon(A: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form of ``A`` and its pivot columns.

    Pivots are the first nonzero entry in each column scan, which is exact
    since no magnitude-based pivoting is needed over the rationals.
    """
    R = [list(row) for row in A]
    rows = len(R)
    cols = len(R[0]) if R else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if R[i][c] != 0), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        inv = ONE / R[r][c]
        R[r] = [v * inv for v in R[r]]
        for i in range(rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(A: Matrix) -> int:
    return len(row_echelon(A)[1])


def independent_rows(A: Matrix) -> list[int]:
    """Indices of a maximal linearly independent subset of rows of ``A``.

    Rows are kept greedily in order, so the earliest rows win.
    """
    if not A:
        return []
    _, pivots = row_echelon(transpose(A))
    return pivots


def det(A: Matrix) -> Fraction:
    n = len(A)
    M = [list(row) for row in A]
    result = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return ZERO
        if p != c:
            M[c], M[p] = M[p], M[c]
            result = -result
        piv = M[c][c]
        result *= piv
        for i in range(c + 1, n):
            if M[i][c] != 0:
                f = M[i][c] / piv
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return result


def solve_linear(A: Matrix, b: Sequence[Fraction]) -> Vector | None:
    """Solve the square system ``Ax = b`` exactly.

    Returns ``None`` when ``A`` is singular.
    """
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("solve_linear needs a square matrix")
    if len(b) != n:
        raise ValueError(f"right-hand side has length {len(b)}, expected {n}")
    M = [list(row) + [Fraction(bi)] for row, bi in zip(A, b)]
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        inv = ONE / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for i in range(n):
            if i != c and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * bb for a, bb in zip(M[i], M[c])]
    return [row[n] for row in M]


def nullspace(A: Matrix, cols: int | None = None) -> Matrix:
    """Basis of the right null space of ``A`` (one vector per list entry)."""
    n = len(A[0]) if A else (cols or 0)
    R, pivots = row_echelon(A)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][f]
        basis.append(v)
    return basis


def pencil_sample_points(count: int) -> list[Fraction]:
    """The deterministic sample points ``1, 1/2, ..., 1/count``."""
    return [Fraction(1, k) for k in range(1, count + 1)]


def generic_rank_pencil(A0: Matrix, A1: Matrix) -> int:
    """Rank of ``A0 + εA1`` for all but finitely many ε.

    Every minor of the pencil is a polynomial in ε of degree at most
    ``min(m, n)``, so a nonzero one cannot vanish at ``min(m, n) + 1``
    distinct points; the maximum sampled rank is the generic rank.
    """
    m, n = shape(A0)
    if (m, n) != shape(A1) or any(len(r) != n for r in A0 + A1):
        raise ValueError("pencil matrices must have the same shape")
    best = 0
    for eps in pencil_sample_points(min(m, n) + 1):
        best = max(best, rank(add(A0, A1, eps)))
    return best
