"""Exact two-phase primal simplex with Bland's rule, plus a brute-force oracle.

LPs are in maximisation standard form ``max <c, x>  s.t.  Ax = b, x >= 0``
where variables listed in ``free_vars`` carry no sign constraint.  Free
variables are split internally: column ``j`` keeps its index and carries
``x_j⁺``; the ``x_j⁻`` copies are appended after the original columns in
increasing ``j`` order.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Sequence

from .linalg import (
    ONE,
    ZERO,
    Matrix,
    Vector,
    as_matrix,
    as_vector,
    dot,
    independent_rows,
    rank,
    solve_linear,
    sub_columns,
    transpose,
    vecmat,
)

DEFAULT_VERTEX_CAP = 200_000
CAP_ENV_VAR = "PERTURBLP_BASIS_CAP"


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"

    def __str__(self) -> str:
        return self.value


class EnumerationCapExceeded(ValueError):
    """Raised when brute-force enumeration would visit too many bases."""


def enumeration_cap(default: int) -> int:
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class LpStandardForm:
    """``max <c, x>  s.t.  Ax = b``, ``x_j >= 0`` for ``j`` not in ``free_vars``."""

    A: Matrix
    b: Vector
    c: Vector
    free_vars: frozenset[int] = frozenset()

    def __post_init__(self):
        A = as_matrix(self.A)
        b = as_vector(self.b)
        c = as_vector(self.c)
        n = len(c)
        if len(A) != len(b):
            raise ValueError(f"A has {len(A)} rows but b has length {len(b)}")
        for i, row in enumerate(A):
            if len(row) != n:
                raise ValueError(f"row {i} of A has length {len(row)}, expected {n}")
        free = frozenset(int(j) for j in self.free_vars)
        if any(not 0 <= j < n for j in free):
            raise ValueError(f"free_vars must lie in [0, {n})")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "free_vars", free)

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def n(self) -> int:
        return len(self.c)

    def with_objective(self, c: Sequence) -> "LpStandardForm":
        return LpStandardForm(self.A, self.b, list(c), self.free_vars)

    def residual(self, x: Sequence[Fraction]) -> Vector:
        return [dot(row, x) - bi for row, bi in zip(self.A, self.b)]

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.n:
            return False
        if any(r != 0 for r in self.residual(x)):
            return False
        return all(x[j] >= 0 for j in range(self.n) if j not in self.free_vars)


@dataclass(frozen=True)
class SolveResult:
    status: Status
    value: Fraction | None = None
    x: Vector | None = None
    basis: tuple[int, ...] | None = None
    dual: Vector | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class _Split:
    """Free-variable splitting of an LP into an all-nonnegative one."""

    A: Matrix
    c: Vector
    origin: list[tuple[int, int]]  # internal column -> (original column, sign)
    n: int

    @classmethod
    def of(cls, lp: LpStandardForm) -> "_Split":
        negs = sorted(lp.free_vars)
        origin = [(j, 1) for j in range(lp.n)] + [(j, -1) for j in negs]
        A = [row + [-row[j] for j in negs] for row in lp.A]
        c = list(lp.c) + [-lp.c[j] for j in negs]
        return cls(A, c, origin, lp.n)

    def to_original(self, x_int: Sequence[Fraction]) -> Vector:
        x = [ZERO] * self.n
        for k, (j, sign) in enumerate(self.origin):
            if x_int[k]:
                x[j] += sign * x_int[k]
        return x


def _reduce_rows(A: Matrix, b: Vector) -> list[int] | None:
    """Row indices forming a full-rank equivalent system, or None if inconsistent."""
    keep = independent_rows(A) if A else []
    if len(keep) < len(A):
        aug = [row + [bi] for row, bi in zip(A, b)]
        if rank(aug) > len(keep):
            return None
    return keep


class _Tableau:
    """Dense simplex tableau; last entry of every row is the right-hand side."""

    def __init__(self, rows: Matrix, basis: list[int]):
        self.T = rows
        self.basis = basis
        self.z: Vector = []
        self.obj = ZERO
        self.iterations = 0

    def set_objective(self, cost: Sequence[Fraction], width: int) -> None:
        # reduced costs z_j = c_j - c_B B^{-1} A_j, maximisation
        z = list(cost[:width])
        obj = ZERO
        for i, bv in enumerate(self.basis):
            cb = cost[bv]
            if cb:
                row = self.T[i]
                for j in range(width):
                    z[j] -= cb * row[j]
                obj += cb * row[-1]
        self.z = z
        self.obj = obj

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        inv = ONE / T[r][j]
        T[r] = [v * inv for v in T[r]]
        pr = T[r]
        for i, row in enumerate(T):
            if i != r and row[j] != 0:
                f = row[j]
                T[i] = [a - f * p for a, p in zip(row, pr)]
        zj = self.z[j] if self.z else ZERO
        if zj:
            width = len(self.z)
            self.z = [a - zj * p for a, p in zip(self.z, pr[:width])]
            self.obj += zj * pr[-1]
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: int, budget: int | None) -> Status:
        """Bland's rule on columns ``0..allowed-1`` until optimal or unbounded."""
        while True:
            j = next((k for k in range(allowed) if self.z[k] > 0), None)
            if j is None:
                return Status.OPTIMAL
            best = None
            for i, row in enumerate(self.T):
                if row[j] > 0:
                    key = (row[-1] / row[j], self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return Status.UNBOUNDED
            if budget is not None and self.iterations >= budget:
                raise RuntimeError(f"simplex exceeded iteration budget {budget}")
            self.pivot(best[1], j)


def solve(lp: LpStandardForm, max_iterations: int | None = None) -> SolveResult:
    """Solve ``lp`` exactly.

    On an optimal result, ``x`` is a basic optimal solution, ``basis`` lists the
    original column indices of its basic variables, and ``dual`` is a vector
    ``y`` with ``yᵀA >= c`` (equality on free columns) and ``yᵀb = value``.
    """
    split = _Split.of(lp)
    n_int = len(split.c)
    keep = _reduce_rows(split.A, lp.b)
    if keep is None:
        return SolveResult(Status.INFEASIBLE)
    m = len(keep)

    rows = []
    for k, i in enumerate(keep):
        row = list(split.A[i])
        rhs = lp.b[i]
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        art = [ZERO] * m
        art[k] = ONE
        rows.append(row + art + [rhs])
    tab = _Tableau(rows, [n_int + k for k in range(m)])

    phase1_cost = [ZERO] * n_int + [-ONE] * m
    tab.set_objective(phase1_cost, n_int + m)
    tab.run(n_int, max_iterations)
    if tab.obj < 0:
        return SolveResult(Status.INFEASIBLE, iterations=tab.iterations)

    # artificials still basic sit at level zero; full row rank lets us pivot them out
    for r in range(m):
        if tab.basis[r] >= n_int:
            j = next(k for k in range(n_int) if tab.T[r][k] != 0)
            tab.pivot(r, j)

    tab.T = [row[:n_int] + [row[-1]] for row in tab.T]
    tab.set_objective(split.c, n_int)
    status = tab.run(n_int, max_iterations)
    if status is Status.UNBOUNDED:
        return SolveResult(Status.UNBOUNDED, iterations=tab.iterations)

    x_int = [ZERO] * n_int
    for r, bv in enumerate(tab.basis):
        x_int[bv] = tab.T[r][-1]
    x = split.to_original(x_int)
    value = dot(lp.c, x)

    B = sub_columns([split.A[i] for i in keep], tab.basis)
    y_kept = solve_linear(transpose(B), [split.c[bv] for bv in tab.basis])
    y = [ZERO] * lp.m
    for k, i in enumerate(keep):
        y[i] = y_kept[k]
    basis = tuple(sorted(split.origin[bv][0] for bv in tab.basis))
    return SolveResult(Status.OPTIMAL, value, x, basis, y, tab.iterations)


def verify_dual(lp: LpStandardForm, y: Sequence[Fraction], value: Fraction) -> bool:
    """Exact check of a dual certificate for an optimal value."""
    if len(y) != lp.m or dot(y, lp.b) != value:
        return False
    yA = vecmat(y, lp.A, lp.n)
    for j in range(lp.n):
        if j in lp.free_vars:
            if yA[j] != lp.c[j]:
                return False
        elif yA[j] < lp.c[j]:
            return False
    return True


def maximize_coordinate(lp: LpStandardForm, j: int) -> Fraction | Status:
    """Supremum of ``x_j`` over the feasible set of ``lp``."""
    if not 0 <= j < lp.n:
        raise IndexError(f"coordinate {j} out of range for {lp.n} variables")
    unit = [ZERO] * lp.n
    unit[j] = ONE
    res = solve(lp.with_objective(unit))
    return res.value if res.optimal else res.status


@dataclass(frozen=True)
class Vertex:
    basis: tuple[int, ...]  # internal (split) column indices
    x: Vector
    value: Fraction


def enumerate_vertices(lp: LpStandardForm, cap: int | None = None) -> list[Vertex]:
    """All feasible basic solutions of ``lp``, best objective first.

    Redundant equality rows are dropped first, so bases have size
    ``rank(A)``.  Degenerate vertices appear once per basis.
    """
    split = _Split.of(lp)
    keep = _reduce_rows(split.A, lp.b)
    if keep is None:
        return []
    A = [split.A[i] for i in keep]
    b = [lp.b[i] for i in keep]
    n_int, m = len(split.c), len(keep)
    cap = enumeration_cap(DEFAULT_VERTEX_CAP) if cap is None else cap
    count = comb(n_int, m)
    if count > cap:
        raise EnumerationCapExceeded(
            f"{count} candidate bases exceed the enumeration cap {cap}; use solve()"
        )
    out = []
    for J in combinations(range(n_int), m):
        xJ = solve_linear(sub_columns(A, J), b)
        if xJ is None or any(v < 0 for v in xJ):
            continue
        x_int = [ZERO] * n_int
        for k, v in zip(J, xJ):
            x_int[k] = v
        x = split.to_original(x_int)
        out.append(Vertex(J, x, dot(lp.c, x)))
    out.sort(key=lambda v: (-v.value, v.basis))
    return out


def enumerate_rays(lp: LpStandardForm, cap: int | None = None) -> list[Vector]:
    """Extreme rays of the recession cone, normalised to unit coordinate sum.

    They are the vertices of ``{d >= 0 : A d = 0, sum(d) = 1}`` in split
    coordinates, mapped back to the original variables.
    """
    split = _Split.of(lp)
    n_int = len(split.c)
    A = [list(row) for row in split.A] + [[ONE] * n_int]
    b = [ZERO] * lp.m + [ONE]
    cone = LpStandardForm(A, b, [ZERO] * n_int)
    return [split.to_original(v.x) for v in enumerate_vertices(cone, cap)]


def brute_force_solve(lp: LpStandardForm, cap: int | None = None) -> tuple[Status, Fraction | None]:
    """Status and optimal value by exhaustive vertex and ray enumeration."""
    vertices = enumerate_vertices(lp, cap)
    if not vertices:
        return Status.INFEASIBLE, None
    if any(dot(lp.c, d) > 0 for d in enumerate_rays(lp, cap)):
        return Status.UNBOUNDED, None
    return Status.OPTIMAL, vertices[0].value
