"""Perturbed LP families ``max <c0+εc1, x>  s.t.  (A0+εA1)x = b0+εb1, x >= 0``.

Builds the limiting programs over stacked variables ``(x⁰, x¹)``, decides
the positivity sets and regularity conditions behind them, and sweeps ε
toward zero to compare the perturbed optimum with the limiting one.
"""

from __future__ import annotations

import enum
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
    add,
    as_matrix,
    as_vector,
    det,
    generic_rank_pencil,
    norm_inf,
    rank,
    solve_linear,
    sub_columns,
)
from .simplex import (
    DEFAULT_VERTEX_CAP,
    EnumerationCapExceeded,
    LpStandardForm,
    SolveResult,
    Status,
    enumerate_vertices,
    enumeration_cap,
    solve,
)

DEFAULT_BASIS_CAP = 100_000


class InfeasibleError(ValueError):
    """The unperturbed feasible set is empty where it must not be."""


@dataclass(frozen=True)
class PerturbedLp:
    A0: Matrix
    A1: Matrix
    b0: Vector
    b1: Vector
    c0: Vector
    c1: Vector

    def __post_init__(self):
        for name in ("A0", "A1"):
            object.__setattr__(self, name, as_matrix(getattr(self, name)))
        for name in ("b0", "b1", "c0", "c1"):
            object.__setattr__(self, name, as_vector(getattr(self, name)))
        m, n = len(self.b0), len(self.c0)
        if len(self.b1) != m:
            raise ValueError(f"b1 has length {len(self.b1)}, expected {m}")
        if len(self.c1) != n:
            raise ValueError(f"c1 has length {len(self.c1)}, expected {n}")
        for name in ("A0", "A1"):
            A = getattr(self, name)
            if len(A) != m:
                raise ValueError(f"{name} has {len(A)} rows, expected {m}")
            for i, row in enumerate(A):
                if len(row) != n:
                    raise ValueError(f"{name} row {i} has length {len(row)}, expected {n}")

    @property
    def m(self) -> int:
        return len(self.b0)

    @property
    def n(self) -> int:
        return len(self.c0)


def instantiate(p: PerturbedLp, eps: Fraction) -> LpStandardForm:
    """The member of the family at ``eps``."""
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    A = add(p.A0, p.A1, eps)
    b = [u + eps * v for u, v in zip(p.b0, p.b1)]
    c = [u + eps * v for u, v in zip(p.c0, p.c1)]
    return LpStandardForm(A, b, c)


def _unit(n: int, j: int) -> Vector:
    e = [ZERO] * n
    e[j] = ONE
    return e


@dataclass(frozen=True)
class J0Set:
    """Coordinates that are positive somewhere on the unperturbed feasible set."""

    indices: tuple[int, ...]
    witness: Vector | None

    def __contains__(self, j: int) -> bool:
        return j in self.indices


def compute_j0(p: PerturbedLp) -> J0Set:
    """Solve one LP per coordinate to find ``J0`` and a strictly positive witness.

    Unbounded coordinates belong to ``J0``; their representative point is
    taken from the same LP with ``x_j`` capped one unit above some feasible
    point's ``x_j``.  The witness is the
    equal-weight average of the ``n`` representative points.
    """
    lp0 = instantiate(p, ZERO)
    n = p.n
    indices: list[int] = []
    points: list[Vector] = []
    for j in range(n):
        res = solve(lp0.with_objective(_unit(n, j)))
        if res.status is Status.INFEASIBLE:
            raise InfeasibleError("unperturbed problem infeasible")
        if res.status is Status.UNBOUNDED:
            # the cap sits one unit above a known feasible point, so it stays feasible
            anchor = solve(lp0.with_objective([ZERO] * n)).x
            capped = LpStandardForm(
                [row + [ZERO] for row in lp0.A] + [_unit(n, j) + [ONE]],
                lp0.b + [anchor[j] + 1],
                _unit(n + 1, j),
            )
            res = solve(capped)
            indices.append(j)
            points.append(res.x[:n])
        else:
            if res.value > 0:
                indices.append(j)
            points.append(res.x)
    if not points:
        return J0Set((), None)
    w = Fraction(1, len(points))
    witness = [w * sum((pt[k] for pt in points), ZERO) for k in range(n)]
    return J0Set(tuple(indices), witness)


def slater_holds(p: PerturbedLp) -> bool:
    try:
        j0 = compute_j0(p)
    except InfeasibleError:
        return False
    return len(j0.indices) == p.n


class Variant(enum.Enum):
    THETA1 = "theta1"
    SIMPLIFIED = "simplified"


@dataclass(frozen=True)
class LimitingLp:
    """Stacked LP over ``(x⁰, x¹)``: columns ``0..n-1`` hold x⁰, ``n..2n-1`` x¹."""

    variant: Variant
    lp: LpStandardForm
    j0: J0Set | None
    n: int

    def split(self, x: Sequence[Fraction]) -> tuple[Vector, Vector]:
        return list(x[: self.n]), list(x[self.n : 2 * self.n])


def _stacked_rows(p: PerturbedLp) -> Matrix:
    n = p.n
    top = [row + [ZERO] * n for row in p.A0]
    bottom = [r1 + r0 for r0, r1 in zip(p.A0, p.A1)]
    return top + bottom


def build_limiting(p: PerturbedLp, variant: Variant = Variant.THETA1,
                   j0: J0Set | None = None) -> LimitingLp:
    """Limiting LP ``max <c0, x⁰>`` over ``A0x⁰ = b0, A0x¹ + A1x⁰ = b1``.

    The ``THETA1`` variant leaves ``x¹_j`` free for ``j`` in ``J0``; the
    ``SIMPLIFIED`` variant keeps every ``x¹_j >= 0``.
    """
    variant = Variant(variant)
    if j0 is None:
        if variant is Variant.THETA1:
            j0 = compute_j0(p)
        else:
            try:
                j0 = compute_j0(p)
            except InfeasibleError:
                j0 = None
    free = frozenset(p.n + j for j in j0.indices) if variant is Variant.THETA1 else frozenset()
    lp = LpStandardForm(
        _stacked_rows(p),
        list(p.b0) + list(p.b1),
        list(p.c0) + [ZERO] * p.n,
        free,
    )
    return LimitingLp(variant, lp, j0, p.n)


@dataclass(frozen=True)
class Es1Report:
    holds: bool
    margin: Fraction | None
    witness: tuple[Vector, Vector] | None


def _max_t_lp(eq_rows: Matrix, eq_rhs: Vector, nvars: int, floors: Sequence[int],
              free: Sequence[int] = ()) -> tuple[LpStandardForm, int]:
    """``max t`` over ``eq_rows · v = eq_rhs`` with ``v_k >= t`` for ``k`` in ``floors``, ``t <= 1``.

    Columns: the ``nvars`` given variables, then ``t``, one surplus per floor,
    and one slack for ``t <= 1``.  Returns the LP and the column of ``t``.
    """
    nf = len(floors)
    width = nvars + 1 + nf + 1
    t = nvars
    rows = [list(r) + [ZERO] * (1 + nf + 1) for r in eq_rows]
    rhs = list(eq_rhs)
    for k, j in enumerate(floors):
        row = [ZERO] * width
        row[j] = ONE
        row[t] = -ONE
        row[t + 1 + k] = -ONE
        rows.append(row)
        rhs.append(ZERO)
    cap = [ZERO] * width
    cap[t] = ONE
    cap[-1] = ONE
    rows.append(cap)
    rhs.append(ONE)
    return LpStandardForm(rows, rhs, _unit(width, t), frozenset(free)), t


def check_es1(p: PerturbedLp, j0: J0Set | None = None) -> Es1Report:
    """Decide the order-one extended Slater condition exactly.

    Maximises ``t <= 1`` subject to ``(x⁰, x¹)`` in the lifted feasible set
    with ``x⁰_j >= t`` on ``J0`` and ``x¹_j >= t`` off ``J0``; the condition
    holds iff the optimum is positive.
    """
    j0 = compute_j0(p) if j0 is None else j0
    n = p.n
    floors = [j for j in j0.indices] + [n + j for j in range(n) if j not in j0]
    free = [n + j for j in j0.indices]
    lp, t = _max_t_lp(_stacked_rows(p), list(p.b0) + list(p.b1), 2 * n, floors, free)
    res = solve(lp)
    if not res.optimal:
        return Es1Report(False, None, None)
    margin = res.value
    if margin <= 0:
        return Es1Report(False, margin, None)
    return Es1Report(True, margin, (res.x[:n], res.x[n : 2 * n]))


class EquivalenceReason(enum.Enum):
    ZERO_RHS = "zero_rhs"
    POSITIVE_KERNEL = "positive_kernel"
    VALUE_MATCH = "value_match"


@dataclass(frozen=True)
class EquivalenceReport:
    certified: bool
    reason: EquivalenceReason | None
    theta1: SolveResult
    simplified: SolveResult


def kernel_certificate(p: PerturbedLp, j0: J0Set) -> Vector | None:
    """A vector ``α > 0`` on ``J0`` with ``A0_{J0} α = 0``, if one exists."""
    cols = list(j0.indices)
    A = sub_columns(p.A0, cols)
    lp, t = _max_t_lp(A, [ZERO] * p.m, len(cols), range(len(cols)))
    res = solve(lp)
    if res.optimal and res.value > 0:
        return res.x[: len(cols)]
    return None


def _same_value(a: SolveResult, b: SolveResult) -> bool:
    return a.status == b.status and a.value == b.value


def check_equivalence(p: PerturbedLp, j0: J0Set | None = None) -> EquivalenceReport:
    """Certify that the two limiting variants have the same feasible x⁰ sets.

    ``b0 = 0`` certifies directly; otherwise a positive kernel vector of the
    ``J0`` columns of ``A0`` does.  Failing both, only equality of the two
    optimal values is checked and reported as uncertified.
    """
    j0 = compute_j0(p) if j0 is None else j0
    theta1 = solve(build_limiting(p, Variant.THETA1, j0).lp)
    simplified = solve(build_limiting(p, Variant.SIMPLIFIED, j0).lp)
    if all(v == 0 for v in p.b0):
        return EquivalenceReport(True, EquivalenceReason.ZERO_RHS, theta1, simplified)
    if kernel_certificate(p, j0) is not None:
        return EquivalenceReport(True, EquivalenceReason.POSITIVE_KERNEL, theta1, simplified)
    reason = EquivalenceReason.VALUE_MATCH if _same_value(theta1, simplified) else None
    return EquivalenceReport(False, reason, theta1, simplified)


@dataclass(frozen=True)
class AssumptionReport:
    h1: bool
    h2: bool
    h0star_probe: bool
    probe_points: tuple[Fraction, ...] = ()


def optimal_face_bounded(lp: LpStandardForm) -> bool | None:
    """Whether the optimal face of ``lp`` is bounded.

    ``None`` when the LP is unbounded; ``True`` when it is infeasible (the
    empty face).  Every variable is nonnegative here, so maximising each
    coordinate over the face settles the question.
    """
    res = solve(lp)
    if res.status is Status.INFEASIBLE:
        return True
    if res.status is Status.UNBOUNDED:
        return None
    face = LpStandardForm(lp.A + [list(lp.c)], lp.b + [res.value], lp.c, lp.free_vars)
    for j in range(lp.n):
        if solve(face.with_objective(_unit(lp.n, j))).status is Status.UNBOUNDED:
            return False
    return True


def check_assumptions(p: PerturbedLp, eps_probe: Fraction = Fraction(1, 8)) -> AssumptionReport:
    """Rank assumptions exactly, plus a finite probe of optimal-set boundedness.

    The probe solves the family at ``eps_probe``, ``eps_probe/2`` and
    ``eps_probe/4``; an unbounded member fails the probe.
    """
    eps_probe = Fraction(eps_probe)
    if eps_probe <= 0:
        raise ValueError("eps_probe must be positive")
    h1 = rank(p.A0) == p.m
    h2 = generic_rank_pencil(p.A0, p.A1) == p.m
    points = (eps_probe, eps_probe / 2, eps_probe / 4)
    probe = all(optimal_face_bounded(instantiate(p, e)) is True for e in points)
    return AssumptionReport(h1, h2, probe, points)


class BasisClass(enum.Enum):
    OMEGA1 = "omega1"
    OMEGA2 = "omega2"


def basis_determinant_poly(p: PerturbedLp, J: Sequence[int]) -> Vector:
    """Coefficients (constant first) of ``det((A0 + εA1)_J)`` as a polynomial in ε.

    The degree is at most ``|J|``, so ``|J| + 1`` exact evaluations and a
    Vandermonde solve recover it.
    """
    k = len(J)
    D0 = sub_columns(p.A0, J)
    D1 = sub_columns(p.A1, J)
    nodes = [Fraction(t) for t in range(k + 1)]
    values = [det(add(D0, D1, e)) for e in nodes]
    vander = [[e ** d for d in range(k + 1)] for e in nodes]
    return solve_linear(vander, values)


def classify_bases(p: PerturbedLp, cap: int | None = None) -> list[tuple[tuple[int, ...], BasisClass]]:
    """Tag every ``m``-column subset by whether its pencil determinant vanishes identically."""
    cap = enumeration_cap(DEFAULT_BASIS_CAP) if cap is None else cap
    count = comb(p.n, p.m)
    if count > cap:
        raise EnumerationCapExceeded(f"{count} bases exceed the cap {cap}")
    out = []
    for J in combinations(range(p.n), p.m):
        poly = basis_determinant_poly(p, J)
        cls = BasisClass.OMEGA2 if all(c == 0 for c in poly) else BasisClass.OMEGA1
        out.append((J, cls))
    return out


def distance_to_theta1(p: PerturbedLp, x: Sequence[Fraction], j0: J0Set) -> Fraction | None:
    """Exact ∞-norm distance from ``x`` to the projected limiting feasible set.

    ``None`` when that set is empty.
    """
    n, m = p.n, p.m
    x = [Fraction(v) for v in x]
    # columns: x0 (n), x1 (n), d, p (n), q (n)
    width = 4 * n + 1
    d = 2 * n
    rows: Matrix = []
    rhs: Vector = []
    for row in _stacked_rows(p):
        rows.append(row + [ZERO] * (2 * n + 1))
    rhs = list(p.b0) + list(p.b1)
    for j in range(n):
        up = [ZERO] * width
        up[j], up[d], up[d + 1 + j] = ONE, -ONE, ONE
        lo = [ZERO] * width
        lo[j], lo[d], lo[d + 1 + n + j] = ONE, ONE, -ONE
        rows += [up, lo]
        rhs += [x[j], x[j]]
    c = [ZERO] * width
    c[d] = -ONE
    free = frozenset(n + j for j in j0.indices)
    res = solve(LpStandardForm(rows, rhs, c, free))
    if not res.optimal:
        return None
    return -res.value


@dataclass(frozen=True)
class SweepPoint:
    eps: Fraction
    status: Status
    value: Fraction | None
    gap: Fraction | None
    distance: Fraction | None
    theta1_distance: Fraction | None
    x: Vector | None = field(default=None, repr=False)


@dataclass(frozen=True)
class SweepReport:
    points: tuple[SweepPoint, ...]
    limit_status: Status
    limit_value: Fraction | None

    @property
    def epsilons(self) -> list[Fraction]:
        return [pt.eps for pt in self.points]

    @property
    def values(self) -> list[Fraction | None]:
        return [pt.value for pt in self.points]

    @property
    def gaps(self) -> list[Fraction | None]:
        return [pt.gap for pt in self.points]


def sweep_schedule(eps0: Fraction, ratio: Fraction, steps: int) -> list[Fraction]:
    eps0, ratio = Fraction(eps0), Fraction(ratio)
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie strictly between 0 and 1")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    return [eps0 * ratio ** k for k in range(steps)]


def sweep(p: PerturbedLp, eps0: Fraction = Fraction(1, 2), ratio: Fraction = Fraction(1, 2),
          steps: int = 12, vertex_cap: int | None = None,
          j0: J0Set | None = None) -> SweepReport:
    """Solve the family along ``eps0·ratio^k`` and compare with the limiting LP.

    ``distance`` is the ∞-norm distance from each ε-solution to the nearest
    optimal vertex of the limiting LP (x⁰ block), computed only when vertex
    enumeration fits in ``vertex_cap``; ``theta1_distance`` is the exact
    distance to the projected limiting feasible set.
    """
    schedule = sweep_schedule(eps0, ratio, steps)
    try:
        j0 = compute_j0(p) if j0 is None else j0
    except InfeasibleError:
        j0 = None

    limit_status, limit_value, optimal_x0 = Status.INFEASIBLE, None, None
    if j0 is not None:
        limiting = build_limiting(p, Variant.THETA1, j0)
        limit = solve(limiting.lp)
        limit_status, limit_value = limit.status, limit.value
        if limit.optimal:
            cap = enumeration_cap(DEFAULT_VERTEX_CAP) if vertex_cap is None else vertex_cap
            try:
                vertices = enumerate_vertices(limiting.lp, cap)
                optimal_x0 = [v.x[: p.n] for v in vertices if v.value == limit_value]
            except EnumerationCapExceeded:
                optimal_x0 = None

    points = []
    for eps in schedule:
        res = solve(instantiate(p, eps))
        gap = distance = theta1_distance = None
        if res.optimal:
            if limit_value is not None:
                gap = abs(res.value - limit_value)
            if optimal_x0:
                distance = min(norm_inf([a - b for a, b in zip(res.x, x0)]) for x0 in optimal_x0)
            if j0 is not None:
                theta1_distance = distance_to_theta1(p, res.x, j0)
        points.append(SweepPoint(eps, res.status, res.value, gap, distance, theta1_distance, res.x))
    return SweepReport(tuple(points), limit_status, limit_value)
