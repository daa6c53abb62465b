"""Finite MDPs: exact stationary-policy evaluation and the discounted/average LPs.

States are ``0..N-1`` and actions of state ``i`` are ``0..m_i-1``.  State-action
pairs are ordered lexicographically; that order fixes the constraint rows
of every LP built here.

Column layouts (``M`` = number of state-action pairs):

* discounted LP:        ``(ṽ[N], s[M])``
* perturbed family:     ``(v[N], σ[M])``
* average LP:           ``(ṽ[N], ũ[N], σ⁰[M], σ¹[M])``
* derived limiting LP:  ``(v⁰[N], σ⁰[M], v¹[N], σ¹[M])``

All three LPs minimise ``Σ γ_j v_j`` and are encoded as maximisation of the
negated objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import prod
from typing import Iterator, Sequence

from .linalg import (
    ONE,
    ZERO,
    Matrix,
    Vector,
    add,
    as_vector,
    identity,
    matmul,
    matvec,
    norm_inf,
    solve_linear,
    sub_columns,
    transpose,
    zeros,
)
from .perturbed import (
    AssumptionReport,
    Es1Report,
    LimitingLp,
    PerturbedLp,
    SweepReport,
    Variant,
    build_limiting,
    check_assumptions,
    check_es1,
    compute_j0,
    sweep,
)
from .simplex import LpStandardForm, Status, solve

DEFAULT_POLICY_CAP = 10_000


@dataclass(frozen=True)
class Mdp:
    """``rewards[i][a]`` and ``transitions[i][a][j]``; ``gamma`` weighs the LP objective."""

    rewards: list[Vector]
    transitions: list[list[Vector]]
    gamma: Vector

    def __post_init__(self):
        rewards = [as_vector(r) for r in self.rewards]
        transitions = [[as_vector(row) for row in acts] for acts in self.transitions]
        gamma = as_vector(self.gamma)
        N = len(rewards)
        if N == 0:
            raise ValueError("an MDP needs at least one state")
        if len(transitions) != N or len(gamma) != N:
            raise ValueError("rewards, transitions and gamma must cover the same states")
        for i in range(N):
            if not rewards[i]:
                raise ValueError(f"state {i} has no actions")
            if len(transitions[i]) != len(rewards[i]):
                raise ValueError(f"state {i}: reward and transition action counts differ")
            for a, row in enumerate(transitions[i]):
                if len(row) != N:
                    raise ValueError(f"transition ({i},{a}) has length {len(row)}, expected {N}")
                if any(p < 0 for p in row):
                    raise ValueError(f"transition ({i},{a}) has a negative probability")
                if sum(row) != 1:
                    raise ValueError(f"transition ({i},{a}) sums to {sum(row)}, not 1")
        if any(g <= 0 for g in gamma):
            raise ValueError("gamma weights must be positive")
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n_states(self) -> int:
        return len(self.rewards)

    @property
    def actions(self) -> list[int]:
        return [len(r) for r in self.rewards]

    @property
    def n_pairs(self) -> int:
        return sum(self.actions)

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, a) for i, m in enumerate(self.actions) for a in range(m)]

    def with_rewards(self, rewards: list[Vector]) -> "Mdp":
        return Mdp(rewards, self.transitions, self.gamma)


def uniform_gamma(n_states: int) -> Vector:
    return [Fraction(1, n_states)] * n_states


@dataclass(frozen=True)
class StationaryPolicy:
    """``pi[i][a]`` is the probability of action ``a`` in state ``i``."""

    pi: list[Vector]

    def __post_init__(self):
        pi = [as_vector(d) for d in self.pi]
        for i, d in enumerate(pi):
            if any(q < 0 for q in d) or sum(d) != 1:
                raise ValueError(f"policy row {i} is not a probability distribution")
        object.__setattr__(self, "pi", pi)

    @classmethod
    def deterministic(cls, mdp: Mdp, choice: Sequence[int]) -> "StationaryPolicy":
        rows = []
        for i, m in enumerate(mdp.actions):
            row = [ZERO] * m
            row[choice[i]] = ONE
            rows.append(row)
        return cls(rows)

    def check(self, mdp: Mdp) -> None:
        if [len(d) for d in self.pi] != mdp.actions:
            raise ValueError("policy does not match the MDP's action sets")


def deterministic_policies(mdp: Mdp) -> Iterator[StationaryPolicy]:
    """Every deterministic policy, in lexicographic order of action choices."""
    for choice in product(*(range(m) for m in mdp.actions)):
        yield StationaryPolicy.deterministic(mdp, choice)


def policy_matrix(mdp: Mdp, policy: StationaryPolicy) -> tuple[Matrix, Vector]:
    """Transition matrix ``P(π)`` and reward vector ``r(π)``."""
    policy.check(mdp)
    N = mdp.n_states
    P = zeros(N, N)
    r = [ZERO] * N
    for i in range(N):
        for a, w in enumerate(policy.pi[i]):
            if w:
                r[i] += w * mdp.rewards[i][a]
                for j, p in enumerate(mdp.transitions[i][a]):
                    P[i][j] += w * p
    return P, r


def _reachability(P: Matrix) -> list[set[int]]:
    N = len(P)
    reach = []
    for i in range(N):
        seen = {i}
        stack = [i]
        while stack:
            k = stack.pop()
            for j in range(N):
                if P[k][j] and j not in seen:
                    seen.add(j)
                    stack.append(j)
        reach.append(seen)
    return reach


def recurrent_classes(P: Matrix) -> list[list[int]]:
    """Closed communicating classes of the chain, i.e. terminal SCCs of its graph."""
    reach = _reachability(P)
    classes = []
    assigned: set[int] = set()
    for i in range(len(P)):
        if i in assigned:
            continue
        if all(i in reach[j] for j in reach[i]):
            cls = sorted(reach[i])
            classes.append(cls)
            assigned.update(cls)
    return classes


def stationary_distribution(P: Matrix, states: Sequence[int]) -> Vector:
    """Stationary distribution of the irreducible block ``P[states, states]``."""
    k = len(states)
    block = [[P[i][j] for j in states] for i in states]
    # (I - Pᵀ) π = 0 with the last equation replaced by Σ π = 1
    A = add(identity(k), transpose(block), -ONE)
    A[-1] = [ONE] * k
    rhs = [ZERO] * (k - 1) + [ONE]
    return solve_linear(A, rhs)


def cesaro_limit(P: Matrix) -> Matrix:
    """Exact Cesàro limit ``P*`` from the chain's class structure.

    Each recurrent class contributes its stationary distribution; transient
    states mix them with their absorption probabilities.
    """
    N = len(P)
    classes = recurrent_classes(P)
    recurrent = {s for c in classes for s in c}
    transient = [i for i in range(N) if i not in recurrent]
    Pstar = zeros(N, N)
    if transient:
        Q = [[P[i][j] for j in transient] for i in transient]
        IQ = add(identity(len(transient)), Q, -ONE)
    for cls in classes:
        mu = stationary_distribution(P, cls)
        for i in cls:
            for j, w in zip(cls, mu):
                Pstar[i][j] = w
        if transient:
            into = [sum((P[i][j] for j in cls), ZERO) for i in transient]
            absorb = solve_linear(IQ, into)
            for i, f in zip(transient, absorb):
                for j, w in zip(cls, mu):
                    Pstar[i][j] = f * w
    return Pstar


@dataclass
class PolicyEvaluation:
    P: Matrix
    r: Vector
    Pstar: Matrix
    g: Vector
    h: Vector
    _cache: dict = field(default_factory=dict, repr=False)

    def v_alpha(self, alpha: Fraction) -> Vector:
        """Normalised discounted value ``(1-α)(I-αP)⁻¹r``."""
        alpha = Fraction(alpha)
        if alpha not in self._cache:
            self._cache[alpha] = _discounted(self.P, self.r, alpha)
        return self._cache[alpha]


def _discounted(P: Matrix, r: Vector, alpha: Fraction) -> Vector:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    A = add(identity(len(P)), P, -alpha)
    u = solve_linear(A, r)
    return [(1 - alpha) * v for v in u]


def evaluate_policy(mdp: Mdp, policy: StationaryPolicy) -> PolicyEvaluation:
    P, r = policy_matrix(mdp, policy)
    Pstar = cesaro_limit(P)
    g = matvec(Pstar, r)
    N = len(P)
    I = identity(N)
    fundamental = add(add(I, P, -ONE), Pstar)
    h = solve_linear(fundamental, matvec(add(I, Pstar, -ONE), r))
    return PolicyEvaluation(P, r, Pstar, g, h)


def discounted_value(mdp: Mdp, policy: StationaryPolicy, alpha: Fraction) -> Vector:
    P, r = policy_matrix(mdp, policy)
    return _discounted(P, r, Fraction(alpha))


def blackwell_gap(mdp: Mdp, policy: StationaryPolicy, alpha: Fraction,
                  evaluation: PolicyEvaluation | None = None) -> Vector:
    """Remainder ``v^α - g - (1-α)h`` beyond the first two expansion terms."""
    ev = evaluate_policy(mdp, policy) if evaluation is None else evaluation
    alpha = Fraction(alpha)
    v = ev.v_alpha(alpha)
    return [vi - gi - (1 - alpha) * hi for vi, gi, hi in zip(v, ev.g, ev.h)]


def shift_rewards(mdp: Mdp) -> tuple[Mdp, Fraction]:
    """Add ``max(0, -min r) + 1`` to every reward so all become positive."""
    lowest = min(min(r) for r in mdp.rewards)
    shift = max(ZERO, -lowest) + 1
    return mdp.with_rewards([[q + shift for q in r] for r in mdp.rewards]), shift


def _delta_minus(mdp: Mdp, scale: Fraction = ONE) -> Matrix:
    """Rows ``δ_ij - scale·p_iaj`` over state-action pairs."""
    rows = []
    for i, a in mdp.pairs():
        p = mdp.transitions[i][a]
        rows.append([(ONE if j == i else ZERO) - scale * p[j] for j in range(mdp.n_states)])
    return rows


def _indicator_rows(mdp: Mdp) -> Matrix:
    N = mdp.n_states
    return [[ONE if j == i else ZERO for j in range(N)] for i, _ in mdp.pairs()]


def _neg_identity(M: int) -> Matrix:
    return [[-ONE if k == l else ZERO for l in range(M)] for k in range(M)]


def _pair_rewards(mdp: Mdp) -> Vector:
    return [mdp.rewards[i][a] for i, a in mdp.pairs()]


def build_discounted_lp(mdp: Mdp, alpha: Fraction) -> LpStandardForm:
    """``min Σγ_j ṽ_j`` s.t. ``Σ_j (δ_ij - αp_iaj) ṽ_j - s_ia = r_ia``, ``ṽ, s >= 0``.

    Rewards are expected to be shifted already so that ``ṽ >= 0`` is harmless.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    M = mdp.n_pairs
    A = [row + neg for row, neg in zip(_delta_minus(mdp, alpha), _neg_identity(M))]
    c = [-g for g in mdp.gamma] + [ZERO] * M
    return LpStandardForm(A, _pair_rewards(mdp), c)


def build_average_lp(mdp: Mdp) -> LpStandardForm:
    """Two-block multichain average-reward LP in equality form.

    Rows ``Σ_j (δ_ij - p_iaj) ṽ_j - σ⁰_ia = 0`` then
    ``ṽ_i + Σ_j (δ_ij - p_iaj) ũ_j - σ¹_ia = r_ia``; columns ``(ṽ, ũ, σ⁰, σ¹)``.
    """
    N, M = mdp.n_states, mdp.n_pairs
    D = _delta_minus(mdp)
    E = _indicator_rows(mdp)
    negI = _neg_identity(M)
    zN = [ZERO] * N
    zM = [ZERO] * M
    top = [d + zN + neg + zM for d, neg in zip(D, negI)]
    bottom = [e + d + zM + neg for e, d, neg in zip(E, D, negI)]
    b = [ZERO] * M + _pair_rewards(mdp)
    c = [-g for g in mdp.gamma] + [ZERO] * (N + 2 * M)
    return LpStandardForm(top + bottom, b, c)


def build_perturbed_from_discounted(mdp: Mdp) -> PerturbedLp:
    """The discounted LP after ``v = ε/(1+ε)·ṽ`` with ``ε = (1-α)/α``, as a perturbed family.

    ``A0 = [δ - P | -I]``, ``A1 = [δ | 0]``, ``b0 = 0``, ``b1 = r``,
    ``c0 = (-γ, 0)``, ``c1 = 0``.
    """
    N, M = mdp.n_states, mdp.n_pairs
    A0 = [d + neg for d, neg in zip(_delta_minus(mdp), _neg_identity(M))]
    A1 = [e + [ZERO] * M for e in _indicator_rows(mdp)]
    c0 = [-g for g in mdp.gamma] + [ZERO] * M
    return PerturbedLp(A0, A1, [ZERO] * M, _pair_rewards(mdp), c0, [ZERO] * (N + M))


def interest_rate(alpha: Fraction) -> Fraction:
    """``ε = (1-α)/α``."""
    alpha = Fraction(alpha)
    return (1 - alpha) / alpha


def discount_factor(eps: Fraction) -> Fraction:
    """Inverse of :func:`interest_rate`, ``α = 1/(1+ε)``."""
    return 1 / (1 + Fraction(eps))


def derive_limiting_lp(mdp: Mdp) -> LimitingLp:
    return build_limiting(build_perturbed_from_discounted(mdp), Variant.SIMPLIFIED)


def limiting_to_average_columns(mdp: Mdp) -> list[int]:
    """``perm[k]`` is the average-LP column of derived-limiting column ``k``."""
    N, M = mdp.n_states, mdp.n_pairs
    v0 = list(range(N))
    s0 = list(range(2 * N, 2 * N + M))
    v1 = list(range(N, 2 * N))
    s1 = list(range(2 * N + M, 2 * N + 2 * M))
    return v0 + s0 + v1 + s1


def permute_columns(A: Matrix, perm: Sequence[int], width: int) -> Matrix:
    """Place column ``k`` of ``A`` at position ``perm[k]``."""
    out = []
    for row in A:
        new = [ZERO] * width
        for k, v in enumerate(row):
            new[perm[k]] = v
        out.append(new)
    return out


def limiting_matches_average(mdp: Mdp) -> bool:
    """Exact equality of the derived limiting LP and the average LP up to column order."""
    lim = derive_limiting_lp(mdp).lp
    avg = build_average_lp(mdp)
    perm = limiting_to_average_columns(mdp)
    width = avg.n
    return (
        permute_columns(lim.A, perm, width) == avg.A
        and lim.b == avg.b
        and permute_columns([lim.c], perm, width)[0] == avg.c
        and lim.free_vars == avg.free_vars
    )


@dataclass(frozen=True)
class MdpLpBundle:
    discounted: PerturbedLp
    average: LpStandardForm
    derived_limiting: LimitingLp
    shift: Fraction
    shifted: Mdp


def build_bundle(mdp: Mdp) -> MdpLpBundle:
    shifted, shift = shift_rewards(mdp)
    return MdpLpBundle(
        build_perturbed_from_discounted(shifted),
        build_average_lp(shifted),
        derive_limiting_lp(shifted),
        shift,
        shifted,
    )


def weighted(gamma: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((g * x for g, x in zip(gamma, v)), ZERO)


def best_average_value(mdp: Mdp, cap: int = DEFAULT_POLICY_CAP) -> Fraction | None:
    """``max_π Σ γ_j g_j(π)`` over deterministic policies, or None above ``cap``."""
    if prod(mdp.actions) > cap:
        return None
    return max(weighted(mdp.gamma, evaluate_policy(mdp, pi).g) for pi in deterministic_policies(mdp))


def best_discounted_values(mdp: Mdp, alpha: Fraction) -> Vector:
    """Componentwise maximum of ``(I - αP(π))⁻¹ r(π)`` over deterministic policies."""
    alpha = Fraction(alpha)
    best = None
    for pi in deterministic_policies(mdp):
        v = [x / (1 - alpha) for x in discounted_value(mdp, pi, alpha)]
        best = v if best is None else [max(a, b) for a, b in zip(best, v)]
    return best


@dataclass
class ReductionReport:
    shift: Fraction
    assumptions: AssumptionReport
    es1: Es1Report
    sweep: SweepReport
    limiting_value: Fraction | None
    average_value: Fraction | None
    brute_force_value: Fraction | None
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def _gaps_shrinking(report: SweepReport) -> bool:
    gaps = report.gaps
    if any(g is None for g in gaps):
        return False
    return gaps[-1] == 0 or gaps[-1] < gaps[0]


def verify_reduction(mdp: Mdp, eps0: Fraction = Fraction(1, 2), ratio: Fraction = Fraction(1, 2),
                     steps: int = 12, eps_probe: Fraction = Fraction(1, 8),
                     policy_cap: int = DEFAULT_POLICY_CAP,
                     vertex_cap: int | None = 0) -> ReductionReport:
    """Check that the derived limiting LP is the limiting LP of the discounted family.

    Values are reported as ``Σ γ_j g_j`` in the original reward units.
    Failed checks are collected in ``failures`` rather than raised.
    """
    bundle = build_bundle(mdp)
    p = bundle.discounted
    offset = bundle.shift * sum(mdp.gamma)
    failures = []

    assumptions = check_assumptions(p, eps_probe)
    if not assumptions.h1:
        failures.append("h1: constraint matrix lacks full row rank")
    j0 = compute_j0(p)
    es1 = check_es1(p, j0)
    if not es1.holds:
        failures.append("es1: extended Slater condition of order 1 fails")
    report = sweep(p, eps0, ratio, steps, vertex_cap=vertex_cap, j0=j0)
    if not _gaps_shrinking(report):
        failures.append("sweep: gaps do not shrink")

    def unshift(res):
        return -res.value - offset if res.optimal else None

    limiting_value = unshift(solve(bundle.derived_limiting.lp))
    average_value = unshift(solve(bundle.average))
    brute = best_average_value(mdp, policy_cap)
    if limiting_value is None or limiting_value != average_value:
        failures.append("values: derived limiting LP and average LP disagree")
    if brute is not None and brute != average_value:
        failures.append("values: average LP disagrees with policy enumeration")
    if not limiting_matches_average(bundle.shifted):
        failures.append("structure: derived limiting LP differs from the average LP")
    return ReductionReport(bundle.shift, assumptions, es1, report,
                           limiting_value, average_value, brute, failures)
