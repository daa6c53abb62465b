"""Acceptance suite: one test per acceptance criterion, each over a fixed seeded corpus.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion (see ``conftest.py``).
"""

import random
from fractions import Fraction
from functools import cache

import pytest

from perturblp.generators import (
    mdp_corpus,
    random_lp,
    random_perturbed,
    random_perturbed_with_positive_kernel,
)
from perturblp.linalg import norm_inf
from perturblp.mdp import (
    best_average_value,
    blackwell_gap,
    build_average_lp,
    build_discounted_lp,
    build_perturbed_from_discounted,
    derive_limiting_lp,
    deterministic_policies,
    discounted_value,
    evaluate_policy,
    interest_rate,
    limiting_to_average_columns,
    permute_columns,
    shift_rewards,
    weighted,
)
from perturblp.perturbed import (
    EquivalenceReason,
    InfeasibleError,
    PerturbedLp,
    build_limiting,
    check_assumptions,
    check_equivalence,
    check_es1,
    compute_j0,
    instantiate,
    sweep,
)
from perturblp.simplex import brute_force_solve, maximize_coordinate, solve, verify_dual

LP_COUNT = 300
PERTURBED_COUNT = 60
MDP_COUNT = 100
SWEEP_STEPS = 13          # ε_k = 2^-(k+1), k = 0..12, final point 2^-13
TAIL = 6
DISCOUNTS = (Fraction(1, 2), Fraction(2, 3), Fraction(9, 10))


def tolerance(value):
    return Fraction(1, 2**8) * (1 + abs(value))


@cache
def lp_corpus():
    rng = random.Random(0)
    plain = [random_lp(rng) for _ in range(LP_COUNT - 100)]
    with_free = [random_lp(rng, free_prob=0.25) for _ in range(100)]
    return plain + with_free


@cache
def solved_lps():
    return [(lp, solve(lp)) for lp in lp_corpus()]


@cache
def perturbed_stream():
    """Seed-0 generator stream, cut once PERTURBED_COUNT instances satisfy the hypotheses.

    Every drawn instance is kept so that the ordering and J0 checks also see the rejects.
    Each entry is ``(p, j0 or None, qualifies, es1_holds)``.
    """
    rng = random.Random(0)
    stream = []
    qualified = 0
    while qualified < PERTURBED_COUNT:
        p = random_perturbed(rng)
        try:
            j0 = compute_j0(p)
        except InfeasibleError:
            stream.append((p, None, False, False))
            continue
        a = check_assumptions(p)
        holds = check_es1(p, j0).holds
        ok = a.h1 and a.h2 and a.h0star_probe
        stream.append((p, j0, ok, holds))
        qualified += ok and holds
    return stream


@cache
def zero_rhs_corpus():
    rng = random.Random(1)
    out = []
    for _ in range(60):
        p = random_perturbed(rng)
        out.append(PerturbedLp(p.A0, p.A1, [0] * p.m, p.b1, p.c0, p.c1))
    for mdp in mdp_corpus(40, seed=2):
        out.append(build_perturbed_from_discounted(shift_rewards(mdp)[0]))
    return out


@cache
def kernel_corpus():
    rng = random.Random(3)
    return [random_perturbed_with_positive_kernel(rng) for _ in range(150)]


@cache
def mdps():
    return mdp_corpus(MDP_COUNT, seed=0)


def report(failures, total, what):
    assert not failures, f"{len(failures)}/{total} {what} failed: {failures[:5]}"


@pytest.mark.acceptance("simplex status and value equal the vertex-enumeration oracle")
def test_simplex_matches_enumeration_oracle():
    failures = []
    for k, (lp, res) in enumerate(solved_lps()):
        status, value = brute_force_solve(lp)
        if res.status is not status or res.value != value:
            failures.append((k, res.status, res.value, status, value))
    assert len(lp_corpus()) >= 200
    report(failures, LP_COUNT, "LPs")


@pytest.mark.acceptance("every optimal solve carries an exactly verified dual certificate")
def test_dual_certificates():
    optimal = [(lp, res) for lp, res in solved_lps() if res.optimal]
    failures = [k for k, (lp, res) in enumerate(optimal) if not verify_dual(lp, res.dual, res.value)]
    assert optimal
    report(failures, len(optimal), "dual certificates")


@pytest.mark.acceptance("perturbed optimum converges to the limiting value under the hypotheses")
def test_convergence_to_limiting_value():
    failures = []
    qualified = 0
    for k, (p, j0, ok, holds) in enumerate(perturbed_stream()):
        if not ok:
            continue
        rep = sweep(p, steps=SWEEP_STEPS, vertex_cap=0, j0=j0)
        F1 = rep.limit_value
        last = rep.points[-1]
        if holds:
            qualified += 1
            gaps = rep.gaps[-TAIL:]
            if F1 is None or any(g is None for g in gaps):
                failures.append((k, "missing values"))
            elif not gaps[-1] < tolerance(F1):
                failures.append((k, "final gap", gaps[-1]))
            elif any(b > a for a, b in zip(gaps, gaps[1:])):
                failures.append((k, "gap increases", gaps))
        elif F1 is not None and last.value is not None and last.value > F1 + tolerance(F1):
            failures.append((k, "upper bound", last.value, F1))
    assert qualified >= 50
    report(failures, len(perturbed_stream()), "sweeps")


@pytest.mark.acceptance("limiting optimum never exceeds the unperturbed optimum")
def test_limiting_value_below_unperturbed():
    failures = []
    checked = 0
    for k, (p, j0, _, _) in enumerate(perturbed_stream()):
        if j0 is None:
            continue
        lim = solve(build_limiting(p, j0=j0).lp)
        base = solve(instantiate(p, 0))
        if lim.optimal and base.optimal:
            checked += 1
            if lim.value > base.value:
                failures.append((k, lim.value, base.value))
    assert checked
    report(failures, checked, "instances")


def _equivalence_failures(corpus, reason):
    failures = []
    seen = 0
    for k, p in enumerate(corpus):
        try:
            rep = check_equivalence(p)
        except InfeasibleError:
            continue
        if rep.reason is not reason:
            if reason is EquivalenceReason.ZERO_RHS:
                failures.append((k, "not certified", rep.reason))
            continue
        seen += 1
        if rep.theta1.status is not rep.simplified.status or rep.theta1.value != rep.simplified.value:
            failures.append((k, rep.theta1.status, rep.theta1.value, rep.simplified.value))
    return failures, seen


@pytest.mark.acceptance("zero unperturbed rhs or a positive kernel vector makes both limiting LPs agree")
def test_limiting_variants_agree_when_certified():
    zero_failures, zero_seen = _equivalence_failures(zero_rhs_corpus(), EquivalenceReason.ZERO_RHS)
    kernel_failures, kernel_seen = _equivalence_failures(kernel_corpus(), EquivalenceReason.POSITIVE_KERNEL)
    assert zero_seen >= 50 and kernel_seen >= 50
    report(zero_failures + kernel_failures, zero_seen + kernel_seen, "certified instances")


@pytest.mark.acceptance("derived limiting LP is the average-reward LP up to column order, with equal values")
def test_derived_limiting_is_average_lp():
    failures = []
    for k, mdp in enumerate(mdps()):
        shifted, _ = shift_rewards(mdp)
        lim = derive_limiting_lp(shifted).lp
        avg = build_average_lp(shifted)
        perm = limiting_to_average_columns(shifted)
        same = (
            permute_columns(lim.A, perm, avg.n) == avg.A
            and lim.b == avg.b
            and permute_columns([lim.c], perm, avg.n)[0] == avg.c
        )
        if not same:
            failures.append((k, "matrix"))
        elif solve(lim).value != solve(avg).value:
            failures.append((k, "value"))
    report(failures, MDP_COUNT, "MDPs")


@pytest.mark.acceptance("MDP-derived families have full row rank and satisfy ES-1")
def test_mdp_families_meet_hypotheses():
    failures = []
    for k, mdp in enumerate(mdps()):
        p = build_perturbed_from_discounted(shift_rewards(mdp)[0])
        if not check_assumptions(p).h1:
            failures.append((k, "h1"))
        if not check_es1(p).holds:
            failures.append((k, "es1"))
    report(failures, MDP_COUNT, "MDPs")


@pytest.mark.acceptance("average-LP value equals the best deterministic policy's weighted gain")
def test_average_lp_matches_policy_enumeration():
    failures = []
    for k, mdp in enumerate(mdps()):
        shifted, shift = shift_rewards(mdp)
        lp_value = -solve(build_average_lp(shifted)).value - shift * sum(mdp.gamma)
        best = best_average_value(mdp, cap=10_000)
        if best is None or lp_value != best:
            failures.append((k, lp_value, best))
    report(failures, MDP_COUNT, "MDPs")


@pytest.mark.acceptance("discounted LP and the instantiated family reproduce the best discounted value")
def test_discounted_consistency():
    failures = []
    for k, mdp in enumerate(mdps()):
        shifted, _ = shift_rewards(mdp)
        family = build_perturbed_from_discounted(shifted)
        for alpha in DISCOUNTS:
            lp_value = -solve(build_discounted_lp(shifted, alpha)).value
            best = max(
                weighted(shifted.gamma, discounted_value(shifted, pi, alpha)) / (1 - alpha)
                for pi in deterministic_policies(shifted)
            )
            member = -solve(instantiate(family, interest_rate(alpha))).value
            if lp_value != best or member != (1 - alpha) * lp_value:
                failures.append((k, alpha, lp_value, best, member))
    report(failures, MDP_COUNT * len(DISCOUNTS), "MDP/discount pairs")


@pytest.mark.acceptance("Blackwell remainder shrinks by at least 1.9 per halving of 1-alpha")
def test_blackwell_remainder_second_order():
    failures = []
    policies = 0
    for k, mdp in enumerate(mdps()):
        for pi in deterministic_policies(mdp):
            policies += 1
            ev = evaluate_policy(mdp, pi)
            norms = {j: norm_inf(blackwell_gap(mdp, pi, 1 - Fraction(1, 2**j), ev)) for j in range(8, 15)}
            for j in range(10, 14):
                if norms[j] * 10 < norms[j + 1] * 19:
                    failures.append((k, j, norms[j], norms[j + 1]))
    report(failures, policies, "policy steps")


@pytest.mark.acceptance("J0 witness is feasible, positive exactly on J0, and other coordinates max out at 0")
def test_j0_soundness():
    failures = []
    checked = 0
    for k, (p, j0, _, _) in enumerate(perturbed_stream()):
        if j0 is None:
            continue
        checked += 1
        lp0 = instantiate(p, 0)
        support = {j for j, w in enumerate(j0.witness) if w > 0}
        if not lp0.is_feasible(j0.witness) or support != set(j0.indices):
            failures.append((k, "witness"))
        for j in range(p.n):
            if j not in j0 and maximize_coordinate(lp0, j) != 0:
                failures.append((k, j))
    report(failures, checked, "instances")


def test_corpus_is_reproducible():
    first = [p for p, *_ in perturbed_stream()][:5]
    rng = random.Random(0)
    assert first == [random_perturbed(rng) for _ in range(5)]
