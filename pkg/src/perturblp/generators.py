"""Seeded random instance generators for tests and experiments.

Every generator takes a ``random.Random`` so corpora are reproducible from
a seed.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .mdp import Mdp, uniform_gamma
from .perturbed import PerturbedLp
from .simplex import LpStandardForm


def random_lp(rng: random.Random, max_m: int = 4, max_n: int = 8, lo: int = -5, hi: int = 5,
              free_prob: float = 0.0) -> LpStandardForm:
    m = rng.randint(1, max_m)
    n = rng.randint(1, max_n)
    A = [[rng.randint(lo, hi) for _ in range(n)] for _ in range(m)]
    b = [rng.randint(lo, hi) for _ in range(m)]
    c = [rng.randint(lo, hi) for _ in range(n)]
    free = frozenset(j for j in range(n) if rng.random() < free_prob)
    return LpStandardForm(A, b, c, free)


def random_perturbed(rng: random.Random, max_m: int = 3, max_n: int = 6) -> PerturbedLp:
    """A perturbed family whose feasible sets stay bounded for ``ε >= 0``.

    Row 0 has strictly positive ``A0`` and nonnegative ``A1`` coefficients,
    which bounds every member.  A random support ``S`` carries a feasible
    point of the unperturbed problem; with some probability one row has
    positive coefficients only off ``S`` and a zero right-hand side, forcing
    those coordinates to zero at ``ε = 0`` so the Slater condition fails.
    """
    m = rng.randint(1, max_m)
    n = rng.randint(m + 1, max_n)
    support = [j for j in range(n) if rng.random() < 0.7] or [rng.randrange(n)]
    xhat = [rng.randint(1, 3) if j in support else 0 for j in range(n)]
    force = m >= 2 and len(support) < n and rng.random() < 0.6

    A0 = [[rng.randint(1, 3) for _ in range(n)]]
    A1 = [[rng.randint(0, 2) for _ in range(n)]]
    for r in range(1, m):
        if force and r == 1:
            A0.append([0 if j in support else rng.randint(1, 3) for j in range(n)])
        else:
            A0.append([rng.randint(-3, 3) for _ in range(n)])
        A1.append([rng.randint(-2, 2) for _ in range(n)])
    b0 = [sum(a * x for a, x in zip(row, xhat)) for row in A0]
    b1 = [rng.randint(-3, 3) for _ in range(m)]
    c0 = [rng.randint(-5, 5) for _ in range(n)]
    c1 = [rng.randint(-5, 5) for _ in range(n)]
    return PerturbedLp(A0, A1, b0, b1, c0, c1)


def random_perturbed_with_positive_kernel(rng: random.Random, max_m: int = 3,
                                          max_n: int = 6) -> PerturbedLp:
    """A family whose unperturbed matrix, restricted to a support ``S``, kills a positive vector.

    A positive ``κ`` on ``S`` is fixed first and every row's ``S``-part is
    made orthogonal to it; one optional row is zero on ``S`` and positive
    elsewhere so that coordinates off ``S`` are forced to zero at ``ε = 0``.
    """
    m = rng.randint(1, max_m)
    n = rng.randint(m + 1, max_n)
    size = rng.randint(2, n)
    support = sorted(rng.sample(range(n), size))
    off = [j for j in range(n) if j not in support]
    kappa = {j: rng.randint(1, 3) for j in support}
    xhat = [rng.randint(1, 3) if j in kappa else 0 for j in range(n)]

    def orthogonal_row():
        row = [Fraction(rng.randint(-3, 3)) for _ in range(n)]
        last = support[-1]
        row[last] = -sum(row[j] * kappa[j] for j in support[:-1]) / kappa[last]
        return row

    A0 = []
    for r in range(m):
        if r == 0 and off:
            A0.append([Fraction(0) if j in kappa else Fraction(rng.randint(1, 3)) for j in range(n)])
        else:
            A0.append(orthogonal_row())
    A1 = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(m)]
    b0 = [sum(a * x for a, x in zip(row, xhat)) for row in A0]
    b1 = [rng.randint(-3, 3) for _ in range(m)]
    c0 = [rng.randint(-5, 5) for _ in range(n)]
    c1 = [rng.randint(-5, 5) for _ in range(n)]
    return PerturbedLp(A0, A1, b0, b1, c0, c1)


def random_distribution(rng: random.Random, size: int, max_den: int = 8) -> list[Fraction]:
    """Random probability vector whose entries share a denominator ``<= max_den``."""
    den = rng.randint(1, max_den)
    cuts = sorted(rng.randint(0, den) for _ in range(size - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    rng.shuffle(parts)
    return [Fraction(k, den) for k in parts]


def random_mdp(rng: random.Random, max_states: int = 4, max_actions: int = 3,
               max_den: int = 8, reward_range: int = 5) -> Mdp:
    """Random MDP with rational transitions (denominators ``<= max_den``) and integer rewards."""
    N = rng.randint(1, max_states)
    rewards = []
    transitions = []
    for _ in range(N):
        m = rng.randint(1, max_actions)
        rewards.append([rng.randint(-reward_range, reward_range) for _ in range(m)])
        transitions.append([random_distribution(rng, N, max_den) for _ in range(m)])
    return Mdp(rewards, transitions, uniform_gamma(N))


def mdp_corpus(count: int, seed: int = 0, **kwargs) -> list[Mdp]:
    rng = random.Random(seed)
    return [random_mdp(rng, **kwargs) for _ in range(count)]
