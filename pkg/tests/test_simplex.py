import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perturblp.generators import random_lp
from perturblp.simplex import (
    EnumerationCapExceeded,
    LpStandardForm,
    Status,
    brute_force_solve,
    enumerate_rays,
    enumerate_vertices,
    maximize_coordinate,
    solve,
    verify_dual,
)


def test_simple_optimum():
    res = solve(LpStandardForm([[1, 1]], [1], [1, 0]))
    assert res.status is Status.OPTIMAL
    assert res.value == 1
    assert res.x == [1, 0]
    assert res.basis == (0,)


def test_infeasible():
    assert solve(LpStandardForm([[1]], [-1], [1])).status is Status.INFEASIBLE


def test_unbounded_ray():
    lp = LpStandardForm([[1, -1]], [0], [1, 0])
    assert solve(lp).status is Status.UNBOUNDED
    assert [1, 1] in [[2 * v for v in d] for d in enumerate_rays(lp)]


def test_free_variable_canonical_split():
    # max -x1 - x2 with x1 free, x1 - x2 = -3: best is x1 = -3, x2 = 0
    lp = LpStandardForm([[1, -1]], [-3], [-1, -1], frozenset({0}))
    res = solve(lp)
    assert res.optimal and res.x == [-3, 0] and res.value == 3
    assert verify_dual(lp, res.dual, res.value)


def test_redundant_rows_are_dropped():
    lp = LpStandardForm([[1, 1], [2, 2]], [1, 2], [1, 2])
    res = solve(lp)
    assert res.optimal and res.value == 2
    assert len(res.basis) == 1
    assert verify_dual(lp, res.dual, res.value)


def test_inconsistent_rows():
    lp = LpStandardForm([[1, 1], [2, 2]], [1, 3], [1, 2])
    assert solve(lp).status is Status.INFEASIBLE
    assert enumerate_vertices(lp) == []


def test_no_rows():
    assert solve(LpStandardForm([], [], [0, 0])).value == 0
    assert solve(LpStandardForm([], [], [0, 1])).status is Status.UNBOUNDED


def test_bad_dimensions():
    with pytest.raises(ValueError):
        LpStandardForm([[1, 2]], [1, 2], [0, 0])
    with pytest.raises(ValueError):
        LpStandardForm([[1, 2]], [1], [0, 0], frozenset({5}))


def test_maximize_coordinate():
    simplex = LpStandardForm([[1, 1]], [1], [0, 0])
    assert maximize_coordinate(simplex, 0) == 1
    assert maximize_coordinate(LpStandardForm([[1, 0]], [0], [0, 0]), 1) is Status.UNBOUNDED
    assert maximize_coordinate(LpStandardForm([[1, 1]], [-1], [0, 0]), 0) is Status.INFEASIBLE
    with pytest.raises(IndexError):
        maximize_coordinate(simplex, 2)


def test_enumerate_vertices_simplex():
    verts = enumerate_vertices(LpStandardForm([[1, 1]], [1], [0, 0]))
    assert sorted(tuple(v.x) for v in verts) == [(0, 1), (1, 0)]


def test_enumerate_vertices_sorted_by_value():
    verts = enumerate_vertices(LpStandardForm([[1, 1, 1]], [2], [1, 3, 2]))
    assert [v.value for v in verts] == [6, 4, 2]


def test_enumeration_cap():
    lp = LpStandardForm([[1] * 12 for _ in range(1)], [1], [0] * 12)
    with pytest.raises(EnumerationCapExceeded):
        enumerate_vertices(lp, cap=5)


def test_enumeration_cap_env(monkeypatch):
    monkeypatch.setenv("PERTURBLP_BASIS_CAP", "3")
    with pytest.raises(EnumerationCapExceeded):
        enumerate_vertices(LpStandardForm([[1, 1, 1, 1]], [1], [0] * 4))


def test_oracle_self_consistency_small():
    rng = random.Random(11)
    for _ in range(60):
        lp = random_lp(rng, max_m=3, max_n=10)
        res = solve(lp)
        verts = enumerate_vertices(lp)
        if res.optimal:
            assert verts and verts[0].value == res.value


def _degenerate_lp(rng):
    m = rng.randint(2, 4)
    n = rng.randint(m + 1, 8)
    A = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(m)]
    b = [0 if rng.random() < 0.7 else rng.randint(0, 2) for _ in range(m)]
    c = [rng.randint(-2, 3) for _ in range(n)]
    return LpStandardForm(A, b, c)


def test_bland_terminates_on_degenerate_instances():
    rng = random.Random(3)
    for _ in range(150):
        lp = _degenerate_lp(rng)
        budget = comb(lp.n, lp.m) * (lp.m + lp.n)
        res = solve(lp, max_iterations=budget)
        assert res.iterations <= budget
        assert res.status == brute_force_solve(lp)[0]


def test_iteration_budget_enforced():
    lp = LpStandardForm([[1, 1, 1]], [1], [1, 2, 3])
    with pytest.raises(RuntimeError):
        solve(lp, max_iterations=0)


lp_strategy = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 7).flatmap(
        lambda n: st.builds(
            LpStandardForm,
            st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=m, max_size=m),
            st.lists(st.integers(-5, 5), min_size=m, max_size=m),
            st.lists(st.integers(-5, 5), min_size=n, max_size=n),
            st.frozensets(st.integers(0, n - 1), max_size=2),
        )
    )
)


@settings(max_examples=150, deadline=None)
@given(lp_strategy)
def test_solve_matches_oracle(lp):
    res = solve(lp)
    status, value = brute_force_solve(lp)
    assert res.status is status
    assert res.value == value
    if res.optimal:
        assert all(r == 0 for r in lp.residual(res.x))
        assert lp.is_feasible(res.x)
        assert res.value == sum(ci * xi for ci, xi in zip(lp.c, res.x))
        assert verify_dual(lp, res.dual, res.value)


def test_verify_dual_rejects_bad_certificate():
    lp = LpStandardForm([[1, 1]], [1], [1, 0])
    res = solve(lp)
    assert verify_dual(lp, res.dual, res.value)
    assert not verify_dual(lp, [Fraction(1, 2)], res.value)
    assert not verify_dual(lp, res.dual, res.value + 1)
