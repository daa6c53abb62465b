from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perturblp.linalg import (
    add,
    det,
    generic_rank_pencil,
    identity,
    matmul,
    matvec,
    nullspace,
    parse_rational,
    rank,
    rat,
    solve_linear,
    transpose,
    zeros,
)


def test_rat_reduces():
    assert rat(2, 4) == Fraction(1, 2)
    assert (rat(2, 4).numerator, rat(2, 4).denominator) == (1, 2)


def test_rat_canonical_zero():
    z = rat(0, 7)
    assert (z.numerator, z.denominator) == (0, 1)


def test_rat_sign_on_numerator():
    q = rat(3, -6)
    assert (q.numerator, q.denominator) == (-1, 2)


def test_rat_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        rat(1, 0)


@pytest.mark.parametrize("text, expected", [
    ("1/2", Fraction(1, 2)),
    ("-3", Fraction(-3)),
    (" 4 / -1 ", None),
    (7, Fraction(7)),
])
def test_parse_rational(text, expected):
    if expected is None:
        with pytest.raises(ValueError):
            parse_rational(text)
    else:
        assert parse_rational(text) == expected


@pytest.mark.parametrize("bad", ["0.5", "1e3", 0.5, True, "1/0", "abc", None])
def test_parse_rational_rejects_inexact(bad):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_rational(bad)


def test_solve_identity():
    assert solve_linear(identity(2), [3, 5]) == [3, 5]


def test_solve_singular():
    assert solve_linear([[Fraction(1), Fraction(1)], [Fraction(1), Fraction(1)]], [1, 1]) is None


def test_solve_two_by_two():
    x = solve_linear([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]], [5, 10])
    assert x == [1, 3]
    # substitution check
    assert 2 * x[0] + x[1] == 5 and x[0] + 3 * x[1] == 10


def test_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_linear(identity(2), [1, 2, 3])
    with pytest.raises(ValueError):
        solve_linear([[Fraction(1), Fraction(2)]], [1])


def test_rank_examples():
    assert rank(identity(3)) == 3
    assert rank(zeros(2, 4)) == 0
    assert rank([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)], [Fraction(0), Fraction(1)]]) == 2


def test_pencil_examples():
    Z = zeros(2, 2)
    assert generic_rank_pencil(identity(2), Z) == 2
    assert generic_rank_pencil([[Fraction(0), Fraction(0)]], [[Fraction(1), Fraction(0)]]) == 1
    A0 = [[Fraction(1), Fraction(1)], [Fraction(1), Fraction(1)]]
    A1 = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(0)]]
    # det(A0 + εA1) = ε
    assert det(add(A0, A1, Fraction(1, 3))) == Fraction(1, 3)
    assert generic_rank_pencil(A0, A1) == 2


def test_pencil_shape_mismatch():
    with pytest.raises(ValueError):
        generic_rank_pencil(identity(2), identity(3))


def test_nullspace_annihilates():
    A = [[Fraction(1), Fraction(2), Fraction(3)], [Fraction(2), Fraction(4), Fraction(6)]]
    basis = nullspace(A)
    assert len(basis) == 2
    for v in basis:
        assert matvec(A, v) == [0, 0]


ints = st.integers(-9, 9)


def square(n):
    return st.lists(st.lists(ints, min_size=n, max_size=n), min_size=n, max_size=n)


def rect():
    return st.integers(1, 5).flatmap(
        lambda m: st.integers(1, 5).flatmap(
            lambda n: st.lists(st.lists(ints, min_size=n, max_size=n), min_size=m, max_size=m)
        )
    )


def _canonical(q: Fraction) -> bool:
    return q.denominator > 0 and gcd(abs(q.numerator), q.denominator) == 1


@given(st.lists(st.tuples(ints, st.integers(1, 50)), min_size=2, max_size=8))
def test_arithmetic_stays_canonical(pairs):
    qs = [rat(a, b) for a, b in pairs]
    acc = qs[0]
    for q in qs[1:]:
        for r in (acc + q, acc - q, acc * q):
            assert _canonical(r)
        if q:
            assert _canonical(acc / q)
        acc = acc * q + q
        assert _canonical(acc)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(square(n), st.lists(ints, min_size=n, max_size=n))))
def test_solve_reproduces_rhs(data):
    A, b = data
    A = [[Fraction(v) for v in row] for row in A]
    x = solve_linear(A, b)
    if det(A) == 0:
        assert x is None
    else:
        assert matvec(A, x) == b


@settings(max_examples=80, deadline=None)
@given(rect())
def test_rank_transpose(A):
    A = [[Fraction(v) for v in row] for row in A]
    assert rank(A) == rank(transpose(A))


@settings(max_examples=60, deadline=None)
@given(rect())
def test_pencil_with_zero_perturbation(A):
    A = [[Fraction(v) for v in row] for row in A]
    assert generic_rank_pencil(A, zeros(len(A), len(A[0]))) == rank(A)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(square(n), square(n))))
def test_det_multiplicative(pair):
    A, B = ([[Fraction(v) for v in row] for row in M] for M in pair)
    assert det(matmul(A, B)) == det(A) * det(B)
