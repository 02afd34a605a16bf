from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcx.core import ExactMatrix, nsc, random_convex_seq
from gcx.curve import (
    Arc,
    CurveError,
    CurveSpec,
    UnipotentMatrix,
    canonical_word,
    continuize_seq,
    curve_minor_poly,
    discretize_curve,
    exp_arc,
    exp_arc_poly,
    factor_pos_eta,
    is_reduced,
    lambda_arc,
    nz,
    random_curve,
    word_product,
)
from gcx.poly import X

I2, I3 = UnipotentMatrix.identity(2), UnipotentMatrix.identity(3)


def U(rows):
    return UnipotentMatrix(tuple(tuple(r) for r in rows))


def test_lambda_examples():
    assert lambda_arc(2, 1, 3) == U([[1, 0], [3, 1]])
    assert lambda_arc(4, 2, 0) == UnipotentMatrix.identity(4)
    assert lambda_arc(4, 2, 2) @ lambda_arc(4, 2, 5) == lambda_arc(4, 2, 7)
    with pytest.raises(IndexError):
        lambda_arc(3, 3, 1)


def test_exp_arc_examples():
    rows = exp_arc_poly((1, 1))
    assert rows[1][0] == X and rows[2][0] == X * X * Fraction(1, 2) and rows[2][1] == X
    assert exp_arc_poly((1,))[1][0] == X
    with pytest.raises(ValueError):
        exp_arc_poly((1, 0))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_exp_arc_group_law(n, seed):
    spec = random_curve(1, n, seed)
    c = spec.arcs[0].c
    s, t = Fraction(seed % 7, 3), Fraction(seed % 5 + 1, 2)
    assert exp_arc(c, s) @ exp_arc(c, t) == exp_arc(c, s + t)
    entry = exp_arc_poly(c)[n - 1][0]
    assert entry.degree == n - 1 and entry.leading > 0


def test_curve_minor_examples():
    assert curve_minor_poly(CurveSpec(2, 1, I2, (Arc((1,), 5),)), 0) == X
    assert curve_minor_poly(CurveSpec(3, 2, I3, (Arc((1, 1), 5),)), 0) == X * X * Fraction(1, 2)


def test_minor_degree_family():
    for n in range(2, 7):
        for k in range(1, n):
            spec = CurveSpec(n, k, UnipotentMatrix.identity(n), (Arc((1,) * (n - 1), 1),))
            assert curve_minor_poly(spec, 0).degree == k * (n - k)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_minor_degree_bound(n, seed):
    k = 1 + seed % (n - 1)
    spec = random_curve(k, n, seed, arcs=2)
    for i in range(len(spec.arcs)):
        assert curve_minor_poly(spec, i).degree <= k * (n - k)


def test_nz_examples():
    assert nz(CurveSpec(2, 1, I2, (Arc((1,), 5),))) == 1
    assert nz(CurveSpec(3, 2, I3, (Arc((1, 1), 5),))) == 1


def test_nz_counts_junction_roots_once():
    # m(t) = t - 1 on the first arc: the zero sits exactly at the junction
    spec = CurveSpec(2, 1, U([[1, 0], [-1, 1]]), (Arc((1,), 1), Arc((1,), 1)))
    assert nz(spec) == 1


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_arc_minor_never_vanishes_identically(n, seed):
    # the unit diagonal block contributes a positive top coefficient
    k = 1 + seed % (n - 1)
    spec = random_curve(k, n, seed, arcs=3)
    for i in range(len(spec.arcs)):
        p = curve_minor_poly(spec, i)
        assert p.degree == k * (n - k) and p.leading > 0


def test_factor_examples():
    assert factor_pos_eta(U([[1, 0], [3, 1]])).params == (3,)
    got = factor_pos_eta(U([[1, 0, 0], [2, 1, 0], [1, 1, 1]]), (1, 2, 1))
    assert got.ok and got.params == (1, 1, 1)
    assert not factor_pos_eta(I3).ok


def test_reduced_words():
    for n in range(2, 7):
        w = canonical_word(n)
        assert len(w) == n * (n - 1) // 2 and is_reduced(w, n)
    assert not is_reduced((1, 1), 3)
    with pytest.raises(NotImplementedError):
        factor_pos_eta(I3, (2, 1, 2))
    with pytest.raises(ValueError):
        factor_pos_eta(I3, (1, 1, 2))


params = st.lists(st.fractions(min_value=Fraction(1, 9), max_value=9, max_denominator=9), min_size=15, max_size=15)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), params, params)
def test_factorization_round_trip_and_semigroup(n, p, q):
    w = canonical_word(n)
    p, q = p[: len(w)], q[: len(w)]
    A, B = word_product(w, p, n), word_product(w, q, n)
    assert factor_pos_eta(A).params == tuple(p)
    prod = factor_pos_eta(A @ B)
    assert prod.ok and word_product(w, prod.params, n) == A @ B


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_convex_increments_are_totally_positive(n, seed):
    spec = random_curve(1, n, seed, arcs=3)
    T = spec.duration
    t0, t1 = T * Fraction(seed % 5, 7), T * Fraction(seed % 5 + 1 + seed % 2, 7)
    assert factor_pos_eta(spec.at(t0).inverse() @ spec.at(t1)).ok


def test_discretize_examples():
    c = (Fraction(1), Fraction(1))
    start = U([[p(-1) for p in r] for r in exp_arc_poly(c)])
    spec = CurveSpec(3, 2, start, (Arc(c, 3),))
    assert nz(spec) == 1 and nsc(discretize_curve(spec)) >= 1
    # no zeros at all: m = 1 + t on (0, 1]
    spec = CurveSpec(2, 1, U([[1, 0], [1, 1]]), (Arc((1,), 1),))
    seq = discretize_curve(spec)
    assert nz(spec) == 0 and seq.length == 0 and nsc(seq) == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_discretize_keeps_every_zero(n, seed):
    k = 1 + seed % (n - 1)
    spec = random_curve(k, n, seed, arcs=2)
    try:
        seq = discretize_curve(spec)
    except CurveError:
        pytest.fail("discretization failed")
    assert nsc(seq) >= nz(spec)


def test_continuize_examples():
    seq = random_convex_seq(2, 4, 0, seed=1)
    spec = continuize_seq(seq)
    assert len(spec.arcs) == 1 and nz(spec) >= 0
    M = ExactMatrix.from_rows([[-1, 1]])
    from gcx.core import ConvexSeq, MoveStep

    w = ConvexSeq(M, (MoveStep(1, 2),))
    assert nz(continuize_seq(w)) >= nsc(w) == 1


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(1, 3), (2, 4), (2, 5), (3, 5)]), st.integers(0, 10**6), st.integers(1, 12))
def test_continuize_keeps_every_sign_change(shape, seed, length):
    seq = random_convex_seq(*shape, length, seed)
    assert nz(continuize_seq(seq)) >= nsc(seq)
