import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from heckepairs.cosets import HeckePair
from heckepairs.errors import DomainError
from heckepairs.groups import Cyclic, DirectProduct, FreeGroup, FreeProduct, reduction_mod, symmetric
from heckepairs.lengths import (LengthFunction, ball, bfs_word_length, dominates, equivalent,
                                extension_length_prime, finite_averaged, max_gamma_length, product_length,
                                pullback, quotient_word_length, sample_pairs, word_length)
from heckepairs.subgroups import CyclicSubgroup, FiniteSubgroup, Multiples, Trivial, relation_subgroup

from helpers import catalog_objects

Z = Cyclic(0)
D = FreeProduct([Cyclic(2), Cyclic(2)])
F2 = FreeGroup(2)
R, PI = relation_subgroup(D)


def _lengths():
    S3 = symmetric(3)
    F = FiniteSubgroup(S3, [S3.parse("(0 1)")])
    avg, _ = finite_averaged(word_length(S3), F)
    return {
        "word Z": word_length(Z),
        "word F2": word_length(F2),
        "word D": word_length(D),
        "word Z2": word_length(DirectProduct([Z, Z])),
        "quotient Z/3": quotient_word_length(Z, Multiples(Z, 3)),
        "quotient D/R": quotient_word_length(D, R),
        "averaged S3": avg,
        "pullback mod 6": pullback(reduction_mod(6), word_length(Cyclic(6))),
        "product": product_length(DirectProduct([Z, F2]), [word_length(Z), word_length(F2)]),
    }


LENGTHS = _lengths()


@pytest.mark.parametrize("name", sorted(LENGTHS))
@given(seed=st.integers(0, 10 ** 6))
def test_length_axioms(name, seed):
    L = LENGTHS[name]
    pairs = sample_pairs(L.group, random.Random(seed), 30)
    assert L.check_axioms(pairs).ok
    assert L.check_vanishing(random.Random(seed), 16).ok


@pytest.mark.parametrize("G", [Z, F2, D, DirectProduct([Z, Cyclic(3)])], ids=str)
def test_closed_form_word_length_matches_bfs(G):
    L, B = word_length(G), bfs_word_length(G)
    for g in G.sample(random.Random(5), 80, 6):
        assert L(g) == B(g)


def test_word_length_examples():
    assert word_length(Z)(5) == 5
    assert word_length(F2)(F2.parse("a b a^-1")) == 3
    assert word_length(D)(D.parse("abab")) == 4


def test_quotient_length_examples():
    L = quotient_word_length(Z, Multiples(Z, 3))
    assert L(7) == 1 and L(3) == 0 and L(5) == 1
    assert quotient_word_length(D, R)(D.parse("abab")) == 0
    with pytest.raises(DomainError):
        quotient_word_length(F2, CyclicSubgroup(F2, F2.parse("a")))


def test_domination():
    W, Q = word_length(Z), quotient_word_length(Z, Multiples(Z, 3))
    xs = list(range(-20, 21))
    assert dominates(W, W, xs, 1, 1).ok
    assert dominates(W, Q, xs).ok
    v = dominates(Q, W, xs)
    assert not v.ok and v.data["L2"] > v.data["L1"]
    assert dominates(Q, W, [3]).data["g"] == "3"
    assert not equivalent(W, Q, xs, 1, 2)
    with pytest.raises(DomainError):
        dominates(W, Q, xs, -1, 0)


@given(st.lists(st.integers(-30, 30), min_size=1, max_size=15), st.integers(1, 3), st.integers(0, 3))
def test_domination_transitive(xs, a, b):
    L1, L2, L3 = word_length(Z), quotient_word_length(Z, Multiples(Z, 2)), quotient_word_length(Z, Multiples(Z, 4))
    if dominates(L1, L3, xs, a, b) and dominates(L3, L2, xs, a, b):
        assert dominates(L1, L2, xs, a * a, a * b + b)


def test_finite_averaged():
    S3 = symmetric(3)
    L = word_length(S3)
    trivial = FiniteSubgroup(S3, [])
    same, C0 = finite_averaged(L, trivial)
    assert C0 == 0 and all(same(g) == L(g) for g in S3.elements())
    F = FiniteSubgroup(S3, [S3.parse("(0 1)")])
    avg, C = finite_averaged(L, F)
    assert C == 2 * max(L(u) for u in F.elements())
    assert all(avg(u) == 0 for u in F.elements())
    assert all(abs(avg(g) - L(g)) <= C for g in S3.elements())
    with pytest.raises(DomainError):
        finite_averaged(L, [S3.identity, S3.parse("(0 1 2)")])
    with pytest.raises(DomainError):
        finite_averaged(L, F, rule="max")


def test_ball_examples():
    zp = HeckePair(Z, Trivial(Z))
    b = ball(zp, 2, word_length(Z))
    assert sorted(b.reps) == [-2, -1, 0, 1, 2] and not b.partial
    assert len(ball(zp, 0, word_length(Z))) == 1
    dp = HeckePair(D, R)
    assert len(ball(dp, 1, quotient_word_length(D, R))) == 3


def test_ball_flags_partial():
    fp = HeckePair(F2, Trivial(F2), budget=40)
    assert ball(fp, 5, word_length(F2)).partial


def test_extension_length_prime():
    ext = catalog_objects("carry3")["carry3"]
    L = quotient_word_length(Z, Multiples(Z, 6))
    Lp, M = extension_length_prime(L, ext, Multiples(Z, 6))
    assert M == 3
    for x in range(-40, 40):
        assert abs(L(x) - Lp(x)) <= M
        assert Lp(x) == L(x % 3)
    assert all(Lp(3 * k) == 0 for k in range(-5, 6))


def test_max_gamma_length():
    ext = catalog_objects("carry3")["carry3"]
    es = ext.esigma()
    L0 = word_length(Z)
    L = max_gamma_length(L0, es)
    assert L.check_axioms(sample_pairs(es, random.Random(1), 200)).ok
    for x in es.sample(random.Random(2), 100, 6):
        assert L0(x[0]) <= L(x)
    # the carrying cocycle takes values 0 and 3, so L(0, c) > 0 off the identity
    assert L(es.identity) == 0


def test_max_gamma_rejects_infinite_quotient():
    ext = catalog_objects("bost_connes_ext")["bost_connes_ext"]
    with pytest.raises(DomainError):
        max_gamma_length(LengthFunction(ext.E, lambda g: 0), ext.esigma())
