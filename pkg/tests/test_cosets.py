import random
from itertools import permutations

import pytest

from heckepairs.cosets import HeckePair, cosets_report, enumerate_right_cosets, is_almost_normal, subgroup_index
from heckepairs.errors import EXCEEDED, BudgetExceeded, DomainError
from heckepairs.groups import AffineRationals, Cyclic, FreeGroup, FreeProduct, symmetric
from heckepairs.subgroups import CyclicSubgroup, FiniteSubgroup, IntegerTranslations, Multiples, Trivial

from oracles import perm_mul, s3_oracle

Z = Cyclic(0)


@pytest.fixture(scope="module")
def s3():
    S3 = symmetric(3)
    return HeckePair(S3, FiniteSubgroup(S3, [S3.parse("(0 1)")]))


def test_s3_multiplication_matches_oracle():
    S3 = symmetric(3)
    els = list(permutations(range(3)))
    for a in els:
        for b in els:
            assert S3._mul(a, b) == perm_mul(a, b)


def test_s3_cosets_against_brute_force(s3):
    oracle = s3_oracle()
    table = enumerate_right_cosets(s3, 10)
    assert table.complete and len(table.reps) == len(oracle.right_cosets()) == 3
    for g in oracle.G:
        assert s3.L_count(g) == oracle.L(g)
        assert s3.R_count(g) == oracle.R(g)
        assert s3.left_orbit_count(g) == oracle.L(g)
        same = {x for x in oracle.G if oracle.dcoset[x] == oracle.dcoset[g]}
        assert {x for x in oracle.G if s3.dkey(x) == s3.dkey(g)} == same
    assert len({s3.dkey(g) for g in oracle.G}) == 2


def test_integers_mod_three():
    table = enumerate_right_cosets(HeckePair(Z, Multiples(Z, 3)), 4)
    assert table.complete and sorted(x % 3 for x in table.reps) == [0, 1, 2]


def test_free_group_ball_counts():
    F = FreeGroup(2)
    table = enumerate_right_cosets(HeckePair(F, Trivial(F)), 2)
    assert len(table.reps) == 17
    assert [len(l) for l in table.layers] == [1, 4, 12]


def test_dihedral_cyclic_subgroup_representatives():
    D = FreeProduct([Cyclic(2), Cyclic(2)])
    pair = HeckePair(D, CyclicSubgroup(D, D.parse("a")))
    table = enumerate_right_cosets(pair, 3)
    assert [D.format(x) for x in table.reps][:4] == ["e", "b", "ba", "bab"]


def test_bost_connes_counts():
    G = AffineRationals((2, 3, 5))
    pair = HeckePair(G, IntegerTranslations(G))
    for p in (2, 3, 5):
        g = G.parse(f"(0, {p})")
        assert pair.L_count(g) == p and pair.R_count(g) == 1
        gi = G._inv(g)
        assert pair.L_count(gi) == 1 and pair.R_count(gi) == p
    g = G.parse("(0, 6)")
    assert pair.L_count(g) == 6


def test_coset_equality():
    pair = HeckePair(Z, Multiples(Z, 2))
    assert pair.coset_equal(1, 3) and not pair.coset_equal(1, 2)
    G = AffineRationals((2, 3, 5))
    bc = HeckePair(G, IntegerTranslations(G))
    assert bc.coset_equal(G.parse("(1, 1)"), G.parse("(0, 1)"))
    assert not bc.coset_equal(G.parse("(1/2, 1)"), G.parse("(0, 1)"))


def test_index_and_almost_normality():
    assert subgroup_index(Multiples(Z, 2), Multiples(Z, 4)) == 2
    with pytest.raises(DomainError):
        subgroup_index(Multiples(Z, 4), Multiples(Z, 2))
    F = FreeGroup(2)
    pair = HeckePair(F, CyclicSubgroup(F, F.parse("a")))
    v = is_almost_normal(pair, 1, budget=200)
    assert v.kind == "counterexample-budget" and v.data["g"] == "b"
    v = is_almost_normal(HeckePair(Z, Multiples(Z, 3)), 3)
    assert v.kind == "confirmed-on-samples"


def test_budget_exhaustion_marks_partial():
    F = FreeGroup(2)
    table = enumerate_right_cosets(HeckePair(F, Trivial(F)), 6, budget=50)
    assert table.partial and not table.complete
    assert all(len(l) for l in table.layers)
    assert len(table.reps) <= 50
    with pytest.raises(BudgetExceeded):
        table.grow()
    pair = HeckePair(F, CyclicSubgroup(F, F.parse("a")))
    assert pair.R_count(F.parse("b"), budget=30) == EXCEEDED


def test_dkey_invariant_under_both_sides():
    D = FreeProduct([Cyclic(2), Cyclic(2)])
    H = CyclicSubgroup(D, D.parse("a"))
    pair = HeckePair(D, H)
    rng = random.Random(3)
    for g in D.sample(rng, 30, 6):
        for h1 in H.sample(rng, 3, 3):
            for h2 in H.sample(rng, 3, 3):
                assert pair.dkey(D._mul(D._mul(h1, g), h2)) == pair.dkey(g)


def test_cosets_report_lists_records():
    rep = cosets_report(HeckePair(Z, Multiples(Z, 2)), 3)
    assert rep["complete"] and len(rep["records"]) == 2
    assert all(r["L"] == 1 and r["R"] == 1 for r in rep["records"])


def test_conjugates_share_almost_normality():
    G = AffineRationals((2, 3))
    H = IntegerTranslations(G)
    from heckepairs.subgroups import Conjugate
    K = Conjugate(H, G.parse("(0, 2)"))
    assert is_almost_normal(HeckePair(G, H), 2).ok
    assert is_almost_normal(HeckePair(G, K), 2).ok
    F = FreeGroup(2)
    a = CyclicSubgroup(F, F.parse("a"))
    b_a = Conjugate(a, F.parse("b"))
    assert not is_almost_normal(HeckePair(F, a), 1, budget=200).ok
    assert not is_almost_normal(HeckePair(F, b_a), 1, budget=200).ok
