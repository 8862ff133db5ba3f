import random
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heckepairs.cosets import HeckePair
from heckepairs.errors import DomainError
from heckepairs.groups import AffineRationals, Cyclic, FreeGroup, FreeProduct, symmetric
from heckepairs.hecke import (CosetVector, HeckeElement, convolve, convolution_matrix, hecke_product,
                              operator_norm_estimate, power_iteration, random_hecke, random_vector,
                              weighted_norm_sq)
from heckepairs.lengths import word_length
from heckepairs.subgroups import CyclicSubgroup, FiniteSubgroup, IntegerTranslations, Multiples, Trivial

from oracles import s3_oracle

Z = Cyclic(0)
S3 = symmetric(3)
S3_PAIR = HeckePair(S3, FiniteSubgroup(S3, [S3.parse("(0 1)")]))
ORACLE = s3_oracle()


def _dihedral_pair():
    D = FreeProduct([Cyclic(2), Cyclic(2)])
    return HeckePair(D, CyclicSubgroup(D, D.parse("a")))


def _bc_pair():
    G = AffineRationals((2, 3))
    return HeckePair(G, IntegerTranslations(G))


PAIRS = {"s3": lambda: S3_PAIR, "dihedral": _dihedral_pair, "bost_connes": _bc_pair}
_cache = {}


def pair(name):
    if name not in _cache:
        _cache[name] = PAIRS[name]()
    return _cache[name]


def _vector_as_sets(k):
    return {ORACLE.right[g]: v for g, v in k.items()}


def _hecke_as_sets(f):
    return {ORACLE.dcoset[g]: v for g, v in f.items()}


def test_s3_example_convolution():
    g = S3.parse("(0 2)")
    out = convolve(HeckeElement.delta(S3_PAIR, g), CosetVector.delta(S3_PAIR, g))
    assert out.to_json() == {"[0,1,2]": 1, "[0,2,1]": 1}
    assert out(S3.identity) == 1 and out(S3.parse("(1 2)")) == 1 and out(g) == 0


def test_s3_example_product():
    g = S3.parse("(0 2)")
    D = HeckeElement.delta(S3_PAIR, g)
    prod = hecke_product(D, D)
    assert prod(S3.identity) == 2 and prod(g) == 1


@given(st.lists(st.integers(0, 4), min_size=6, max_size=6), st.lists(st.integers(0, 4), min_size=6, max_size=6))
def test_s3_convolution_matches_brute_force(fc, kc):
    els = list(permutations(range(3)))
    fd, kd = {}, {}
    for g, c in zip(els, fc):
        fd.setdefault(ORACLE.dcoset[g], Fraction(c))
    for g, c in zip(els, kc):
        kd.setdefault(ORACLE.right[g], Fraction(c))
    f = HeckeElement.from_elements(S3_PAIR, {next(iter(D)): c for D, c in fd.items()})
    k = CosetVector.from_elements(S3_PAIR, {next(iter(C)): c for C, c in kd.items()})
    got = _vector_as_sets(convolve(f, k))
    want = ORACLE.convolve(fd, kd)
    assert {a: b for a, b in got.items() if b} == want
    f2 = HeckeElement.from_elements(S3_PAIR, {next(iter(C)): c for C, c in kd.items()})
    got_p = _hecke_as_sets(hecke_product(f, f2))
    want_p = ORACLE.product(fd, _hecke_as_sets(f2))
    assert {a: b for a, b in got_p.items() if b} == want_p


@pytest.mark.parametrize("name", sorted(PAIRS))
@given(seed=st.integers(0, 10 ** 6))
def test_associativity_and_identity(name, seed):
    p = pair(name)
    rng = random.Random(seed)
    a, b, c = (random_hecke(p, rng, size=2, radius=2) for _ in range(3))
    assert hecke_product(hecke_product(a, b), c) == hecke_product(a, hecke_product(b, c))
    one = HeckeElement.identity(p)
    assert hecke_product(one, a) == a == hecke_product(a, one)
    k = random_vector(p, rng, size=3, radius=2)
    assert convolve(hecke_product(a, b), k) == convolve(a, convolve(b, k))
    assert convolve(one, k) == k


@pytest.mark.parametrize("name", sorted(PAIRS))
@given(seed=st.integers(0, 10 ** 6))
def test_linearity_and_nonnegativity(name, seed):
    p = pair(name)
    rng = random.Random(seed)
    a, b = random_hecke(p, rng), random_hecke(p, rng)
    k = random_vector(p, rng)
    assert convolve(a + b, k) == convolve(a, k) + convolve(b, k)
    assert convolve(a.scale(3), k) == convolve(a, k).scale(3)
    assert convolve(a, k).is_nonnegative()


def test_norms():
    p = pair("bost_connes")
    G = p.G
    f = HeckeElement.from_elements(p, {G.parse("(0, 1/2)"): 3, G.identity: 1})
    # H(0,1/2)H holds two right cosets
    assert f.norm2_sq() == 9 * 2 + 1
    k = CosetVector.from_elements(p, {G.identity: 2, G.parse("(1, 1)"): 1})
    assert k.norm2_sq() == 9 and len(k) == 1
    zp = HeckePair(Z, Trivial(Z))
    L = word_length(Z)
    g = HeckeElement.from_elements(zp, {2: 1, -1: 2})
    assert weighted_norm_sq(g, 1, L) == 1 * 3 ** 2 + 4 * 2 ** 2
    with pytest.raises(DomainError):
        weighted_norm_sq(g, -1, L)


def test_pair_mismatch_rejected():
    a = HeckeElement.identity(S3_PAIR)
    b = HeckeElement.identity(pair("dihedral"))
    with pytest.raises(DomainError):
        hecke_product(a, b)


def test_operator_norm_of_two_point_function():
    zp = HeckePair(Z, Trivial(Z), budget=5000)
    f = HeckeElement.from_elements(zp, {1: 1, -1: 1})
    sigma, _ = operator_norm_estimate(f, 1000)
    assert abs(sigma - 2.0) <= 0.05
    assert sigma <= 2.0 + 1e-12


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_operator_norm_of_identity(name):
    sigma, conv = operator_norm_estimate(HeckeElement.identity(pair(name)), 3)
    assert sigma == 1.0 and conv


def test_power_iteration_matches_dense_svd():
    rng = np.random.default_rng(1)
    M = rng.random((30, 30))
    sigma, conv, v = power_iteration(M, 2000, 1e-13)
    assert conv and abs(sigma - np.linalg.svd(M, compute_uv=False)[0]) < 1e-8
    assert np.all(v >= 0)


def test_convolution_matrix_on_finite_quotient():
    zp = HeckePair(Z, Multiples(Z, 3))
    f = HeckeElement.from_elements(zp, {0: 1, 1: 1, 2: 1})
    M, _, _ = convolution_matrix(f, 5)
    assert M.shape == (3, 3) and np.allclose(M.toarray(), 1)
    sigma, _ = operator_norm_estimate(f, 5)
    assert abs(sigma - 3) < 1e-9


def test_monomial_matrices_are_exact():
    zp = HeckePair(Z, Trivial(Z), budget=5000)
    assert operator_norm_estimate(HeckeElement.from_elements(zp, {2: Fraction(3, 7)}), 50) == (3 / 7, True)
    assert operator_norm_estimate(HeckeElement.from_elements(zp, {}), 5) == (0.0, True)


def test_small_group_algebra_examples():
    zp = HeckePair(Z, Trivial(Z))
    assert convolve(HeckeElement.delta(zp, 1), CosetVector.delta(zp, 1)).to_json() == {"2": 1}
    z2 = HeckePair(Z, Multiples(Z, 2))
    assert convolve(HeckeElement.delta(z2, 1), CosetVector.delta(z2, 1)).to_json() == {"0": 1}
    d = HeckeElement.delta(z2, 1)
    assert hecke_product(d, d) == HeckeElement.identity(z2)
