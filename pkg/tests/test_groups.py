import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from heckepairs.errors import DomainError
from heckepairs.groups import (AffineRationals, Cyclic, DirectProduct, FreeGroup, FreeProduct, Homomorphism,
                               PermutationGroup, PositiveRationals, SemidirectProduct, WordIndex, free_abelian,
                               free_product_projection, inner_automorphism, reduction_mod, symmetric)

FAMILIES = {
    "Z": lambda: Cyclic(0),
    "Z6": lambda: Cyclic(6),
    "F2": lambda: FreeGroup(2),
    "Dinf": lambda: FreeProduct([Cyclic(2), Cyclic(2)]),
    "Z3*Z": lambda: FreeProduct([Cyclic(3), Cyclic(0)]),
    "ZxS3": lambda: DirectProduct([Cyclic(0), symmetric(3)]),
    "S4": lambda: symmetric(4),
    "Aff": lambda: AffineRationals((2, 3)),
    "Qpos": lambda: PositiveRationals((2, 3, 5)),
    "ZxZ2neg": lambda: SemidirectProduct(Cyclic(0), Cyclic(2), [[-1]]),
    "Z2swap": lambda: SemidirectProduct(free_abelian(2), Cyclic(2), [[(0, 1), (1, 0)]]),
}


_BUILT = {}


def _group(name):
    if name not in _BUILT:
        _BUILT[name] = FAMILIES[name]()
    return _BUILT[name]


def _triples(G, seed, n=40):
    rng = random.Random(seed)
    xs = G.sample(rng, 3 * n, 5)
    return list(zip(xs[::3], xs[1::3], xs[2::3]))


@pytest.mark.parametrize("name", sorted(FAMILIES))
@given(seed=st.integers(0, 10 ** 6))
def test_group_axioms_on_samples(name, seed):
    G = _group(name)
    e = G.identity
    for a, b, c in _triples(G, seed, 8):
        assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))
        assert G.mul(a, e) == a == G.mul(e, a)
        assert G.mul(a, G.inv(a)) == e
        assert G.contains(G.mul(a, b))


@pytest.mark.parametrize("name", sorted(FAMILIES))
@given(seed=st.integers(0, 10 ** 6))
def test_words_evaluate_back(name, seed):
    G = _group(name)
    for a, _, _ in _triples(G, seed, 6):
        assert G.eval_word(G.as_word(a)) == a


@pytest.mark.parametrize("name", sorted(FAMILIES))
@given(seed=st.integers(0, 10 ** 6))
def test_format_parse_roundtrip(name, seed):
    G = _group(name)
    for a, _, _ in _triples(G, seed, 6):
        assert G.parse(G.format(a)) == a


def test_closed_form_word_length_matches_bfs():
    for G in (Cyclic(0), Cyclic(7), FreeGroup(2), FreeProduct([Cyclic(2), Cyclic(3)]),
              DirectProduct([Cyclic(0), Cyclic(0)])):
        idx = WordIndex(G)
        while idx.radius < 4:
            idx._grow()
        for x, w in idx.words.items():
            if len(w) <= 3:
                assert G.word_length(x) == len(w), (G, x)


def test_cyclic_basics():
    Z = Cyclic(0)
    assert Z.mul(3, -5) == -2 and Z.inv(4) == -4
    assert Cyclic(5).mul(3, 4) == 2
    assert Cyclic(3) == Cyclic(3) and Cyclic(3) != Cyclic(4)
    with pytest.raises(DomainError):
        Cyclic(5).check(7)
    assert Cyclic(0).word_length(-7) == 7
    assert Cyclic(6).word_length(5) == 1


def test_free_group_reduction():
    F = FreeGroup(2)
    a, b = F.gens
    assert F.mul(a, F.inv(a)) == F.identity
    w = F.parse("abAB")
    assert len(w) == 4 and F.parse(F.format_word(F.as_word(w))) == w
    assert F.parse("aA") == F.identity


def test_free_product_normal_form_dihedral():
    D = FreeProduct([Cyclic(2), Cyclic(2)])
    a, b = D.gens
    assert D.mul(a, a) == D.identity
    abab = D.parse("abab")
    assert D.word_length(abab) == 4
    assert D.inv(abab) == D.parse("baba")


def test_permutation_group_law_and_order():
    S3 = symmetric(3)
    assert S3.order == 6
    t, c = S3.parse("(0 1)"), S3.parse("(0 1 2)")
    # (a*b)[i] = a[b[i]]
    assert S3.mul(t, c) == tuple(t[c[i]] for i in range(3))
    assert len(S3.elements()) == 6
    assert symmetric(4).order == 24


def test_affine_rationals_law():
    A = AffineRationals()
    x = (Fraction(1, 2), Fraction(3))
    y = (Fraction(2), Fraction(1, 5))
    assert A.mul(x, y) == (Fraction(1, 2) + 3 * 2, Fraction(3, 5))
    assert A.mul(x, A.inv(x)) == A.identity
    with pytest.raises(DomainError):
        A.check((Fraction(1, 7), Fraction(1)))
    with pytest.raises(DomainError):
        A.check((Fraction(0), Fraction(7)))
    assert A.eval_word(A.as_word(x)) == x


def test_semidirect_action_is_checked():
    with pytest.raises(DomainError):
        SemidirectProduct(Cyclic(0), Cyclic(2), [[2]])


def test_homomorphisms():
    phi = reduction_mod(3, Cyclic(6))
    assert [phi(x) for x in range(6)] == [0, 1, 2, 0, 1, 2]
    with pytest.raises(DomainError):
        reduction_mod(4, Cyclic(6))
    D = FreeProduct([Cyclic(2), Cyclic(2)])
    pi = free_product_projection(D)
    assert pi(D.parse("abab")) == (0, 0)
    assert pi(D.parse("aba")) == (0, 1)
    y = (1, 1)
    assert pi(pi.preimage(y)) == y
    F = FreeGroup(2)
    g = F.parse("ab")
    ad = inner_automorphism(F, g)
    x = F.parse("a")
    assert ad(x) == F.mul(F.mul(g, x), F.inv(g))
    with pytest.raises(DomainError):
        Homomorphism(Cyclic(0), Cyclic(3), images=[])


def test_direct_product_and_elements():
    G = DirectProduct([Cyclic(2), Cyclic(3)])
    assert G.order == 6
    assert sorted(G.elements()) == sorted(itertools.product(range(2), range(3)))
    assert G.parse("(1, 2)") == (1, 2)
