"""Subgroup oracles: membership, finite generating set, right-coset keys.

``key(x)`` is a hashable invariant of the right coset ``Hx``: two elements
give equal keys exactly when they lie in the same right coset.  Families with a
normal form get a closed-form key; anything else falls back to a scan keyer
that compares against the representatives it has seen so far.
"""
from __future__ import annotations

import random
from collections import deque
from functools import cached_property
from fractions import Fraction

from .errors import BudgetExceeded, DomainError, EXCEEDED
from .groups import (Cyclic, DirectProduct, FreeGroup, FreeProduct, Homomorphism,
                     free_product_projection, reduction_mod)


class Subgroup:
    """A subgroup ``H`` of ``parent`` given by membership and generators."""

    name = "H"
    #: known finite order of H, or None
    order = None

    def __init__(self, parent, gens=(), name=None, check=True):
        self.parent = parent
        self.gens = tuple(gens)
        if name:
            self.name = name
        if check:
            for g in self.gens:
                if not self.contains(parent.check(g)):
                    raise DomainError(f"generator {parent.format(g)} is not in {self.name}")
        self._scan = None

    def contains(self, x):
        raise NotImplementedError

    def key(self, x):
        """Invariant of the right coset ``Hx``."""
        if self._scan is None:
            self._scan = _ScanKeyer(self)
        return self._scan.key(x)

    def left_key(self, x):
        """Invariant of the left coset ``xH``."""
        return self.key(self.parent._inv(x))

    @cached_property
    def letters(self):
        G = self.parent
        out = []
        for g in self.gens:
            if g == G.identity:
                continue
            out.append(g)
            gi = G._inv(g)
            if gi != g:
                out.append(gi)
        return tuple(dict.fromkeys(out))

    def sample(self, rng, count, max_length=4):
        G = self.parent
        out = []
        for _ in range(count):
            x = G.identity
            for _ in range(rng.randint(0, max_length)):
                if self.letters:
                    x = G._mul(x, rng.choice(self.letters))
            out.append(x)
        return out

    def elements(self, budget=100000):
        """All elements, for finite subgroups (BFS over generator letters)."""
        G = self.parent
        seen = {G.identity: None}
        queue = deque([G.identity])
        while queue:
            x = queue.popleft()
            for s in self.letters:
                y = G._mul(x, s)
                if y not in seen:
                    seen[y] = None
                    queue.append(y)
                    if len(seen) > budget:
                        raise BudgetExceeded(f"{self.name} has more than {budget} elements")
        return list(seen)

    def __repr__(self):
        return self.name


class _ScanKeyer:
    """Append-only list of coset representatives compared by membership."""

    def __init__(self, H):
        self.H = H
        self.reps = []
        self.cache = {}

    def key(self, x):
        k = self.cache.get(x)
        if k is not None:
            return k
        G, H = self.H.parent, self.H
        for i, r in enumerate(self.reps):
            if H.contains(G._mul(x, G._inv(r))):
                k = i
                break
        else:
            k = len(self.reps)
            self.reps.append(x)
        if len(self.cache) < 500000:
            self.cache[x] = k
        return k


class GeneralSubgroup(Subgroup):
    """Subgroup from a membership predicate and generators (optional key)."""

    def __init__(self, parent, gens, contains, key=None, name="H", check=True):
        self._contains = contains
        self._key = key
        super().__init__(parent, gens, name, check)

    def contains(self, x):
        return bool(self._contains(x))

    def key(self, x):
        if self._key is None:
            return super().key(x)
        return self._key(x)


class Trivial(Subgroup):
    order = 1

    def __init__(self, parent, name="1"):
        super().__init__(parent, (), name)

    def contains(self, x):
        return x == self.parent.identity

    def key(self, x):
        return x


class Whole(Subgroup):
    def __init__(self, parent, name=None):
        super().__init__(parent, parent.gens, name or str(parent), check=False)
        self.order = parent.order

    def contains(self, x):
        return self.parent.contains(x)

    def key(self, x):
        return ()


class Multiples(Subgroup):
    """``nZ`` inside ``Z`` (or inside ``Z/m`` when ``n | m``)."""

    def __init__(self, parent, n, name=None):
        if not isinstance(parent, Cyclic):
            raise DomainError("multiples(n) needs a cyclic parent")
        if n <= 0 or (parent.n and parent.n % n):
            raise DomainError(f"{n}Z is not a subgroup of {parent}")
        self.n = n
        if parent.n:
            self.order = parent.n // n
        super().__init__(parent, (n % parent.n if parent.n else n,), name or f"{n}Z")

    def contains(self, x):
        return x % self.n == 0

    def key(self, x):
        return x % self.n


class IntegerTranslations(Subgroup):
    """``{(k, 1) : k in Z}`` inside the affine group."""

    def __init__(self, parent, name="Z"):
        super().__init__(parent, ((Fraction(1), Fraction(1)),), name)

    def contains(self, x):
        return x[1] == 1 and x[0].denominator == 1

    def key(self, x):
        b, a = x
        return (b - (b.numerator // b.denominator), a)


class Translations(Subgroup):
    """``{(b, 1)}`` inside the affine group (the additive rationals)."""

    def __init__(self, parent, name="Q"):
        gens = [(Fraction(1), Fraction(1))] + [(Fraction(1, p), Fraction(1)) for p in parent.primes]
        super().__init__(parent, gens, name)

    def contains(self, x):
        return x[1] == 1

    def key(self, x):
        return x[1]


class Kernel(Subgroup):
    """``ker(phi)``; right cosets are keyed by the image."""

    def __init__(self, hom, gens=None, name=None, budget=20000):
        self.hom = hom
        if gens is None:
            if not hom.codomain.order:
                raise DomainError("pass generators for a kernel of infinite index")
            gens = finite_index_generators(Whole(hom.domain), self, budget)
        super().__init__(hom.domain, gens, name or f"ker({hom.name})")

    def contains(self, x):
        return self.hom(x) == self.hom.codomain.identity

    def key(self, x):
        return self.hom(x)


class Preimage(Subgroup):
    """``phi^-1(K)``; right cosets keyed by the K-coset of the image."""

    def __init__(self, hom, K, gens=None, name=None, budget=20000):
        if K.parent != hom.codomain:
            raise DomainError("K must be a subgroup of the codomain")
        self.hom, self.K = hom, K
        if gens is None:
            if hom.codomain.order:
                gens = finite_index_generators(Whole(hom.domain), self, budget)
            else:
                raise DomainError("pass generators for a preimage of infinite index")
        super().__init__(hom.domain, gens, name or f"{hom.name}^-1({K.name})")

    def contains(self, x):
        return self.K.contains(self.hom(x))

    def key(self, x):
        return self.K.key(self.hom(x))


class FiniteSubgroup(Subgroup):
    """Finite subgroup closed from generators; key is the coset as a set."""

    def __init__(self, parent, gens, name="F", budget=100000):
        self._members = None
        self.parent = parent
        self.gens = tuple(parent.check(g) for g in gens)
        self._members = frozenset(Subgroup.elements(self, budget))
        self.order = len(self._members)
        super().__init__(parent, self.gens, name)

    def contains(self, x):
        return x in self._members

    def elements(self, budget=None):
        return sorted(self._members, key=self.parent.sort_key)

    def key(self, x):
        G = self.parent
        return frozenset(G._mul(h, x) for h in self._members)


def finite_subset_subgroup(parent, elements, name="F"):
    """Finite subgroup given by an explicit element list; closure is checked."""
    elems = [parent.check(x) for x in elements]
    s = set(elems)
    if parent.identity not in s:
        raise DomainError(f"{name} does not contain the identity")
    for x in elems:
        if parent._inv(x) not in s:
            raise DomainError(f"{name} is not closed under inverses")
        for y in elems:
            if parent._mul(x, y) not in s:
                raise DomainError(f"{name} is not closed under products")
    return FiniteSubgroup(parent, elems, name)


class Intersection(Subgroup):
    """``H ∩ K``; generators computed by Schreier's lemma when index is finite."""

    def __init__(self, H, K, gens=None, name=None, budget=20000):
        if H.parent != K.parent:
            raise DomainError("intersection of subgroups of different groups")
        self.H, self.K = H, K
        if gens is None:
            gens = finite_index_generators(H, self, budget)
        super().__init__(H.parent, gens, name or f"({H.name} & {K.name})")

    def contains(self, x):
        return self.H.contains(x) and self.K.contains(x)

    def key(self, x):
        return (self.H.key(x), self.K.key(x))


class Conjugate(Subgroup):
    """``g H g^-1`` with membership derived from ``H``."""

    def __init__(self, H, g, name=None):
        G = H.parent
        self.H, self.g, self.ginv = H, G.check(g), G._inv(g)
        super().__init__(G, [G.conj(g, h) for h in H.gens], name or f"{G.format(g)}{H.name}", check=False)
        self.order = H.order

    def contains(self, x):
        G = self.parent
        return self.H.contains(G._mul(G._mul(self.ginv, x), self.g))

    def key(self, x):
        return self.H.key(self.parent._mul(self.ginv, x))


class ProductSubgroup(Subgroup):
    """``H_1 x ... x H_n`` inside a direct product."""

    def __init__(self, parent, factors, name=None):
        if not isinstance(parent, DirectProduct) or len(factors) != len(parent.factors):
            raise DomainError("product subgroup needs a direct product parent with matching factors")
        for f, G in zip(factors, parent.factors):
            if f.parent != G:
                raise DomainError("factor subgroup lives in the wrong group")
        self.factors = tuple(factors)
        gens = [parent.embed(i, h) for i, f in enumerate(factors) for h in f.gens]
        orders = [f.order for f in factors]
        if all(o is not None for o in orders):
            o = 1
            for k in orders:
                o *= k
            self.order = o
        super().__init__(parent, gens, name or " x ".join(f.name for f in factors), check=False)

    def contains(self, x):
        return all(f.contains(y) for f, y in zip(self.factors, x))

    def key(self, x):
        return tuple(f.key(y) for f, y in zip(self.factors, x))


class CyclicSubgroup(Subgroup):
    """``<w>``; membership by searching exponents up to the word length."""

    def __init__(self, parent, w, name=None):
        self.w = parent.check(w)
        super().__init__(parent, (self.w,), name or f"<{parent.format(w)}>", check=False)
        self._strip = self._strip_rule()
        self._powers = {}

    def _strip_rule(self):
        G, w = self.parent, self.w
        if isinstance(G, FreeGroup) and len(w) == 1:
            return ("free", w[0])
        if isinstance(G, FreeProduct) and len(w) == 1:
            i, y = w[0]
            f = G.factors[i]
            if f.order is not None and f.order == len(Subgroup.elements(GeneralSubgroup(f, [y], lambda _: True, check=False))):
                return ("factor", i)
        return None

    def _bound(self, x):
        G = self.parent
        n = G.word_length(x)
        if n is None:
            n = G._word_index.length(x)
        return n + 1

    def contains(self, x):
        G = self.parent
        if x == G.identity:
            return True
        b = self._bound(x)
        p, q = G.identity, G.identity
        wi = G._inv(self.w)
        for _ in range(b):
            p, q = G._mul(p, self.w), G._mul(q, wi)
            if p == x or q == x:
                return True
            if p == G.identity:
                return False
        return False

    def key(self, x):
        rule = self._strip
        if rule is None:
            return super().key(x)
        if rule[0] == "free":
            l = rule[1]
            k = 0
            while k < len(x) and abs(x[k]) == abs(l):
                k += 1
            return x[k:]
        i = rule[1]
        return x[1:] if x and x[0][0] == i else x


class CoreSubgroup(Subgroup):
    """``∩_t t G t^-1`` over left-coset representatives ``t`` of ``G`` in ``E``."""

    def __init__(self, G, left_reps, name=None, budget=20000):
        self.G = G
        E = G.parent
        self.reps = tuple(left_reps)
        self.conjugates = tuple(Conjugate(G, t) for t in self.reps)
        self.parent = E
        gens = finite_index_generators(Whole(E), self, budget)
        super().__init__(E, gens, name or f"core({G.name})")

    def contains(self, x):
        return all(c.contains(x) for c in self.conjugates)

    def key(self, x):
        return tuple(c.key(x) for c in self.conjugates)


# ---------------------------------------------------------------------------
# coset BFS inside a subgroup, Schreier generators, normality
# ---------------------------------------------------------------------------
def coset_transversal(H, K, budget=20000):
    """Right-coset representatives of ``K ∩ H`` in ``H`` by BFS over H-words.

    Returns ``(reps, keys)`` in discovery order, or raises BudgetExceeded when
    more than ``budget`` cosets appear.  K only needs a membership key.
    """
    G = H.parent
    e = G.identity
    keys = {K.key(e): 0}
    reps = [e]
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for s in H.letters:
            y = G._mul(x, s)
            k = K.key(y)
            if k not in keys:
                keys[k] = len(reps)
                reps.append(y)
                if len(reps) > budget:
                    raise BudgetExceeded(f"|{H.name} : {K.name}| exceeds {budget}", what=K.name)
                queue.append(y)
    return reps, keys


def finite_index_generators(H, K, budget=20000):
    """Schreier generators of ``K`` (assumed ``<= H``, finite index)."""
    G = H.parent
    reps, keys = coset_transversal(H, K, budget)
    out = {}
    for t in reps:
        for s in H.letters:
            u = G._mul(t, s)
            r = reps[keys[K.key(u)]]
            g = G._mul(u, G._inv(r))
            if g != G.identity and g not in out and G._inv(g) not in out:
                out[g] = None
    return list(out)


def index(H, K, budget=20000):
    """``|H : K|`` for ``K <= H`` (int) or ``EXCEEDED``."""
    try:
        reps, _ = coset_transversal(H, K, budget)
    except BudgetExceeded:
        return EXCEEDED
    return len(reps)


def normality_witness(H, ambient_letters=None):
    """First ``(s, h)`` with ``s h s^-1`` outside H, over G-letters and H-gens."""
    G = H.parent
    letters = ambient_letters if ambient_letters is not None else [el for _, _, el in G.letters]
    for s in letters:
        for h in H.gens:
            if not H.contains(G.conj(s, h)):
                return (s, h)
    return None


def is_normal(H):
    return normality_witness(H) is None


def check_subgroup_samples(H, rng=None, count=64):
    """Sampled closure certificate; returns a failing element or None."""
    rng = rng or random.Random(0)
    G = H.parent
    if not H.contains(G.identity):
        return ("identity", G.identity)
    xs = H.sample(rng, count, 5)
    for x, y in zip(xs, xs[1:]):
        if not H.contains(G._mul(x, y)):
            return ("product", (x, y))
        if not H.contains(G._inv(x)):
            return ("inverse", x)
    return None


def quotient_group(G, H):
    """``(Q, pi)`` for the quotients with a normal-form model; else DomainError."""
    if isinstance(H, Multiples) and H.parent is G:
        return Cyclic(H.n), reduction_mod(H.n, G)
    if isinstance(H, Whole):
        return Cyclic(1), Homomorphism(G, Cyclic(1), images=[0] * len(G.gens), name="trivial")
    if isinstance(H, Kernel) and H.hom.domain is G:
        return H.hom.codomain, H.hom
    raise DomainError(f"no normal-form model for the quotient {G}/{H.name}")


def relation_subgroup(fp, name="R"):
    """``R_{A,B} = ker(A * B -> A x B)`` with its projection."""
    pi = free_product_projection(fp)
    if pi.codomain.order is None:
        gens = []
        for i, A in enumerate(fp.factors):
            for j, B in enumerate(fp.factors):
                if i < j:
                    for a in A.gens:
                        for b in B.gens:
                            gens.append(fp.commutator(fp.letter(i, a), fp.letter(j, b)))
        return Kernel(pi, gens=gens, name=name), pi
    return Kernel(pi, name=name), pi


class SemidirectFactor(Subgroup):
    """``{(n, 1) : n in K}`` inside ``N x| Q`` for a subgroup ``K`` of ``N``."""

    def __init__(self, sd, K=None, name=None):
        self.sd = sd
        self.K = K if K is not None else Whole(sd.N)
        if self.K.parent is not sd.N:
            raise DomainError("K must be a subgroup of the normal factor")
        q1 = sd.Q.identity
        super().__init__(sd, [(h, q1) for h in self.K.gens], name or self.K.name)
        self.order = self.K.order

    def contains(self, x):
        return x[1] == self.sd.Q.identity and self.K.contains(x[0])

    def key(self, x):
        return (self.K.key(x[0]), x[1])
