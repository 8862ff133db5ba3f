"""Group extensions ``1 -> N -> E -> Q -> 1`` through a cross-section.

Given ``pi: E -> Q`` and a set-theoretic section ``sigma`` with
``sigma(1) = 1`` we get

* the cocycle ``f(x1, x2) = sigma(x1) sigma(x2) sigma(x1 x2)^-1`` (in ``N``),
* the action ``rho(x)(h) = sigma(x) h sigma(x)^-1``,
* the coordinate group ``E_sigma = N x Q`` with
  ``(h1, x1)(h2, x2) = (h1 rho(x1)(h2) f(x1, x2), x1 x2)``.

Everything here is exact; the checks return :class:`Verdict` objects with
witnesses instead of raising.
"""
from __future__ import annotations

import itertools
import random

from .cosets import DEFAULT_BUDGET, HeckePair
from .errors import EXCEEDED, BudgetExceeded, ConsistencyError, DomainError
from .groups import DirectProduct, Group, Homomorphism, SemidirectProduct
from .lengths import LengthFunction, product_length
from .subgroups import (Conjugate, CoreSubgroup, Intersection, ProductSubgroup,
                        SemidirectFactor, Subgroup, Whole, coset_transversal, index)
from .verdict import Verdict


class Extension:
    """``E`` with normal subgroup ``N``, projection ``pi: E -> Q`` and a section.

    The section is ``table[x]`` when ``x`` is tabulated, otherwise the
    canonical ``Q``-word of ``x`` evaluated on lifts of the ``Q``-generators
    (``gen_lifts``, or found by BFS along ``pi``).
    """

    def __init__(self, E, N, Q, proj, table=None, gen_lifts=None, name="ext", check_samples=64, seed=0):
        if N.parent != E:
            raise DomainError("N must be a subgroup of E")
        if proj.domain != E or proj.codomain != Q:
            raise DomainError("projection must map E onto Q")
        self.E, self.N, self.Q, self.proj, self.name = E, N, Q, proj, name
        self.table = {Q.check(x): E.check(v) for x, v in (table or {}).items()}
        self.gen_lifts = [E.check(v) for v in gen_lifts] if gen_lifts is not None else None
        s1 = self.section(Q.identity)
        if s1 != E.identity:
            raise DomainError(f"section must send 1 to 1, got {E.format(s1)}")
        rng = random.Random(seed)
        for x in list(self.table) + Q.sample(rng, check_samples, 4):
            if proj(self.section(x)) != x:
                raise DomainError(f"section is not a right inverse of the projection at {Q.format(x)}")
        for h in N.gens:
            if proj(h) != Q.identity:
                raise DomainError(f"{E.format(h)} lies in N but not in ker(pi)")

    def _lifts(self):
        if self.gen_lifts is None:
            self.gen_lifts = self.proj.lift_generators()
        return self.gen_lifts

    def section(self, x):
        v = self.table.get(x)
        if v is not None:
            return v
        E = self.E
        if x == self.Q.identity:
            return E.identity
        lifts = self._lifts()
        out = E.identity
        for j, e in self.Q.as_word(x):
            out = E._mul(out, lifts[j] if e > 0 else E._inv(lifts[j]))
        return out

    def coords(self, e):
        """``e -> (e sigma(pi(e))^-1, pi(e))``."""
        x = self.proj(e)
        return (self.E._mul(e, self.E._inv(self.section(x))), x)

    def from_coords(self, c):
        h, x = c
        return self.E._mul(h, self.section(x))

    def cocycle(self, overrides=None):
        return Cocycle(self, overrides)

    def esigma(self, overrides=None):
        return ESigma(self.cocycle(overrides))


def semidirect_extension(sd, name=None):
    """The split extension ``N -> N x| Q -> Q`` with ``sigma(q) = (1, q)``."""
    Q = sd.Q
    proj = Homomorphism(sd, Q, func=lambda x: x[1], name="pr")
    lifts = [(sd.N.identity, q) for q in Q.gens]
    return Extension(sd, SemidirectFactor(sd), Q, proj, gen_lifts=lifts, name=name or f"split({sd})")


class Cocycle:
    """Evaluators for ``f`` and ``rho``; ``overrides`` replaces chosen f-values."""

    def __init__(self, ext, overrides=None):
        self.ext = ext
        self.overrides = dict(overrides or {})
        self._f = {}

    def f(self, x1, x2):
        k = (x1, x2)
        if k in self.overrides:
            return self.overrides[k]
        v = self._f.get(k)
        if v is None:
            ext, E = self.ext, self.ext.E
            v = E._mul(E._mul(ext.section(x1), ext.section(x2)), E._inv(ext.section(ext.Q._mul(x1, x2))))
            if not ext.N.contains(v):
                raise ConsistencyError(f"f({ext.Q.format(x1)}, {ext.Q.format(x2)}) = {E.format(v)} is not in N")
            self._f[k] = v
        return v

    def rho(self, x, h):
        return self.ext.E.conj(self.ext.section(x), h)


def check_cocycle_relations(ct, triples, h_samples):
    """Check ``f(x1,x2) f(x1x2,x3) = rho(x1)(f(x2,x3)) f(x1,x2x3)`` and
    ``rho(x1) rho(x2) = Ad(f(x1,x2)) rho(x1x2)`` (on ``h_samples``)."""
    E, Q = ct.ext.E, ct.ext.Q
    n3 = n4 = 0
    for x1, x2, x3 in triples:
        lhs = E._mul(ct.f(x1, x2), ct.f(Q._mul(x1, x2), x3))
        rhs = E._mul(ct.rho(x1, ct.f(x2, x3)), ct.f(x1, Q._mul(x2, x3)))
        if lhs != rhs:
            return Verdict("fail", {"relation": "cocycle", "triple": [Q.format(x) for x in (x1, x2, x3)]}, ok=False)
        n3 += 1
    pairs = {(x1, x2) for x1, x2, _ in triples}
    for x1, x2 in sorted(pairs, key=lambda p: (Q.sort_key(p[0]), Q.sort_key(p[1]))):
        for h in h_samples:
            lhs = ct.rho(x1, ct.rho(x2, h))
            rhs = E.conj(ct.f(x1, x2), ct.rho(Q._mul(x1, x2), h))
            if lhs != rhs:
                return Verdict("fail", {"relation": "action", "pair": [Q.format(x1), Q.format(x2)],
                                        "h": E.format(h)}, ok=False)
            n4 += 1
    return Verdict("pass", {"cocycle_checks": n3, "action_checks": n4})


def all_triples(Q):
    xs = Q.elements()
    return list(itertools.product(xs, xs, xs))


class ESigma(Group):
    """``N x Q`` with the twisted product; payload ``(h, x)``, ``h`` an element of E."""

    def __init__(self, cocycle):
        self.ct = cocycle
        ext = cocycle.ext
        self.ext, self.E, self.N, self.Q = ext, ext.E, ext.N, ext.Q
        self.name = f"E_sigma({ext.name})"
        if ext.E.order is not None:
            self.order = ext.E.order

    @property
    def identity(self):
        return (self.E.identity, self.Q.identity)

    @property
    def gens(self):
        e1 = self.E.identity
        return tuple((h, self.Q.identity) for h in self.N.gens) + tuple((e1, q) for q in self.Q.gens)

    def contains(self, x):
        return (type(x) is tuple and len(x) == 2 and self.E.contains(x[0])
                and self.N.contains(x[0]) and self.Q.contains(x[1]))

    def _mul(self, a, b):
        E, Q, ct = self.E, self.Q, self.ct
        (h1, x1), (h2, x2) = a, b
        return (E._mul(E._mul(h1, ct.rho(x1, h2)), ct.f(x1, x2)), Q._mul(x1, x2))

    def _inv(self, a):
        E, Q, ext = self.E, self.Q, self.ext
        h, x = a
        xi = Q._inv(x)
        return (E._mul(E._mul(E._inv(ext.section(x)), E._inv(h)), E._inv(ext.section(xi))), xi)

    def as_word(self, x):
        return self._word_index.word(self.check(x))

    def format(self, x):
        return f"({self.E.format(x[0])}; {self.Q.format(x[1])})"

    def sort_key(self, x):
        return (self.E.sort_key(x[0]), self.Q.sort_key(x[1]))


def esigma_iso_check(ext, samples):
    """``(h, x) -> h sigma(x)`` is multiplicative and injective on ``samples``."""
    es = ext.esigma()
    E = ext.E
    seen = {}
    for u in samples:
        img = ext.from_coords(u)
        if img in seen and seen[img] != u:
            return Verdict("fail", {"reason": "not injective", "u": es.format(u), "v": es.format(seen[img])}, ok=False)
        seen[img] = u
    for u, v in zip(samples, samples[1:] + samples[:1]):
        if ext.from_coords(es._mul(u, v)) != E._mul(ext.from_coords(u), ext.from_coords(v)):
            return Verdict("fail", {"reason": "not multiplicative", "u": es.format(u), "v": es.format(v)}, ok=False)
    return Verdict("pass", {"samples": len(samples)})


def esigma_ball(es, radius):
    """Every E_sigma element of word length ``<= radius`` in its generators."""
    idx = es._word_index
    while idx.radius < radius and idx.frontier:
        idx._grow()
    return [x for x, w in idx.words.items() if len(w) <= radius]


# ---------------------------------------------------------------------------
# consistency and the coset apparatus
# ---------------------------------------------------------------------------
def is_consistent(ext, H, gammas):
    """Both inclusions ``sigma(c) H sigma(c)^-1 <= H`` and ``sigma(c)^-1 H sigma(c) <= H``.

    ``H`` must lie in ``N``.  Verdict kinds: ``consistent``, ``forward-only``,
    ``backward-only`` (one inclusion fails), ``inconsistent`` (both fail).
    """
    E = ext.E
    for h in H.gens:
        if not ext.N.contains(h):
            raise DomainError(f"{E.format(h)} is in {H.name} but not in N")
    fwd = bwd = None
    for c in gammas:
        s = ext.section(c)
        si = E._inv(s)
        for h in H.gens:
            if fwd is None and not H.contains(E.conj(s, h)):
                fwd = (c, h)
            if bwd is None and not H.contains(E.conj(si, h)):
                bwd = (c, h)
    wit = lambda w: None if w is None else {"gamma": ext.Q.format(w[0]), "h": E.format(w[1])}
    data = {"forward_witness": wit(fwd), "backward_witness": wit(bwd), "samples": len(gammas)}
    if fwd is None and bwd is None:
        return Verdict("consistent", data)
    if fwd is None:
        return Verdict("forward-only", data, ok=False)
    if bwd is None:
        return Verdict("backward-only", data, ok=False)
    return Verdict("inconsistent", data, ok=False)


def theta(ext, gamma, beta, g):
    """``sigma(c) sigma(b)^-1 g sigma(c b^-1)^-1``."""
    E, Q = ext.E, ext.Q
    s = ext.section
    return E._mul(E._mul(E._mul(s(gamma), E._inv(s(beta))), g), E._inv(s(Q._mul(gamma, Q._inv(beta)))))


def left_coset_ball(N, H, radius, budget=DEFAULT_BUDGET):
    """Left cosets ``gH`` of ``H`` in ``N`` within BFS radius; ``(reps, keys, complete)``."""
    G = N.parent
    e = G.identity
    keys = {H.left_key(e): 0}
    reps = [e]
    layer = [e]
    complete = False
    for _ in range(radius):
        nxt = []
        for x in layer:
            for s in N.letters:
                y = G._mul(x, s)
                k = H.left_key(y)
                if k not in keys:
                    keys[k] = len(reps)
                    reps.append(y)
                    nxt.append(y)
                    if len(reps) > budget:
                        raise BudgetExceeded("left coset ball exceeded budget")
        if not nxt:
            complete = True
            break
        layer = nxt
    else:
        # one more probe: is the ball already everything?
        complete = all(H.left_key(G._mul(x, s)) in keys for x in layer for s in N.letters)
    return reps, keys, complete


def theta_bijectivity_check(ext, H, gamma, beta, radius=6, budget=DEFAULT_BUDGET):
    """``theta`` permutes the enumerated left cosets of ``H`` in ``N`` (on a ball)."""
    E = ext.E
    reps, keys, complete = left_coset_ball(ext.N, H, radius, budget)
    images = set()
    for g in reps:
        t = theta(ext, gamma, beta, g)
        if not ext.N.contains(t):
            return Verdict("fail", {"reason": "image outside N", "g": E.format(g)}, ok=False)
        for h in H.gens:
            if H.left_key(theta(ext, gamma, beta, E._mul(g, h))) != H.left_key(t):
                return Verdict("fail", {"reason": "not constant on left cosets", "g": E.format(g)}, ok=False)
        k = H.left_key(t)
        if k not in keys:
            return Verdict("inconclusive-on-ball", {"escaped": E.format(g), "radius": radius}, ok=False)
        if k in images:
            return Verdict("fail", {"reason": "not injective", "g": E.format(g)}, ok=False)
        images.add(k)
    return Verdict("bijective-on-ball", {"cosets": len(reps), "radius": radius, "whole_space": complete})


def almost_normal_in_extension(ext, H, samples, budget=DEFAULT_BUDGET, radius=3):
    """Per sample ``(g, c)``: ``|H : H ∩ eHe^-1| <= |H : H ∩ gHg^-1|`` with ``e = g sigma(c)``.

    Also runs the element chain: for ``h`` in ``H ∩ gHg^-1`` put
    ``h1 = g^-1 h g`` and ``h2 = sigma(c)^-1 h1 sigma(c)``; check ``h2`` in ``H``
    and ``(g, c)(h2, 1) = (h, 1)(g, c)`` in coordinates.  Finally checks that
    ``(Hg, c) -> H g sigma(c)`` is injective on a ball of right cosets.
    """
    E, Q = ext.E, ext.Q
    es = ext.esigma()
    pair = HeckePair(E, H, budget=budget)
    rows = []
    rng = random.Random(0)
    hs = H.sample(rng, 16, 4)
    for g, c in samples:
        if not ext.N.contains(g):
            raise DomainError(f"{E.format(g)} is not in N")
        e = E._mul(g, ext.section(c))
        iE = pair.L_count(e, budget)
        iG = pair.L_count(g, budget)
        ok = iE != EXCEEDED and (iG == EXCEEDED or iE <= iG)
        for h in hs:
            h1 = E._mul(E._mul(E._inv(g), h), g)
            if not H.contains(h1):
                continue
            s = ext.section(c)
            h2 = E._mul(E._mul(E._inv(s), h1), s)
            if not H.contains(h2):
                return Verdict("fail", {"reason": "h2 not in H", "g": E.format(g), "gamma": Q.format(c)}, ok=False)
            if es._mul((g, c), (h2, Q.identity)) != es._mul((h, Q.identity), (g, c)):
                return Verdict("fail", {"reason": "commutation chain", "g": E.format(g)}, ok=False)
        rows.append({"g": E.format(g), "gamma": Q.format(c), "index_E": iE, "index_G": iG, "ok": ok})
        if not ok:
            return Verdict("fail", {"reason": "index inequality", "rows": rows}, ok=False)
    # right-coset bijection on a ball
    rs, _, _ = _right_cosets_in(ext.N, H, radius, budget)
    qs = sorted(set(c for _, c in samples) | {Q.identity}, key=Q.sort_key)
    seen = {}
    for g in rs:
        for c in qs:
            k = H.key(E._mul(g, ext.section(c)))
            if k in seen:
                return Verdict("fail", {"reason": "coset map not injective", "g": E.format(g)}, ok=False)
            seen[k] = (g, c)
    return Verdict("holds-on-samples", {"rows": rows, "coset_map_checked": len(seen)})


def _right_cosets_in(N, H, radius, budget):
    G = N.parent
    e = G.identity
    keys = {H.key(e): 0}
    reps, layer = [e], [e]
    for _ in range(radius):
        nxt = []
        for x in layer:
            for s in N.letters:
                y = G._mul(x, s)
                k = H.key(y)
                if k not in keys:
                    keys[k] = len(reps)
                    reps.append(y)
                    nxt.append(y)
        layer = nxt
        if len(reps) > budget:
            raise BudgetExceeded("coset ball exceeded budget")
    return reps, keys, not layer


def brenken_check(ext, H, gammas, budget=DEFAULT_BUDGET):
    """External criterion: ``|rho(c)(H) H / H|`` finite for sampled ``c``.

    This is only a budgeted evaluation of a condition quoted from the
    literature (for normal ``H`` in ``N`` it implies almost normality in E).
    """
    E = ext.E
    rows = []
    for c in gammas:
        conj = Conjugate(H, ext.section(c))
        n = index(conj, H, budget)
        rows.append({"gamma": ext.Q.format(c), "size": n})
    ok = all(r["size"] != EXCEEDED for r in rows)
    return Verdict("finite-on-samples" if ok else "exceeded-budget",
                   {"rows": rows, "source": "external citation, criterion quoted without proof"}, ok=ok)


def length_compatibility(L0, L1, L, ext, samples, c=1, e=1):
    """``L0(s) + L1(c) <= c L(s, c)^e`` on samples ``(s, c)`` (coordinates)."""
    E, Q = ext.E, ext.Q
    for s, x in samples:
        lhs = L0(s) + L1(x)
        rhs = c * L((s, x)) ** e
        if lhs > rhs:
            return Verdict("counterexample", {"s": E.format(s), "gamma": Q.format(x), "lhs": lhs, "rhs": rhs}, ok=False)
    return Verdict("holds-on-samples", {"samples": len(samples), "c": c, "e": e})


# ---------------------------------------------------------------------------
# products and cores
# ---------------------------------------------------------------------------
def product_pair(pairs, lengths=None, combine="sum", budget=DEFAULT_BUDGET):
    """``(prod G_i, prod H_i)`` with the summed (or max) length if lengths are given."""
    if len(pairs) == 1:
        p = pairs[0]
        return p, (lengths[0] if lengths else None)
    G = DirectProduct([p.G for p in pairs])
    H = ProductSubgroup(G, [p.H for p in pairs], name=" x ".join(p.H.name for p in pairs))
    pair = HeckePair(G, H, name=" x ".join(p.name for p in pairs), budget=budget)
    L = product_length(G, lengths, combine) if lengths else None
    if L is not None:
        L.vanishing = (H,)
    return pair, L


def core_subgroup(G, budget=DEFAULT_BUDGET, H=None):
    """``G1 = ∩_x x G x^-1`` for ``G`` of finite index in its parent, and ``H1 = G1 ∩ H``.

    Returns ``(G1, H1, n)`` where ``n = |E : G|``; raises BudgetExceeded when
    the index does not close within budget.
    """
    E = G.parent
    right, _ = coset_transversal(Whole(E), G, budget)
    left = [E._inv(r) for r in right]
    G1 = CoreSubgroup(G, left, budget=budget)
    H1 = None
    if H is not None:
        H1 = Intersection(H, G1, budget=budget, name=f"{H.name} & {G1.name}")
    return G1, H1, len(right)
