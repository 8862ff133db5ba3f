"""Length functions: constructors, sampled axiom checks, domination, balls.

Axioms checked on samples: ``L(e) = 0``, ``L(g^-1) = L(g)``,
``L(gh) <= L(g) + L(h)`` and ``L >= 0``.  A length function on a pair
``(G, H)`` must also vanish on ``H``; each length carries the subgroups it
claims to vanish on, and those claims are sampled, never proven.
"""
from __future__ import annotations

import random

from .cosets import DEFAULT_BUDGET, HeckePair
from .errors import BudgetExceeded, ConsistencyError, DomainError
from .subgroups import FiniteSubgroup, Subgroup, Trivial, coset_transversal, normality_witness
from .verdict import Verdict


class LengthFunction:
    """``g -> L(g) >= 0`` with declared vanishing subgroups and a provenance tag."""

    def __init__(self, group, func, vanishing=(), kind="custom", name=None, memo=True):
        self.group = group
        self.func = func
        self.vanishing = tuple(vanishing)
        self.kind = kind
        self.name = name or kind
        self._memo = {} if memo else None

    def __call__(self, g):
        if self._memo is None:
            return self.func(g)
        v = self._memo.get(g)
        if v is None:
            v = self.func(g)
            if len(self._memo) < 500000:
                self._memo[g] = v
        return v

    def declares(self, H):
        return any(V is H for V in self.vanishing)

    def check_axioms(self, samples):
        """Counterexample search over sampled pairs ``(g, h)``."""
        G = self.group
        if self(G.identity) != 0:
            return Verdict("counterexample", {"axiom": "identity"}, ok=False)
        count = 0
        for g, h in samples:
            lg, lh = self(g), self(h)
            if lg < 0:
                return Verdict("counterexample", {"axiom": "nonnegative", "g": G.format(g)}, ok=False)
            if self(G._inv(g)) != lg:
                return Verdict("counterexample", {"axiom": "symmetry", "g": G.format(g)}, ok=False)
            if self(G._mul(g, h)) > lg + lh:
                return Verdict("counterexample", {"axiom": "subadditivity", "g": G.format(g), "h": G.format(h)}, ok=False)
            count += 1
        return Verdict("holds-on-samples", {"pairs": count})

    def check_vanishing(self, rng=None, count=64, subgroups=None):
        rng = rng or random.Random(0)
        G = self.group
        for H in subgroups or self.vanishing:
            for h in list(H.gens) + H.sample(rng, count, 5):
                if self(h) != 0:
                    return Verdict("counterexample", {"subgroup": H.name, "h": G.format(h)}, ok=False)
        return Verdict("holds-on-samples", {"subgroups": [H.name for H in subgroups or self.vanishing]})

    def __repr__(self):
        return f"<length {self.name} on {self.group}>"


def sample_pairs(group, rng, count, max_length=6):
    xs = group.sample(rng, 2 * count, max_length)
    return list(zip(xs[::2], xs[1::2]))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------
def word_length(G, budget=10 ** 6):
    """Word length over ``G.gens``: closed form if the family has one, else BFS."""
    index = G._word_index
    index.budget = max(index.budget, budget)

    def func(g):
        n = G.word_length(g)
        return index.length(g) if n is None else n

    return LengthFunction(G, func, (Trivial(G),), "word", f"word({G})")


def bfs_word_length(G, budget=10 ** 6):
    """Word length by BFS only (reference for the closed forms)."""
    index = G._word_index
    index.budget = max(index.budget, budget)
    return LengthFunction(G, index.length, (), "word", f"bfs-word({G})")


def quotient_word_length(G, H, budget=DEFAULT_BUDGET):
    """Word length of ``gH`` in ``G/H`` for normal ``H`` (BFS on the coset graph)."""
    w = normality_witness(H)
    if w is not None:
        s, h = w
        raise DomainError(f"{H.name} is not normal: {G.format(s)} conjugates {G.format(h)} outside")
    pair = HeckePair(G, H, budget=budget)
    table = pair.explorer

    def func(g):
        k = H.key(g)
        while k not in table.index:
            if not table.grow():
                raise DomainError(f"{G.format(g)} unreachable in the quotient")
        return table.depth[table.index[k]]

    return LengthFunction(G, func, (H,), "quotient-word", f"quotient-word({G}/{H.name})")


def extension_length_prime(L, ext, K=None, budget=DEFAULT_BUDGET):
    """``L'(e) = L(sigma(pi(e)))`` and the equivalence constant ``M``.

    ``K`` is a subgroup of the kernel ``N`` of ``ext`` on which ``L`` vanishes
    (default: ``N`` itself).  ``M`` is the maximum of ``L`` over right-coset
    representatives of ``K`` in ``N``, so ``|L - L'| <= M``.
    """
    N = ext.N
    K = K or N
    reps, _ = coset_transversal(N, K, budget)
    M = max(L(h) for h in reps)
    func = lambda e: L(ext.section(ext.proj(e)))
    Lp = LengthFunction(ext.E, func, (N, K) if K is not N else (N,), "extension-prime", f"{L.name}'")
    return Lp, M


def finite_averaged(L, F, rule="shift"):
    """A length equivalent to ``L`` that vanishes on the finite subgroup ``F``.

    ``rule="shift"`` (default): ``0`` on ``F`` and ``min_{u,v in F} L(uxv) + C``
    off ``F`` with ``C = max_F L``; equivalent to ``L`` within ``C``.
    ``rule="max"``: ``max_{u,v in F} L(uxv)``, kept for comparison; it only
    vanishes on ``F`` when ``L`` already does, and is rejected otherwise.
    """
    Gq = L.group
    elems = F.elements() if isinstance(F, Subgroup) else list(F)
    members = set(elems)
    for x in elems:
        if Gq._inv(x) not in members or any(Gq._mul(x, y) not in members for y in elems):
            raise DomainError("F is not closed under products and inverses")
    if Gq.identity not in members:
        raise DomainError("F does not contain the identity")
    C = max(L(u) for u in elems)
    Fsub = F if isinstance(F, Subgroup) else FiniteSubgroup(Gq, elems, "F")
    if rule == "max":
        func = lambda x: max(L(Gq._mul(Gq._mul(u, x), v)) for u in elems for v in elems)
        out = LengthFunction(Gq, func, L.vanishing + (Fsub,), "finite-averaged", f"max-avg({L.name})")
        bad = [u for u in elems if out(u) != 0]
        if bad:
            raise DomainError(f"max-average does not vanish on F (value {out(bad[0])} at {Gq.format(bad[0])})")
        return out, 2 * C
    if rule != "shift":
        raise DomainError(f"unknown rule {rule!r}")

    def func(x):
        if x in members:
            return 0
        return min(L(Gq._mul(Gq._mul(u, x), v)) for u in elems for v in elems) + C

    out = LengthFunction(Gq, func, L.vanishing + (Fsub,), "finite-averaged", f"avg({L.name})")
    bad = [u for u in elems if out(u) != 0]
    if bad:
        raise ConsistencyError("averaged length does not vanish on F")
    return out, 2 * C


def max_gamma_length(L0, es):
    """``L(g, c) = k(g, c) + k((g, c)^-1)`` with ``k(g, c) = max_b L0(p((1, b)(g, c)))``.

    ``es`` is an :class:`~heckepairs.extensions.ESigma` group whose quotient is
    finite; ``p`` is the first coordinate.
    """
    Q = es.Q
    if Q.order is None:
        raise DomainError("the quotient must be finite")
    betas = Q.elements()
    one = es.E.identity

    def k(x):
        return max(L0(es._mul((one, b), x)[0]) for b in betas)

    func = lambda x: k(x) + k(es._inv(x))
    return LengthFunction(es, func, (), "max-gamma", f"max-gamma({L0.name})")


def pullback(hom, L, vanishing=()):
    """``L o phi`` on the domain of ``phi``."""
    return LengthFunction(hom.domain, lambda g: L(hom(g)), vanishing, "pullback", f"{L.name}o{hom.name}")


def pushforward(hom, L, kernel_samples=(), vanishing=()):
    """``L2(y) = L(x)`` for a preimage ``x`` of ``y``; well-definedness is sampled.

    Each evaluation also checks ``L(x k)`` for every supplied kernel element.
    """
    G1 = hom.domain

    def func(y):
        x = hom.preimage(y)
        v = L(x)
        for kk in kernel_samples:
            if L(G1._mul(x, kk)) != v:
                raise DomainError(f"pushforward of {L.name} is not well defined at {hom.codomain.format(y)}")
        return v

    return LengthFunction(hom.codomain, func, vanishing, "pushforward", f"{hom.name}*{L.name}")


def product_length(G, lengths, combine="sum"):
    """``L(g_1, ..., g_n) = sum L_i(g_i)`` (or max) on a direct product."""
    agg = sum if combine == "sum" else max
    return LengthFunction(G, lambda g: agg(L(x) for L, x in zip(lengths, g)), (), "product",
                          f"{combine}(" + ",".join(L.name for L in lengths) + ")")


# ---------------------------------------------------------------------------
# comparison and balls
# ---------------------------------------------------------------------------
def dominates(L1, L2, samples, a=1, b=0):
    """Check ``L2(g) <= a L1(g) + b`` on samples."""
    if a < 0 or b < 0:
        raise DomainError("a, b must be nonnegative")
    G = L1.group
    for g in samples:
        if L2(g) > a * L1(g) + b:
            return Verdict("counterexample", {"g": G.format(g), "L1": L1(g), "L2": L2(g)}, ok=False)
    return Verdict("holds-on-samples", {"samples": len(samples), "a": a, "b": b})


def equivalent(L1, L2, samples, a=1, b=0):
    return bool(dominates(L1, L2, samples, a, b)) and bool(dominates(L2, L1, samples, a, b))


class BallResult:
    """Double cosets ``HgH`` with ``L(g) <= r`` found in the coset explorer."""

    def __init__(self, pair, r, dkeys, reps, partial, radius):
        self.pair, self.r = pair, r
        self.dkeys, self.reps = dkeys, reps
        self.partial, self.radius = partial, radius

    def __len__(self):
        return len(self.dkeys)

    def to_json(self):
        return {"r": self.r, "reps": [self.pair.G.format(g) for g in self.reps],
                "partial": self.partial, "explored_radius": self.radius}


def ball(pair, r, L, budget=None):
    """``B_{r,L}(G,H)``; BFS grows until every boundary coset has ``L > r``.

    ``L`` is asserted constant on the right cosets of each returned double
    coset.  If the budget stops growth first, the result is flagged partial.
    """
    table = pair.explorer
    if budget:
        table.budget = max(table.budget, budget)
    partial = False
    while not table.complete:
        layer = table.layers[-1]
        if table.radius > 0 and all(L(table.reps[i]) > r for i in layer):
            break
        try:
            if not table.grow():
                break
        except BudgetExceeded:
            partial = True
            break
    dkeys, reps, seen = [], [], set()
    for i, x in enumerate(table.reps):
        if L(x) > r:
            continue
        d = pair.dkey(x)
        if d in seen:
            continue
        seen.add(d)
        vals = {L(a) for a in pair.right_cosets_of(d)}
        if len(vals) != 1:
            raise ConsistencyError(f"{L.name} is not constant on the double coset of {pair.G.format(x)}")
        dkeys.append(d)
        reps.append(pair.dcoset_rep(x)[0])
    return BallResult(pair, r, dkeys, reps, partial, table.radius)
