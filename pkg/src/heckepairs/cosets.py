"""Budgeted right-coset and double-coset enumeration for a pair ``(G, H)``.

Right cosets ``Hx`` are identified through ``H.key``.  A double coset ``HgH``
is identified by the frozenset of right-coset keys it contains (its orbit
under right multiplication by ``H``), which is canonical regardless of the
element used to reach it.  Representatives are chosen by a global BFS over the
generators of ``G`` (see :class:`CosetTable`): the representative of a right
coset is its first discovery, the representative of a double coset is the
earliest-discovered of its right cosets.

Caches are append-only; concurrent readers may at worst duplicate work.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import EXCEEDED, BudgetExceeded, DomainError
from .subgroups import Conjugate, Whole, coset_transversal, index as _index
from .verdict import Verdict

DEFAULT_BUDGET = 20000


@dataclass
class DoubleCosetRecord:
    representative: object
    right_coset_reps: list
    L_count: object
    R_count: object
    #: left-coset count from an independent left-orbit closure
    L_left: object = None
    canonical: bool = True

    def to_json(self, group):
        return {
            "rep": group.format(self.representative),
            "L": self.L_count,
            "R": self.R_count,
            "L_left_orbit": self.L_left,
            "canonical_rep": self.canonical,
            "right_coset_reps": [group.format(x) for x in self.right_coset_reps],
        }


class HeckePair:
    """A candidate Hecke pair with cached coset and double-coset data."""

    def __init__(self, G, H, name=None, budget=DEFAULT_BUDGET):
        if H.parent != G:
            raise DomainError(f"{H.name} is not a subgroup of {G}")
        self.G, self.H = G, H
        self.name = name or f"({G}, {H.name})"
        self.budget = budget
        self._dkey = {}      # right key -> double-coset key
        self._dreps = {}     # double-coset key -> right-coset reps (orbit order)
        self._dcanon = {}    # double-coset key -> canonical representative
        self._table = None

    # -- right cosets ---------------------------------------------------------
    def right_key(self, x):
        return self.H.key(x)

    def left_key(self, x):
        return self.H.left_key(x)

    def coset_equal(self, x, y):
        G = self.G
        return self.H.contains(G.mul(x, G.inv(y)))

    @property
    def explorer(self):
        if self._table is None:
            self._table = CosetTable(self, budget=max(self.budget, 1))
        return self._table

    def coset_rep(self, x, budget=None):
        """Canonical representative of ``Hx`` (BFS first discovery)."""
        return self.explorer.rep_of(x, budget)

    # -- double cosets --------------------------------------------------------
    def _orbit(self, g, budget):
        G, H = self.G, self.H
        k0 = H.key(g)
        keys = {k0: 0}
        reps = [g]
        queue = deque([g])
        while queue:
            x = queue.popleft()
            for h in H.letters:
                y = G._mul(x, h)
                k = H.key(y)
                if k not in keys:
                    keys[k] = len(reps)
                    reps.append(y)
                    if len(reps) > budget:
                        raise BudgetExceeded(f"right orbit of H{G.format(g)}H exceeds {budget}")
                    queue.append(y)
        return keys, reps

    def dkey(self, g, budget=None):
        """Canonical invariant of ``HgH``; raises BudgetExceeded if R(g) is too big."""
        rk = self.H.key(g)
        d = self._dkey.get(rk)
        if d is not None:
            return d
        keys, reps = self._orbit(g, budget or self.budget)
        d = frozenset(keys)
        self._dreps.setdefault(d, reps)
        for k in keys:
            self._dkey[k] = d
        return d

    def right_cosets_of(self, d):
        """Right-coset representatives of a double coset key (orbit order)."""
        return self._dreps[d]

    def dcoset_rep(self, g, budget=None):
        """Canonical representative of ``HgH``, or ``g`` itself if the explorer runs out."""
        d = self.dkey(g, budget)
        rep = self._dcanon.get(d)
        if rep is None:
            try:
                rep = self.explorer.first_in(d, budget)
            except BudgetExceeded:
                return g, False
            self._dcanon[d] = rep
        return rep, True

    def L_count(self, g, budget=None):
        """``|H : H ∩ gHg^-1|`` by BFS inside H, or EXCEEDED."""
        return _index(self.H, Conjugate(self.H, g), budget or self.budget)

    def R_count(self, g, budget=None):
        try:
            return len(self.right_cosets_of(self.dkey(g, budget)))
        except BudgetExceeded:
            return EXCEEDED

    def left_orbit_count(self, g, budget=None):
        """Number of left cosets ``xH`` in ``HgH``, by direct left-orbit closure."""
        G, H = self.G, self.H
        budget = budget or self.budget
        seen = {H.left_key(g)}
        queue = deque([g])
        while queue:
            x = queue.popleft()
            for h in H.letters:
                y = G._mul(h, x)
                k = H.left_key(y)
                if k not in seen:
                    seen.add(k)
                    if len(seen) > budget:
                        return EXCEEDED
                    queue.append(y)
        return len(seen)

    def double_coset(self, g, budget=None):
        g = self.G.check(g)
        budget = budget or self.budget
        L = self.L_count(g, budget)
        L_left = self.left_orbit_count(g, budget)
        try:
            d = self.dkey(g, budget)
        except BudgetExceeded:
            return DoubleCosetRecord(g, [], L, EXCEEDED, L_left, canonical=False)
        reps = list(self.right_cosets_of(d))
        rep, canon = self.dcoset_rep(g, budget)
        return DoubleCosetRecord(rep, reps, L, len(reps), L_left, canonical=canon)

    def is_trivial_dcoset(self, d):
        return d == self.dkey(self.G.identity)

    def __repr__(self):
        return self.name


class CosetTable:
    """Right-coset representatives found by BFS over right multiplication.

    Letters follow ``G.letters`` order, so the first element reaching a coset
    is its shortlex-least word.  ``layers[r]`` holds the indices of cosets at
    BFS depth ``r``.  ``complete`` means the frontier emptied (finite index);
    ``partial`` means the budget stopped growth.
    """

    def __init__(self, pair, radius=0, budget=DEFAULT_BUDGET):
        self.pair = pair
        self.budget = budget
        G = pair.G
        e = G.identity
        self.reps = [e]
        self.keys = [pair.H.key(e)]
        self.index = {self.keys[0]: 0}
        self.depth = [0]
        self.layers = [[0]]
        self.complete = False
        self.partial = False
        self.extend_to(radius)

    @property
    def radius(self):
        return len(self.layers) - 1

    def __len__(self):
        return len(self.reps)

    def grow(self):
        """Add one BFS layer; returns False if nothing changed."""
        if self.complete:
            return False
        if self.partial:
            raise BudgetExceeded(f"coset table budget {self.budget} already exhausted")
        G, H = self.pair.G, self.pair.H
        new = []
        r = len(self.layers)
        for i in self.layers[-1]:
            x = self.reps[i]
            for _, _, s in G.letters:
                y = G._mul(x, s)
                k = H.key(y)
                if k not in self.index:
                    if len(self.reps) >= self.budget:
                        self._rollback(new)
                        raise BudgetExceeded(f"coset table budget {self.budget} exhausted at radius {r}")
                    self.index[k] = len(self.reps)
                    self.reps.append(y)
                    self.keys.append(k)
                    self.depth.append(r)
                    new.append(self.index[k])
        if not new:
            self.complete = True
            return False
        self.layers.append(new)
        return True

    def _rollback(self, new):
        # drop a half-built layer so every stored layer is complete
        for i in new:
            del self.index[self.keys[i]]
        n = len(self.reps) - len(new)
        del self.reps[n:], self.keys[n:], self.depth[n:]
        self.partial = True

    def extend_to(self, radius):
        try:
            while self.radius < radius and self.grow():
                pass
        except BudgetExceeded:
            pass
        return self

    def rep_of(self, x, budget=None):
        k = self.pair.H.key(x)
        while k not in self.index:
            if not self.grow():
                raise DomainError(f"{self.pair.G.format(x)} is not reachable")
        return self.reps[self.index[k]]

    def first_in(self, d, budget=None):
        """Earliest-discovered rep among the right cosets with keys in ``d``."""
        while True:
            hits = [self.index[k] for k in d if k in self.index]
            if hits:
                return self.reps[min(hits)]
            if not self.grow():
                raise DomainError("double coset not reachable from the generators")

    def ball(self, radius):
        """Rep indices with BFS depth ``<= radius`` (table is extended first)."""
        self.extend_to(radius)
        return [i for i, d in enumerate(self.depth) if d <= radius]

    def boundary(self):
        return list(self.layers[-1]) if not self.complete else []

    def to_json(self):
        G = self.pair.G
        return {
            "pair": self.pair.name,
            "radius": self.radius,
            "complete": self.complete,
            "partial": self.partial,
            "budget": self.budget,
            "reps": [G.format(x) for x in self.reps],
        }


def enumerate_right_cosets(pair, radius, budget=DEFAULT_BUDGET):
    if radius < 0:
        raise DomainError("radius must be >= 0")
    return CosetTable(pair, radius, budget)


def subgroup_index(H, K, budget=DEFAULT_BUDGET, samples=None):
    """``|H : K|`` for ``K <= H`` by BFS over H-words, or EXCEEDED."""
    if H.parent != K.parent:
        raise DomainError("subgroups of different groups")
    for k in list(K.gens) + list(samples or ()):
        if not H.contains(k):
            raise DomainError(f"{H.parent.format(k)} lies in {K.name} but not in {H.name}")
    return _index(H, K, budget)


def is_almost_normal(pair, sample_radius, budget=DEFAULT_BUDGET, extra=()):
    """Semi-decision: L(g) over coset reps within ``sample_radius`` (plus ``extra``)."""
    table = enumerate_right_cosets(pair, sample_radius, budget)
    G = pair.G
    samples = [table.reps[i] for i in table.ball(sample_radius)] + [G.check(g) for g in extra]
    seen, out = set(), []
    for g in samples:
        L = pair.L_count(g, budget)
        if L == EXCEEDED:
            return Verdict("counterexample-budget", {"g": G.format(g), "budget": budget}, ok=False)
        if g not in seen:
            seen.add(g)
            out.append((G.format(g), L))
    if table.partial and table.radius < sample_radius:
        return Verdict("budget-exhausted", {"radius_reached": table.radius, "samples": out}, ok=False)
    return Verdict("confirmed-on-samples", {"samples": out, "radius": sample_radius})


def cosets_report(pair, radius, budget=DEFAULT_BUDGET, records=True):
    """JSON payload ``{pair, radius, reps, records:[{rep, L, R}]}``."""
    table = enumerate_right_cosets(pair, radius, budget)
    out = table.to_json()
    if records:
        recs, seen = [], set()
        for i in table.ball(radius):
            g = table.reps[i]
            try:
                d = pair.dkey(g)
            except BudgetExceeded:
                d = None
            if d is not None and d in seen:
                continue
            if d is not None:
                seen.add(d)
            rec = pair.double_coset(g)
            recs.append({"rep": pair.G.format(rec.representative), "L": rec.L_count, "R": rec.R_count})
        out["records"] = recs
    return out
