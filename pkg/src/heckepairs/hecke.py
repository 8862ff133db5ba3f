"""Hecke-algebra elements, coset vectors, convolution and operator norms.

A :class:`HeckeElement` maps double cosets to scalars and a
:class:`CosetVector` maps right cosets to scalars.  Both store coefficients
under the pair's canonical keys (double-coset keys resp. right-coset keys) and
remember one element per key for display and for arithmetic.

Scalars are whatever the caller supplies: ints/Fractions give exact
arithmetic (used by every identity check), floats or complex numbers go
through the same code paths.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import EXCEEDED, BudgetExceeded, ConsistencyError, DomainError


def _abs2(c):
    if isinstance(c, complex):
        return c.real * c.real + c.imag * c.imag
    return c * c


class _FiniteFunction:
    """Shared plumbing: ``coeffs[key] = scalar`` with ``reps[key] = element``."""

    def __init__(self, pair, coeffs=None, reps=None):
        self.pair = pair
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v != 0}
        self.reps = {k: reps[k] for k in self.coeffs} if reps else {}

    def _key(self, g):
        raise NotImplementedError

    def __call__(self, g):
        return self.coeffs.get(self._key(g), 0)

    def items(self):
        """``(element, coefficient)`` for every key in the support."""
        return [(self.reps[k], v) for k, v in self.coeffs.items()]

    def support(self):
        return list(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def _check_pair(self, other):
        if other.pair is not self.pair:
            raise DomainError(f"pair mismatch: {self.pair} vs {other.pair}")

    def _combine(self, other, a, b):
        self._check_pair(other)
        coeffs, reps = {}, {}
        for src, w in ((self, a), (other, b)):
            for k, v in src.coeffs.items():
                coeffs[k] = coeffs.get(k, 0) + w * v
                reps.setdefault(k, src.reps[k])
        return type(self)(self.pair, coeffs, reps)

    def __add__(self, other):
        return self._combine(other, 1, 1)

    def __sub__(self, other):
        return self._combine(other, 1, -1)

    def scale(self, c):
        return type(self)(self.pair, {k: c * v for k, v in self.coeffs.items()}, self.reps)

    def __eq__(self, other):
        return (type(other) is type(self) and other.pair is self.pair
                and other.coeffs == self.coeffs)

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def is_nonnegative(self):
        return all(v >= 0 for v in self.coeffs.values())


class CosetVector(_FiniteFunction):
    """Finitely supported function on right cosets ``H\\G``."""

    def _key(self, g):
        return self.pair.right_key(g)

    @classmethod
    def from_elements(cls, pair, values):
        """Build from ``{element: scalar}``; entries in the same coset add up."""
        coeffs, reps = {}, {}
        for g, v in dict(values).items():
            g = pair.G.check(g)
            k = pair.right_key(g)
            coeffs[k] = coeffs.get(k, 0) + v
            reps.setdefault(k, g)
        return cls(pair, coeffs, reps)

    @classmethod
    def delta(cls, pair, g, c=1):
        return cls.from_elements(pair, {g: c})

    def norm2_sq(self):
        return sum(_abs2(v) for v in self.coeffs.values())

    def norm2(self):
        return math.sqrt(float(self.norm2_sq()))

    def to_json(self):
        G = self.pair.G
        out = {}
        for k, v in self.coeffs.items():
            out[G.format(self.pair.coset_rep(self.reps[k]))] = _jsonable(v)
        return dict(sorted(out.items()))


class HeckeElement(_FiniteFunction):
    """Finitely supported function on double cosets ``H\\G/H``."""

    def _key(self, g):
        return self.pair.dkey(g)

    @classmethod
    def from_elements(cls, pair, values):
        coeffs, reps = {}, {}
        for g, v in dict(values).items():
            g = pair.G.check(g)
            k = pair.dkey(g)
            coeffs[k] = coeffs.get(k, 0) + v
            reps.setdefault(k, g)
        return cls(pair, coeffs, reps)

    @classmethod
    def delta(cls, pair, g, c=1):
        """``c`` times the characteristic function of ``HgH``."""
        return cls.from_elements(pair, {g: c})

    @classmethod
    def identity(cls, pair):
        return cls.delta(pair, pair.G.identity)

    def right_expansion(self):
        """The same function viewed on right cosets (``R(g)`` entries per double coset)."""
        coeffs, reps = {}, {}
        for k, v in self.coeffs.items():
            for a in self.pair.right_cosets_of(k):
                rk = self.pair.right_key(a)
                coeffs[rk] = v
                reps[rk] = a
        return CosetVector(self.pair, coeffs, reps)

    def norm2_sq(self):
        """``sum over right cosets |f|^2`` (each double coset counted R times)."""
        return sum(_abs2(v) * len(self.pair.right_cosets_of(k)) for k, v in self.coeffs.items())

    def norm2(self):
        return math.sqrt(float(self.norm2_sq()))

    def to_json(self):
        G = self.pair.G
        out = {}
        for k, v in self.coeffs.items():
            rep, _ = self.pair.dcoset_rep(self.reps[k])
            out[G.format(rep)] = _jsonable(v)
        return dict(sorted(out.items()))


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def convolve(f, xi):
    """``(f * xi)(Hg) = sum_h f(g h^-1) xi(h)`` computed by scattering.

    For each ``h`` in the support of ``xi`` and each right coset ``Ha`` inside a
    double coset of ``supp f``, the product ``f(HaH) xi(h)`` lands on ``Hah``.
    """
    if not isinstance(f, HeckeElement) or not isinstance(xi, CosetVector):
        raise DomainError("convolve expects a HeckeElement and a CosetVector")
    f._check_pair(xi)
    pair = f.pair
    G, key = pair.G, pair.right_key
    coeffs, reps = {}, {}
    for kh, c_h in xi.coeffs.items():
        h = xi.reps[kh]
        for kd, c_d in f.coeffs.items():
            w = c_d * c_h
            for a in pair.right_cosets_of(kd):
                y = G._mul(a, h)
                k = key(y)
                if k in coeffs:
                    coeffs[k] += w
                else:
                    coeffs[k] = w
                    reps[k] = y
    return CosetVector(pair, coeffs, reps)


def hecke_product(f1, f2):
    """Product in the Hecke algebra; the result is checked to be bi-invariant."""
    if not isinstance(f1, HeckeElement) or not isinstance(f2, HeckeElement):
        raise DomainError("hecke_product expects two HeckeElements")
    f1._check_pair(f2)
    pair = f1.pair
    vec = convolve(f1, f2.right_expansion())
    coeffs, reps = {}, {}
    for k, v in vec.coeffs.items():
        d = pair.dkey(vec.reps[k])
        if d in coeffs:
            if coeffs[d] != v:
                raise ConsistencyError(f"product not constant on double coset of {pair.G.format(vec.reps[k])}")
            continue
        coeffs[d] = v
        reps[d] = vec.reps[k]
    for d in coeffs:
        for a in pair.right_cosets_of(d):
            if vec.coeffs.get(pair.right_key(a), 0) != coeffs[d]:
                raise ConsistencyError(f"product not constant on double coset of {pair.G.format(reps[d])}")
    return HeckeElement(pair, coeffs, reps)


def _weight(length, s):
    two_s = 2 * s
    base = 1 + length
    if float(two_s).is_integer() and not isinstance(base, float):
        return Fraction(base) ** int(two_s)
    return float(base) ** float(two_s)


def weighted_norm_sq(f, s, L):
    """``sum over right cosets Ha in supp f of |f(a)|^2 (1 + L(a))^(2s)``.

    Exact when ``2s`` is an integer and ``L`` is integer valued.  Every double
    coset contributes once per right coset it contains.
    """
    if s < 0:
        raise DomainError("s must be >= 0")
    pair = f.pair
    for h in pair.H.gens:
        if L(h) != 0:
            raise DomainError(f"length {getattr(L, 'name', L)} does not vanish on {pair.H.name}")
    total = 0
    for k, v in f.coeffs.items():
        try:
            reps = pair.right_cosets_of(k)
        except KeyError as exc:
            raise DomainError(f"R count unavailable for {pair.G.format(f.reps[k])}") from exc
        for a in reps:
            total += _abs2(v) * _weight(L(a), s)
    return total


def weighted_norm(f, s, L):
    return math.sqrt(float(weighted_norm_sq(f, s, L)))


# ---------------------------------------------------------------------------
# truncated regular representation
# ---------------------------------------------------------------------------
def truncation_ball(pair, radius):
    """Indices and elements of the explorer's cosets at BFS depth ``<= radius``."""
    table = pair.explorer
    table.extend_to(radius)
    idx = [i for i, d in enumerate(table.depth) if d <= radius]
    if not idx:
        raise DomainError("empty truncated ball")
    return table, idx


def convolution_matrix(f, radius):
    """Sparse ``M[Hy, Hx] = f(y x^-1)`` over cosets in the truncated ball."""
    pair = f.pair
    G = pair.G
    table, idx = truncation_ball(pair, radius)
    pos = {table.keys[i]: j for j, i in enumerate(idx)}
    rows, cols, vals = [], [], []
    dtype = complex if any(isinstance(v, complex) for v in f.coeffs.values()) else float
    for j, i in enumerate(idx):
        x = table.reps[i]
        for kd, c in f.coeffs.items():
            for a in pair.right_cosets_of(kd):
                r = pos.get(pair.right_key(G._mul(a, x)))
                if r is not None:
                    rows.append(r)
                    cols.append(j)
                    vals.append(dtype(c))
    n = len(idx)
    M = sp.csr_matrix((np.array(vals, dtype=dtype), (rows, cols)), shape=(n, n))
    M.sum_duplicates()
    return M, table, idx


def power_iteration(M, iters=500, tol=1e-10, v0=None):
    """Largest singular value of ``M`` via power iteration on ``M^T M``.

    Seeded with ``v0`` (default: the all-ones vector).  Returns
    ``(sigma, converged, v)`` where ``sigma = |Mv| / |v|`` for the final unit
    vector ``v`` (a lower bound).
    """
    n = M.shape[1]
    if n == 0:
        raise DomainError("empty matrix")
    v = np.ones(n) if v0 is None else np.asarray(v0, dtype=float)
    v = v / np.linalg.norm(v)
    MH = M.conj().T
    sigma, converged = 0.0, False
    for _ in range(max(1, iters)):
        w = M @ v
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0, True, v
        u = MH @ w
        nu = np.linalg.norm(u)
        v_next = u / nu
        if sigma and abs(new - sigma) <= tol * new:
            sigma, converged, v = new, True, v
            break
        sigma, v = new, v_next
    sigma = max(sigma, float(np.linalg.norm(M @ v)))
    return sigma, converged, v


def operator_norm_estimate(f, truncation_radius, iters=500, tol=1e-10):
    """Lower bound for ``|lambda(f)|`` from the truncated convolution matrix.

    Returns ``(lower_bound, converged)``.  Monomial matrices (``delta`` of a
    double coset with one right coset) are evaluated exactly.
    """
    M, _, _ = convolution_matrix(f, truncation_radius)
    exact = _monomial_norm(M)
    if exact is not None:
        return exact, True
    sigma, converged, _ = power_iteration(M, iters, tol)
    return sigma, converged


def _monomial_norm(M):
    """``max |M_ij|`` when every row and column has at most one nonzero, else None."""
    M = M.tocsr()
    M.eliminate_zeros()
    if M.nnz == 0:
        return 0.0
    if np.max(np.diff(M.indptr)) > 1 or np.max(np.bincount(M.indices, minlength=M.shape[1])) > 1:
        return None
    return float(np.max(np.abs(M.data)))


# ---------------------------------------------------------------------------
# random nonnegative samples (exact by default)
# ---------------------------------------------------------------------------
def _coeff(rng, exact, maxc):
    if exact:
        return Fraction(rng.randint(1, maxc * 4), rng.randint(1, 4))
    return rng.uniform(0.0, float(maxc))


def random_hecke(pair, rng, size=3, radius=2, exact=True, maxc=5):
    """Random ``f >= 0`` on double cosets of explorer reps within ``radius``."""
    table, idx = truncation_ball(pair, radius)
    picks = [table.reps[rng.choice(idx)] for _ in range(size)]
    return HeckeElement.from_elements(pair, {g: _coeff(rng, exact, maxc) for g in picks})


def random_vector(pair, rng, size=3, radius=2, exact=True, maxc=5):
    """Random ``k >= 0`` on right cosets within ``radius``."""
    table, idx = truncation_ball(pair, radius)
    picks = [table.reps[rng.choice(idx)] for _ in range(size)]
    return CosetVector.from_elements(pair, {g: _coeff(rng, exact, maxc) for g in picks})
