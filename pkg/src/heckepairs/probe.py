"""Numerical probes of polynomial growth of convolution ratios on balls.

For ``f >= 0`` supported in ``B_{r,L}(G, H)`` the probe computes the
largest singular value of the convolution matrix of ``f`` on a truncated
right-coset space (a lower bound for ``|lambda(f)|``) and divides by
``|f|_2``.  Because the matrix is entrywise nonnegative the maximising ``k``
is a Perron vector.  A Lanczos solve on ``M^T M`` gives a starting vector,
whose absolute value is then refined by power iteration (nonnegativity is
preserved, and asserted).

Verdicts only describe the growth data: ``polynomial-consistent``,
``growth-suspicious`` or ``inconclusive``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .cosets import HeckePair
from .errors import BudgetExceeded, DomainError
from .hecke import HeckeElement, operator_norm_estimate, power_iteration, weighted_norm
from .lengths import ball

BOUNDARY_MASS = 0.01
TRUNCATION_CAP = 2000
FIT_RESIDUAL = 0.1
FIT_STABILITY = 0.2


class BallOperators:
    """Dense convolution operators for functions on ``B_{R,L}`` over a truncated coset space.

    ``ids[y, x]`` is the position (in ``self.dkeys``) of the double coset of
    ``y x^-1`` or ``-1`` when that double coset lies outside the ball, so the
    matrix of ``f`` is ``values[ids]`` with a trailing zero for ``-1``.
    """

    def __init__(self, pair, L, r_max, truncation=None, cap=TRUNCATION_CAP, budget=None):
        self.pair, self.L, self.r_max = pair, L, r_max
        G = pair.G
        b = ball(pair, r_max, L, budget=budget)
        if b.partial:
            raise DomainError(f"ball of radius {r_max} not exhaustible within budget")
        self.dkeys, self.reps = b.dkeys, b.reps
        self.lengths = np.array([float(L(g)) for g in self.reps])
        self.rcount = np.array([len(pair.right_cosets_of(d)) for d in self.dkeys], dtype=float)
        where = {}
        for j, d in enumerate(self.dkeys):
            for a in pair.right_cosets_of(d):
                where[pair.right_key(a)] = j
        table = pair.explorer
        self.truncation = self._choose_truncation(table, r_max, truncation, cap)
        table.extend_to(self.truncation)
        idx = [i for i, dep in enumerate(table.depth) if dep <= self.truncation]
        self.table, self.idx = table, idx
        self.complete = table.complete and len(idx) == len(table.reps)
        self.last_layer = np.array([table.depth[i] == self.truncation for i in idx])
        reps = [table.reps[i] for i in idx]
        invs = [G._inv(x) for x in reps]
        n = len(reps)
        ids = np.full((n, n), -1, dtype=np.int32)
        rk = pair.right_key
        for a, y in enumerate(reps):
            row = ids[a]
            for c, xi in enumerate(invs):
                j = where.get(rk(G._mul(y, xi)))
                if j is not None:
                    row[c] = j
        self.ids = ids

    @staticmethod
    def _choose_truncation(table, r_max, truncation, cap):
        """Largest ``T <= 8 r + 8`` whose truncated table has at most ``cap`` cosets."""
        if truncation is not None:
            return truncation
        want = int(8 * r_max + 8)
        T = 1
        table.extend_to(1)
        while T < want and not table.complete:
            table.extend_to(T + 1)
            if table.radius < T + 1 or sum(1 for d in table.depth if d <= T + 1) > cap:
                break
            T += 1
        if table.complete:
            T = max(table.depth)
        return T

    def __len__(self):
        return len(self.idx)

    def matrix(self, values):
        vals = np.append(np.asarray(values, dtype=float), 0.0)
        return vals[self.ids]

    def l2(self, values):
        values = np.asarray(values, dtype=float)
        return float(np.sqrt(np.sum(values ** 2 * self.rcount)))

    def ratio(self, values, iters=500, tol=1e-10):
        """``(sigma / |f|_2, boundary mass of the Perron vector, converged)``."""
        M = self.matrix(values)
        sigma, converged, v = power_iteration(M, iters, tol, perron_start(M))
        if np.min(v) < -1e-12:
            raise AssertionError("Perron vector has a negative entry")
        mass = 0.0 if self.complete else float(np.sum(v[self.last_layer] ** 2) / np.sum(v ** 2))
        return sigma / self.l2(values), mass, converged

    def ball_mask(self, r):
        return self.lengths <= r + 1e-12

    def random_values(self, rng, r, density=0.3):
        """Sparse nonnegative values on the ball of radius ``r`` (never all zero)."""
        pos = np.flatnonzero(self.ball_mask(r))
        out = np.zeros(len(self.dkeys))
        picks = [j for j in pos if rng.random() < density] or [int(rng.choice(list(pos)))]
        for j in picks:
            out[j] = rng.uniform(0.0, 1.0)
        return out

    def to_hecke(self, values):
        return HeckeElement(self.pair, {d: float(v) for d, v in zip(self.dkeys, values) if v},
                            {d: g for d, g in zip(self.dkeys, self.reps)})


def perron_start(M):
    """``|v|`` for a top right singular vector ``v`` of ``M`` (ones if the solver fails).

    For ``M >= 0`` the absolute value of a maximiser is again a maximiser.
    """
    n = M.shape[1]
    if n <= 400:
        _, vecs = np.linalg.eigh(M.T @ M)
        return np.abs(vecs[:, -1])
    op = LinearOperator((n, n), matvec=lambda x: M.T @ (M @ x), dtype=float)
    try:
        _, vecs = eigsh(op, k=1, which="LA", v0=np.ones(n), tol=1e-10, maxiter=20 * n)
    except ArpackNoConvergence:
        return np.ones(n)
    return np.abs(vecs[:, 0])


@dataclass
class RadiusResult:
    r: float
    ratio: float
    chi_ratio: float
    boundary_mass: float
    converged: bool
    candidates: int
    inconclusive: bool

    def to_json(self):
        return {"r": self.r, "ratio": self.ratio, "chi_ratio": self.chi_ratio,
                "boundary_mass": self.boundary_mass, "converged": self.converged,
                "candidates": self.candidates, "inconclusive": self.inconclusive}


@dataclass
class ProbeReport:
    pair: str
    length: str
    radii: list
    ratios: list
    fit: dict
    verdict: str
    seed: int
    trials: int
    truncation: int
    cosets: int
    per_radius: list = field(default_factory=list)

    def to_json(self):
        return {"pair": self.pair, "length": self.length, "radii": self.radii, "ratios": self.ratios,
                "fit": self.fit, "verdict": self.verdict, "seed": self.seed, "trials": self.trials,
                "truncation": self.truncation, "truncated_cosets": self.cosets,
                "per_radius": [p.to_json() for p in self.per_radius]}


def haagerup_ratios(ops, radii, trials=8, seed=0, iters=500):
    """Per-radius maxima of ``sigma(f) / |f|_2`` over the candidate set."""
    rng = random.Random(seed)
    out = []
    for r in radii:
        cands = [ops.ball_mask(rp).astype(float) for rp in sorted({x for x in radii if x <= r})]
        cands += [ops.random_values(rng, r) for _ in range(trials)]
        best, chi, mass, conv = 0.0, 0.0, 0.0, True
        for i, vals in enumerate(cands):
            ratio, m, c = ops.ratio(vals, iters)
            if i == len(cands) - trials - 1:
                chi = ratio
            if ratio > best:
                # leakage matters for the maximiser only
                best, mass = ratio, m
            conv = conv and c
        out.append(RadiusResult(r, best, chi, mass, conv, len(cands), mass > BOUNDARY_MASS))
    return out


def haagerup_ratio(pair, L, r, trials=8, truncation=None, seed=0):
    """Single-radius convenience wrapper; returns the :class:`RadiusResult`."""
    ops = BallOperators(pair, L, r, truncation)
    return haagerup_ratios(ops, [r], trials, seed)[0]


def _degree(radii, ratios):
    x = np.log1p(np.asarray(radii, dtype=float))
    y = np.log(np.asarray(ratios, dtype=float))
    coef = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((np.polyval(coef, x) - y) ** 2)))
    return float(coef[0]), float(coef[1]), resid


def fit_growth(radii, ratios, flags=()):
    """Least squares ``log ratio ~ d log(1 + r) + c``, plus a three-valued verdict."""
    if len(radii) < 4:
        raise DomainError("need at least 4 radii")
    d, c, resid = _degree(radii, ratios)
    d_drop, _, _ = _degree(radii[:-1], ratios[:-1])
    windows = [_degree(radii[i:i + 3], ratios[i:i + 3])[0] for i in range(len(radii) - 2)]
    stable = abs(d - d_drop) <= FIT_STABILITY
    rising = (all(b > a for a, b in zip(windows, windows[1:]))
              and len(windows) > 1 and windows[-1] - windows[0] > FIT_STABILITY)
    if any(flags):
        verdict = "inconclusive"
    elif resid <= FIT_RESIDUAL and stable:
        verdict = "polynomial-consistent"
    elif rising:
        verdict = "growth-suspicious"
    else:
        verdict = "inconclusive"
    fit = {"degree": d, "constant": c, "residual": resid, "degree_without_last": d_drop,
           "window_degrees": windows}
    return fit, verdict


def rd_fit(pair, L, radii, trials=8, seed=0, truncation=None, budget=None, iters=500):
    """Probe ``pair`` at each radius and fit the growth; returns a :class:`ProbeReport`."""
    radii = list(radii)
    try:
        ops = BallOperators(pair, L, max(radii), truncation, budget=budget)
    except DomainError as exc:
        fit = {"degree": None, "constant": None, "residual": None, "error": str(exc)}
        return ProbeReport(pair.name, L.name, radii, [], fit, "inconclusive", seed, trials, 0, 0)
    res = haagerup_ratios(ops, radii, trials, seed, iters)
    ratios = [p.ratio for p in res]
    fit, verdict = fit_growth(radii, ratios, [p.inconclusive for p in res])
    return ProbeReport(pair.name, L.name, radii, ratios, fit, verdict, seed, trials,
                       ops.truncation, len(ops), res)


def haagerup_norm_ratio(f, s, L, truncation):
    """``|lambda(f)| / |f|_{s,L}`` with the truncated operator-norm estimate."""
    sigma, _ = operator_norm_estimate(f, truncation)
    return sigma / weighted_norm(f, s, L)


# ---------------------------------------------------------------------------
# composed bounds
# ---------------------------------------------------------------------------
def transfer_constant(n):
    """``n^3 sqrt(c(n) c(n^2))`` with ``c(m) = m``."""
    return n ** 3 * math.sqrt(n * n ** 2)


def composed_witness_check(kind, source, target, radii, trials=8, seed=0, n=1, tol=1e-9):
    """Compare measured target ratios with the bound composed from measured source ratios.

    ``kind="transfer-down"``: ``source = (pair_H, L)``, ``target = (pair_K, L)``
    and the bound is ``transfer_constant(n) * P_H(r)``.
    ``kind="product"``: ``source = [(pair_0, L_0), (pair_1, L_1)]``, ``target``
    the product pair with the summed length; the bound is ``P_0(r) P_1(r)``.
    Violations are findings against the implementation.
    """
    radii = list(radii)
    if kind == "transfer-down":
        P = rd_fit(*source, radii, trials, seed).ratios
        bound = [transfer_constant(n) * p for p in P]
    elif kind == "product":
        Ps = [rd_fit(p, L, radii, trials, seed).ratios for p, L in source]
        bound = [a * b for a, b in zip(*Ps)]
    else:
        raise DomainError(f"unknown kind {kind!r}")
    measured = rd_fit(*target, radii, trials, seed + 1).ratios
    rows = [{"r": r, "measured": m, "bound": b, "ok": m <= b * (1 + tol)}
            for r, m, b in zip(radii, measured, bound)]
    ok = len(measured) == len(bound) and all(row["ok"] for row in rows)
    return {"kind": kind, "n": n, "rows": rows, "ok": ok}
