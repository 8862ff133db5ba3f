import math
import random

import numpy as np
import pytest

from heckepairs.cosets import HeckePair
from heckepairs.errors import DomainError
from heckepairs.groups import Cyclic, FreeGroup
from heckepairs.lengths import quotient_word_length, word_length
from heckepairs.probe import (BOUNDARY_MASS, BallOperators, composed_witness_check, fit_growth,
                              haagerup_norm_ratio, haagerup_ratio, haagerup_ratios, perron_start,
                              rd_fit, transfer_constant)
from heckepairs.hecke import HeckeElement
from heckepairs.subgroups import Multiples, Trivial

Z = Cyclic(0)


@pytest.fixture(scope="module")
def z_ops():
    pair = HeckePair(Z, Trivial(Z), name="(Z, 1)")
    return BallOperators(pair, word_length(Z), 8)


def test_chi_family_monotone_and_perron_nonnegative(z_ops):
    res = haagerup_ratios(z_ops, [1, 2, 4, 8], trials=4, seed=0)
    chis = [r.chi_ratio for r in res]
    assert all(b >= a - 1e-9 for a, b in zip(chis, chis[1:]))
    assert all(r.ratio >= r.chi_ratio - 1e-12 for r in res)
    for r in (1, 4, 8):
        M = z_ops.matrix(z_ops.ball_mask(r).astype(float))
        assert np.all(perron_start(M) >= 0)


def test_random_k_never_beats_perron(z_ops):
    rng = np.random.default_rng(0)
    vals = z_ops.ball_mask(4).astype(float)
    ratio, _, _ = z_ops.ratio(vals)
    M = z_ops.matrix(vals)
    sigma = ratio * z_ops.l2(vals)
    for _ in range(50):
        k = rng.random(M.shape[1])
        assert np.linalg.norm(M @ k) <= sigma * np.linalg.norm(k) * (1 + 1e-9)


def test_integer_chi_ratio_follows_square_root_law(z_ops):
    # |chi_r|_2 = sqrt(2r + 1) and |lambda(chi_r)| -> 2r + 1
    for r, res in zip([2, 4, 8], haagerup_ratios(z_ops, [2, 4, 8], trials=0)):
        assert res.chi_ratio == pytest.approx(math.sqrt(2 * r + 1), rel=0.1)


def test_finite_quotient_ratio_bounded():
    pair = HeckePair(Z, Multiples(Z, 3), name="(Z, 3Z)")
    L = quotient_word_length(Z, pair.H)
    res = haagerup_ratio(pair, L, 1, trials=6)
    assert res.ratio <= 3 + 1e-9 and res.boundary_mass == 0.0


def test_seeded_reports_identical():
    pair = HeckePair(Z, Trivial(Z), name="(Z, 1)")
    a = rd_fit(pair, word_length(Z), [1, 2, 3, 4], trials=3, seed=7).to_json()
    pair2 = HeckePair(Z, Trivial(Z), name="(Z, 1)")
    b = rd_fit(pair2, word_length(Z), [1, 2, 3, 4], trials=3, seed=7).to_json()
    assert a == b


def test_unexhaustible_ball_is_inconclusive():
    F = FreeGroup(2)
    pair = HeckePair(F, Trivial(F), name="(F2, 1)", budget=30)
    rep = rd_fit(pair, word_length(F), [1, 2, 3, 4], budget=30)
    assert rep.verdict == "inconclusive" and "error" in rep.fit


def test_fit_growth_verdicts():
    radii = [1, 2, 4, 8, 16]
    poly = [2 * (1 + r) ** 1.5 for r in radii]
    fit, v = fit_growth(radii, poly)
    assert v == "polynomial-consistent" and fit["degree"] == pytest.approx(1.5)
    expo = [math.exp(r / 2) for r in radii]
    assert fit_growth(radii, expo)[1] == "growth-suspicious"
    assert fit_growth(radii, poly, [False, True, False, False, False])[1] == "inconclusive"
    with pytest.raises(DomainError):
        fit_growth([1, 2, 3], [1, 1, 1])


def test_boundary_mass_flag_on_tiny_truncation():
    pair = HeckePair(Z, Trivial(Z), name="(Z, 1)")
    ops = BallOperators(pair, word_length(Z), 4, truncation=5)
    res = haagerup_ratios(ops, [4], trials=0)[0]
    assert res.boundary_mass > BOUNDARY_MASS and res.inconclusive


def test_haagerup_norm_ratio():
    pair = HeckePair(Z, Trivial(Z), budget=5000)
    L = word_length(Z)
    f = HeckeElement.from_elements(pair, {0: 1})
    assert haagerup_norm_ratio(f, 1, L, 10) == pytest.approx(1.0)
    g = HeckeElement.from_elements(pair, {x: 1 for x in range(-3, 4)})
    assert haagerup_norm_ratio(g, 1, L, 200) < 1.0


def test_composed_checks():
    assert transfer_constant(1) == 1
    assert transfer_constant(2) == pytest.approx(8 * math.sqrt(8))
    h = HeckePair(Z, Multiples(Z, 2), name="(Z, 2Z)")
    k = HeckePair(Z, Multiples(Z, 4), name="(Z, 4Z)")
    L = quotient_word_length(Z, Multiples(Z, 2))
    out = composed_witness_check("transfer-down", (h, L), (k, quotient_word_length(Z, Multiples(Z, 4))),
                                 [1, 2, 3, 4], trials=3, n=2)
    assert out["ok"]
    same = composed_witness_check("transfer-down", (h, L), (HeckePair(Z, Multiples(Z, 2)), L),
                                  [1, 2, 3, 4], trials=3, n=1)
    source = rd_fit(h, L, [1, 2, 3, 4], trials=3).ratios
    assert [r["bound"] for r in same["rows"]] == pytest.approx(source)
    with pytest.raises(DomainError):
        composed_witness_check("nope", None, None, [1])


def test_haagerup_norm_ratio_edge_cases():
    pair = HeckePair(Z, Trivial(Z), budget=5000)
    L = word_length(Z)
    one = HeckeElement.identity(pair)
    assert all(haagerup_norm_ratio(one, s, L, 5) == 1.0 for s in (0, 0.5, 2))
    g = HeckeElement.from_elements(pair, {x: 1 for x in range(-2, 3)})
    sigma_ratio = haagerup_norm_ratio(g, 0, L, 300)
    assert sigma_ratio == pytest.approx(math.sqrt(5), rel=1e-2)
    # chi_1 with s = 1: both sides tend to 3, so the ratio approaches 1 from below
    chi1 = HeckeElement.from_elements(pair, {-1: 1, 0: 1, 1: 1})
    assert haagerup_norm_ratio(chi1, 1, L, 1000) == pytest.approx(1.0, abs=1e-3)
