"""Task registry shared by config files and CLI subcommands.

Each task validates its parameters at parse time (``prepare``) and returns a
JSON-ready dict at run time.  Reports never contain timestamps.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .config import _Err
from .cosets import cosets_report, is_almost_normal
from .groups import AffineRationals
from .extensions import (all_triples, check_cocycle_relations, esigma_iso_check, is_consistent,
                         theta_bijectivity_check)
from .hecke import (CosetVector, HeckeElement, convolve, hecke_product, operator_norm_estimate,
                    random_hecke, random_vector)
from .lengths import sample_pairs
from .probe import rd_fit
from .transfer import (TransferContext, fd_group_check, in_commensurator, nearly_normal_check,
                       pullback_along_hom, pushforward_along_surjection, strongly_commensurable)

REQUIRED = object()


def jsonable(v):
    """Fractions become exact strings, everything else passes through."""
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return v


@dataclass
class Task:
    name: str
    schema: list
    run: object
    certifies: str

    def prepare(self, cfg, res, raw):
        known = {k for k, _, _ in self.schema}
        for k in raw:
            if k not in known:
                raise _Err(f"task {self.name}: unknown parameter {k!r}")
        out = {}
        for key, kind, default in self.schema:
            if key not in raw:
                if default is REQUIRED:
                    raise _Err(f"task {self.name}: missing parameter {key!r}")
                out[key] = default(out, cfg) if callable(default) else default
                continue
            out[key] = _convert(res, out, kind, raw[key], key)
        _check_types(self.name, out)
        return out


def _convert(res, out, kind, text, key):
    if kind in ("pair", "subgroup", "length", "hecke", "vector", "hom", "extension"):
        return res.ref(text, kind)
    if kind == "group":
        return res.group(text)
    if kind == "int":
        return res.int(text)
    if kind == "float":
        try:
            return float(text)
        except ValueError:
            raise _Err(f"{key}: expected a number, got {text!r}") from None
    if kind == "ints":
        return [res.int(t) for t in text.split(",") if t.strip()]
    if kind == "str":
        return text
    if kind.startswith("elem@"):
        src = out.get(kind[5:])
        if src is None:
            raise _Err(f"{key} needs {kind[5:]} to be given first")
        G = getattr(src, "G", None) or getattr(src, "parent", None) or src
        return res.elem(G, text)
    raise _Err(f"internal: unknown parameter kind {kind}")


def _check_types(name, p):
    pair, L = p.get("pair"), p.get("length")
    if pair is not None and L is not None and L.group != pair.G:
        raise _Err(f"task {name}: type mismatch, length {L.name} is on {L.group}, pair is over {pair.G}")
    H, K = p.get("H"), p.get("K")
    if H is not None and K is not None and H.parent != K.parent:
        raise _Err(f"task {name}: {H.name} and {K.name} live in different groups")
    f, k = p.get("f"), p.get("k")
    if f is not None and k is not None and f.pair is not k.pair:
        raise _Err(f"task {name}: f and k are over different pairs")


def _default_length(out, cfg):
    pair = out.get("pair")
    if pair is None:
        return None
    d = cfg.decls.get(f"{pair.name}.L")
    if d is None or d.kind != "length":
        raise _Err(f"no length given and {pair.name}.L is not declared")
    return d.obj


# ---------------------------------------------------------------------------
# runners: (params, rng, budget) -> dict
# ---------------------------------------------------------------------------
def _pair_info(p, rng, budget):
    pair = p["pair"]
    G, H = pair.G, pair.H
    table = pair.explorer
    table.budget = max(table.budget, budget)
    table.extend_to(p["radius"])
    an = is_almost_normal(pair, p["radius"], budget)
    return {"pair": pair.name, "group": str(G), "subgroup": H.name,
            "subgroup_generators": [G.format(h) for h in H.gens],
            "group_order": G.order, "index": len(table) if table.complete else None,
            "almost_normal": an.to_json()}


def _cosets(p, rng, budget):
    return cosets_report(p["pair"], p["radius"], budget)


def _lr(p, rng, budget):
    pair, g = p["pair"], p["g"]
    G = pair.G
    rec = pair.double_coset(g, budget)
    out = rec.to_json(G)
    gi = G._inv(g)
    out["R_of_inverse"] = pair.R_count(gi, budget)
    out["L_equals_R_of_inverse"] = out["R_of_inverse"] == rec.L_count
    if rec.L_left is not None:
        out["left_orbit_agrees"] = rec.L_left == rec.L_count
    return out


def _convolve(p, rng, budget):
    f = p["f"]
    if p["k"] is not None:
        out = convolve(f, p["k"])
        kind = "vector"
    elif p["f2"] is not None:
        out = hecke_product(f, p["f2"])
        kind = "hecke"
    else:
        raise _Err("convolve needs k or f2")
    return {"kind": kind, "result": jsonable(out.to_json()), "norm2_sq": jsonable(out.norm2_sq())}


def _opnorm(p, rng, budget):
    f = p["f"]
    sigma, converged = operator_norm_estimate(f, p["truncation"], p["iters"])
    return {"estimate": sigma, "converged": converged, "lower_bound": True,
            "truncated_cosets": len([d for d in f.pair.explorer.depth if d <= p["truncation"]])}


def _length_check(p, rng, budget):
    L = p["length"]
    pairs = sample_pairs(L.group, rng, p["samples"], p["max_length"])
    ax = L.check_axioms(pairs)
    subs = [p["pair"].H] if p["pair"] is not None else list(L.vanishing)
    van = L.check_vanishing(rng, p["samples"], subs)
    return {"length": L.name, "axioms": ax.to_json(), "vanishing": van.to_json()}


def _commensurate(p, rng, budget):
    H = p["H"]
    if p["g"] is not None:
        v = in_commensurator(p["g"], H, budget)
        return {"test": "commensurator", "g": H.parent.format(p["g"]), "verdict": v.to_json()}
    if p["K"] is None:
        raise _Err("commensurate needs K or g")
    v = strongly_commensurable(H, p["K"], budget)
    sym = strongly_commensurable(p["K"], H, budget)
    return {"test": "strongly-commensurable", "verdict": v.to_json(), "symmetric": v.kind == sym.kind}


def _residual_summary(rows):
    flat = [x for r in rows for x in r]
    return {"all_zero": all(x == 0 for x in flat), "max_abs": jsonable(max((abs(x) for x in flat), default=0)),
            "residuals": jsonable(rows)}


def _transfer_check(p, rng, budget):
    if p["hom"] is not None:
        phi = p["hom"]
        if p["mode"] == "pullback":
            ht = pullback_along_hom(phi, p["H"], budget)
        else:
            ht = pushforward_along_surjection(phi, p["H"], budget, seed=rng.randrange(2 ** 31))
        rows = ht.sample_residuals(rng, p["samples"])
        return {"mode": p["mode"], "H1": ht.H1.name, "H2": ht.H2.name,
                "norm_equalities": _residual_summary(rows),
                "double_cosets": ht.double_coset_bijection(3).to_json()}
    if p["K"] is None:
        raise _Err("transfer-check needs K (nested mode) or hom")
    ctx = TransferContext(p["H"].parent, p["H"], p["K"], budget)
    rows = ctx.sample_identities(rng, p["samples"])
    bars = ctx.sample_bar_checks(rng, p["samples"])
    viol = {k: sum(1 for b in bars if not b[k]) for k in bars[0]} if bars else {}
    return {"n": ctx.n, "h_reps": [ctx.G.format(h) for h in ctx.h_reps], "identities": _residual_summary(rows),
            "bar_violations": viol, "c": "c(m) = m"}


def _nearly_normal(p, rng, budget):
    out = {}
    cap = min(budget, p["closure_budget"])
    if p["H"] is not None:
        out["nearly_normal"] = nearly_normal_check(p["H"], cap).to_json()
    if p["group"] is not None:
        out["finite_derived_subgroup"] = fd_group_check(p["group"], cap).to_json()
    if not out:
        raise _Err("nearly-normal needs H or group")
    return out


def _extension_check(p, rng, budget):
    ext = p["extension"]
    Q, E = ext.Q, ext.E
    ct = ext.cocycle()
    if Q.order is not None and Q.order <= 16:
        triples, how = all_triples(Q), "full enumeration"
    else:
        xs = Q.sample(rng, 3 * p["triples"], 3)
        triples, how = list(zip(xs[::3], xs[1::3], xs[2::3])), "sampled"
    hs = list(ext.N.gens) + ext.N.sample(rng, 4, 3)
    out = {"extension": ext.name, "triples": how,
           "cocycle_relations": check_cocycle_relations(ct, triples, hs).to_json()}
    es = ext.esigma()
    samples = es.sample(rng, p["samples"], 4)
    bad = sum(1 for u in samples if es._mul(u, es._inv(u)) != es.identity)
    out["inverse_law"] = {"samples": len(samples), "violations": bad}
    out["coordinate_isomorphism"] = esigma_iso_check(ext, samples[:200]).to_json()
    H = p["H"]
    if H is not None:
        gammas = Q.elements() if Q.order is not None else list(Q.gens)
        cons = is_consistent(ext, H, gammas)
        out["consistency"] = cons.to_json()
        if cons.ok:
            thetas = []
            for g in gammas[:4]:
                for b in gammas[:4]:
                    v = theta_bijectivity_check(ext, H, g, b, p["radius"], budget)
                    thetas.append({"gamma": Q.format(g), "beta": Q.format(b), **v.to_json()})
            out["theta"] = thetas
    return out


def _rd_probe(p, rng, budget):
    rep = rd_fit(p["pair"], p["length"], p["radii"], p["trials"], seed=rng.randrange(2 ** 31),
                 truncation=p["truncation"], budget=budget)
    out = rep.to_json()
    if isinstance(p["pair"].G, AffineRationals):
        out["label"] = "exploratory"
    return out


TASKS = {t.name: t for t in [
    Task("pair-info", [("pair", "pair", REQUIRED), ("radius", "int", 2)], _pair_info,
         "subgroup data and sampled almost-normality (L(g) finite on a coset ball)"),
    Task("cosets", [("pair", "pair", REQUIRED), ("radius", "int", 2)], _cosets,
         "right-coset table with L and R counts per double coset"),
    Task("lr", [("pair", "pair", REQUIRED), ("g", "elem@pair", REQUIRED)], _lr,
         "L(g) = |H : H ∩ gHg^-1|, R(g), and L(g) = R(g^-1)"),
    Task("convolve", [("f", "hecke", REQUIRED), ("k", "vector", None), ("f2", "hecke", None)], _convolve,
         "convolution f * k on right cosets, or the Hecke product f * f2"),
    Task("opnorm", [("f", "hecke", REQUIRED), ("truncation", "int", 50), ("iters", "int", 500)], _opnorm,
         "lower bound for the regular-representation norm from a truncated coset space"),
    Task("length-check", [("length", "length", REQUIRED), ("pair", "pair", None), ("samples", "int", 200),
                          ("max_length", "int", 6)], _length_check,
         "length-function axioms and vanishing on the subgroup, on samples"),
    Task("commensurate", [("H", "subgroup", REQUIRED), ("K", "subgroup", None), ("g", "elem@H", None)],
         _commensurate, "strong commensurability or commensurator membership, by BFS indices"),
    Task("transfer-check", [("H", "subgroup", REQUIRED), ("K", "subgroup", None), ("hom", "hom", None),
                            ("mode", "str", "pullback"), ("samples", "int", 100)], _transfer_check,
         "exact lift identities |k~|^2 = n|k|^2, |f~|^2 = n|f|^2, |f~ * k~|^2 = n^3 |f * k|^2 and bar-map "
         "bounds; or norm equalities along a homomorphism"),
    Task("nearly-normal", [("H", "subgroup", None), ("group", "group", None), ("closure_budget", "int", 2000)],
         _nearly_normal,
         "index of H in its normal closure and finiteness of the derived subgroup, within budget"),
    Task("extension-check", [("extension", "extension", REQUIRED), ("H", "subgroup", None), ("radius", "int", 6),
                             ("samples", "int", 1000), ("triples", "int", 200)], _extension_check,
         "cocycle and action relations, E_sigma inverse law, section consistency and theta bijectivity"),
    Task("rd-probe", [("pair", "pair", REQUIRED), ("length", "length", _default_length),
                      ("radii", "ints", [1, 2, 4, 8]), ("trials", "int", 8), ("truncation", "int", None)],
         _rd_probe, "growth of convolution ratios on balls (consistency of data, not a proof)"),
]}
