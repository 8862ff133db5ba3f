from fractions import Fraction

import pytest

from heckepairs.catalog import CATALOG
from heckepairs.config import parse_config
from heckepairs.cosets import HeckePair
from heckepairs.errors import ConfigError
from heckepairs.groups import AffineRationals
from heckepairs.subgroups import IntegerTranslations

from pathlib import Path

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = """
group G = integers
subgroup H = multiples(G, 2)
pair P = (G, H)
task cosets pair=P radius=3
"""


def _errors(text):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    return exc.value.errors


def test_minimal_config():
    cfg = parse_config(MINIMAL)
    assert [t.kind for t in cfg.tasks] == ["cosets"]
    assert isinstance(cfg.get("P", "pair"), HeckePair)
    assert cfg.tasks[0].line == 5


def test_dangling_reference_single_error():
    errs = _errors("group G = integers\npair P = (G, K)\n")
    assert len(errs) == 1 and "line 2" in errs[0] and "'K'" in errs[0]


def test_all_errors_collected():
    errs = _errors("group G = integers\nsubgroup H = multiples(X, 2)\nset seed = x\nnonsense\ntask bogus\n")
    assert [e.split(":")[0] for e in errs] == ["line 2", "line 3", "line 4", "line 5"]


def test_type_mismatches():
    errs = _errors("group G = integers\ngroup F = free(2)\nsubgroup H = trivial(F)\npair P = (G, H)\n")
    assert "type mismatch" in errs[0]
    errs = _errors("group G = integers\nsubgroup H = trivial(G)\nlength L = word(G)\npair P = (G, H)\n"
                   "group F = free(2)\nlength M = word(F)\ntask rd-probe pair=P length=M\n")
    assert "line 7" in errs[0]
    errs = _errors("group G = integers\nsubgroup H = G\n")
    assert "is a group" in errs[0]


def test_redeclaration_rejected():
    errs = _errors("group G = integers\ngroup G = free(2)\n")
    assert "already declared" in errs[0]


def test_quotient_length_needs_normal_subgroup():
    errs = _errors('group F = free(2)\nsubgroup A = generated(F, "a")\nlength L = quotient(F, A)\n')
    assert "not normal" in errs[0]


def test_hecke_literals():
    cfg = parse_config(MINIMAL + "hecke f on P = 1: 1 | 3: 1/2 | 0: 2\nvector k on P = 0: 1\n")
    f, k = cfg.get("f"), cfg.get("k")
    # 1 and 3 lie in the same double coset, so their coefficients add up
    assert f(1) == f(3) == Fraction(3, 2) and f(0) == 2
    assert k(2) == 1 and k(1) == 0


def test_bost_connes_config_round_trip():
    text = (CONFIGS / "bost_connes.cfg").read_text()
    cfg = parse_config(text)
    pairs = [d.obj for d in cfg.decls.values() if d.kind == "pair"]
    assert len(pairs) == 1
    p = pairs[0]
    assert isinstance(p.G, AffineRationals) and isinstance(p.H, IntegerTranslations)
    again = parse_config(cfg.text)
    assert sorted(again.decls) == sorted(cfg.decls) and len(again.tasks) == len(cfg.tasks)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_entries_parse(name):
    cfg = parse_config(f"use {name}\n")
    assert name in cfg.decls or f"{name}.H" in cfg.decls


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.cfg")), ids=lambda p: p.name)
def test_shipped_configs_parse(path):
    assert parse_config(path.read_text()).tasks
