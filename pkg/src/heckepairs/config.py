"""Line-oriented experiment configs.

One statement per line, ``#`` starts a comment::

    set seed = 7
    set budget = 20000
    use bost_connes
    group G = integers
    subgroup H = multiples(G, 2)
    pair P = (G, H)
    length L = quotient(G, H)
    hecke f on P = 1: 1 | -1: 1/2
    task cosets pair=P radius=3

The full grammar is in ``docs/config.md``.  Parsing collects every error with
its line number and raises :class:`ConfigError` once at the end.
"""
from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field
from fractions import Fraction

from . import groups as gr
from . import subgroups as sg
from .catalog import CATALOG
from .cosets import DEFAULT_BUDGET, HeckePair
from .errors import ConfigError, DomainError
from .extensions import Extension, semidirect_extension
from .hecke import CosetVector, HeckeElement
from .lengths import LengthFunction, finite_averaged, pullback, quotient_word_length, word_length

NAME = r"[A-Za-z_][A-Za-z0-9_.]*"
_DECL = re.compile(rf"^(group|subgroup|pair|length|hom|extension)\s+({NAME})\s*=\s*(.+)$")
_VEC = re.compile(rf"^(hecke|vector)\s+({NAME})\s+on\s+({NAME})\s*=\s*(.*)$")
_SET = re.compile(r"^set\s+(seed|budget)\s*=\s*(\S+)$")
_USE = re.compile(rf"^use\s+({NAME})$")
_TASK = re.compile(r"^task\s+([a-z][a-z-]*)\s*(.*)$")
_CALL = re.compile(rf"^({NAME})\s*\((.*)\)$", re.S)


class _Err(Exception):
    pass


@dataclass
class Decl:
    kind: str
    name: str
    obj: object
    line: int
    text: str


@dataclass
class TaskSpec:
    kind: str
    params: dict
    raw: dict
    line: int


@dataclass
class ExperimentConfig:
    decls: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    text: str = ""

    def get(self, name, kind=None):
        d = self.decls[name]
        if kind and d.kind != kind:
            raise KeyError(name)
        return d.obj


# ---------------------------------------------------------------------------
# expression evaluation
# ---------------------------------------------------------------------------
def _unquote(s):
    s = s.strip()
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "\"'":
        return s[1:-1]
    return s


def _call(text):
    m = _CALL.match(text.strip())
    if not m:
        return text.strip(), None
    inner = m.group(2).strip()
    args = gr._split_top(inner) if inner else []
    return m.group(1), args


class Resolver:
    def __init__(self, cfg):
        self.cfg = cfg

    def ref(self, text, kind):
        name = text.strip()
        d = self.cfg.decls.get(name)
        if d is None:
            raise _Err(f"unknown {kind} {name!r}")
        if d.kind != kind:
            raise _Err(f"{name!r} is a {d.kind}, expected a {kind}")
        return d.obj

    def int(self, text):
        try:
            return int(text.strip())
        except ValueError:
            raise _Err(f"expected an integer, got {text.strip()!r}") from None

    def elem(self, G, text):
        try:
            return G.parse(_unquote(text))
        except (DomainError, ValueError) as exc:
            raise _Err(f"cannot parse {text.strip()!r} in {G}: {exc}") from None

    def group(self, text):
        name, args = _call(text)
        if args is None:
            if name in self.cfg.decls:
                return self.ref(name, "group")
            if name in GROUP_BUILDERS:
                return GROUP_BUILDERS[name](self, [])
            raise _Err(f"unknown group {name!r}")
        if name not in GROUP_BUILDERS:
            raise _Err(f"unknown group constructor {name!r}")
        return GROUP_BUILDERS[name](self, args)

    def subgroup(self, text):
        name, args = _call(text)
        if args is None:
            return self.ref(name, "subgroup")
        if name not in SUBGROUP_BUILDERS:
            raise _Err(f"unknown subgroup constructor {name!r}")
        return SUBGROUP_BUILDERS[name](self, args)

    def length(self, text):
        name, args = _call(text)
        if args is None:
            return self.ref(name, "length")
        if name not in LENGTH_BUILDERS:
            raise _Err(f"unknown length constructor {name!r}")
        return LENGTH_BUILDERS[name](self, args)

    def hom(self, text):
        name, args = _call(text)
        if args is None:
            return self.ref(name, "hom")
        if name not in HOM_BUILDERS:
            raise _Err(f"unknown homomorphism constructor {name!r}")
        return HOM_BUILDERS[name](self, args)

    def extension(self, text):
        name, args = _call(text)
        if args is None:
            return self.ref(name, "extension")
        if name not in EXTENSION_BUILDERS:
            raise _Err(f"unknown extension constructor {name!r}")
        return EXTENSION_BUILDERS[name](self, args)


def _arity(args, n, what):
    if len(args) != n:
        raise _Err(f"{what} takes {n} argument(s), got {len(args)}")


def _g_cyclic(res, args):
    _arity(args, 1, "cyclic")
    return gr.Cyclic(res.int(args[0]))


def _g_free(res, args):
    _arity(args, 1, "free")
    return gr.FreeGroup(res.int(args[0]))


def _g_symmetric(res, args):
    _arity(args, 1, "symmetric")
    return gr.symmetric(res.int(args[0]))


def _g_free_product(res, args):
    if len(args) < 2:
        raise _Err("free_product needs at least two factors")
    return gr.FreeProduct([res.group(a) for a in args])


def _g_direct_product(res, args):
    if len(args) < 2:
        raise _Err("direct_product needs at least two factors")
    return gr.DirectProduct([res.group(a) for a in args])


def _primes(res, args):
    ps = tuple(res.int(a) for a in args) or (2, 3, 5)
    return ps


def _g_semidirect(res, args):
    if len(args) < 3:
        raise _Err("semidirect takes N, Q and one image list per Q generator")
    N, Q = res.group(args[0]), res.group(args[1])
    images = []
    for a in args[2:]:
        a = a.strip()
        if not (a.startswith("[") and a.endswith("]")):
            raise _Err(f"expected a bracketed image list, got {a!r}")
        images.append([res.elem(N, x) for x in gr._split_top(a[1:-1])])
    try:
        return gr.SemidirectProduct(N, Q, images)
    except DomainError as exc:
        raise _Err(str(exc)) from None


GROUP_BUILDERS = {
    "integers": lambda res, args: gr.Cyclic(0),
    "cyclic": _g_cyclic,
    "free": _g_free,
    "symmetric": _g_symmetric,
    "free_product": _g_free_product,
    "direct_product": _g_direct_product,
    "free_abelian": lambda res, args: gr.free_abelian(res.int(args[0])),
    "affine_rationals": lambda res, args: gr.AffineRationals(_primes(res, args)),
    "positive_rationals": lambda res, args: gr.PositiveRationals(_primes(res, args)),
    "semidirect": _g_semidirect,
}


def _need(G, cls, what):
    if not isinstance(G, cls):
        raise _Err(f"{what} needs a {cls.__name__}, got {G}")


def _s_multiples(res, args):
    _arity(args, 2, "multiples")
    G = res.group(args[0])
    _need(G, gr.Cyclic, "multiples")
    return sg.Multiples(G, res.int(args[1]))


def _s_generated(res, args):
    if len(args) < 2:
        raise _Err("generated takes a group and at least one element")
    G = res.group(args[0])
    xs = [res.elem(G, a) for a in args[1:]]
    if G.order is not None:
        return sg.FiniteSubgroup(G, xs)
    if len(xs) == 1:
        return sg.CyclicSubgroup(G, xs[0])
    raise _Err("generated with several elements needs a finite group")


def _s_preimage(res, args):
    if len(args) < 2:
        raise _Err("preimage takes a free product and generators of a finite subgroup of the product")
    G = res.group(args[0])
    _need(G, gr.FreeProduct, "preimage")
    R, pi = sg.relation_subgroup(G)
    ks = [res.elem(pi.codomain, a) for a in args[1:]]
    from .transfer import free_product_preimage
    try:
        return free_product_preimage(G, ks)[0]
    except DomainError as exc:
        raise _Err(str(exc)) from None


def _s_intersection(res, args):
    _arity(args, 2, "intersection")
    H, K = res.subgroup(args[0]), res.subgroup(args[1])
    if H.parent != K.parent:
        raise _Err("intersection of subgroups of different groups")
    return sg.Intersection(H, K)


def _s_conjugate(res, args):
    _arity(args, 2, "conjugate")
    H = res.subgroup(args[0])
    return sg.Conjugate(H, res.elem(H.parent, args[1]))


def _s_factor(res, args):
    _arity(args, 2, "factor")
    E = res.group(args[0])
    _need(E, gr.SemidirectProduct, "factor")
    _need(E.N, gr.Cyclic, "factor")
    return sg.SemidirectFactor(E, sg.Multiples(E.N, res.int(args[1])))


def _s_factor_diagonal(res, args):
    _arity(args, 1, "factor_diagonal")
    E = res.group(args[0])
    _need(E, gr.SemidirectProduct, "factor_diagonal")
    N = E.N
    if not (isinstance(N, gr.DirectProduct) and len(N.factors) == 2 and N.factors[0] == N.factors[1]):
        raise _Err("factor_diagonal needs N = A x A")
    A = N.factors[0]
    diag = sg.GeneralSubgroup(N, [(g, g) for g in A.gens], lambda x: x[0] == x[1],
                              key=lambda x: A._mul(A._inv(x[0]), x[1]), name="diag")
    return sg.SemidirectFactor(E, diag)


def _s_kernel(res, args):
    _arity(args, 1, "kernel")
    try:
        return sg.Kernel(res.hom(args[0]))
    except DomainError as exc:
        raise _Err(str(exc)) from None


def _s_relations(res, args):
    _arity(args, 1, "relations")
    G = res.group(args[0])
    _need(G, gr.FreeProduct, "relations")
    return sg.relation_subgroup(G)[0]


SUBGROUP_BUILDERS = {
    "trivial": lambda res, args: sg.Trivial(res.group(args[0])),
    "whole": lambda res, args: sg.Whole(res.group(args[0])),
    "multiples": _s_multiples,
    "generated": _s_generated,
    "integer_translations": lambda res, args: sg.IntegerTranslations(res.group(args[0])),
    "translations": lambda res, args: sg.Translations(res.group(args[0])),
    "relations": _s_relations,
    "preimage": _s_preimage,
    "intersection": _s_intersection,
    "conjugate": _s_conjugate,
    "kernel": _s_kernel,
    "factor": _s_factor,
    "factor_diagonal": _s_factor_diagonal,
}


def _l_word(res, args):
    _arity(args, 1, "word")
    return word_length(res.group(args[0]))


def _l_quotient(res, args):
    _arity(args, 2, "quotient")
    G, H = res.group(args[0]), res.subgroup(args[1])
    if H.parent != G:
        raise _Err(f"type mismatch: {H.name} is not a subgroup of {G}")
    try:
        return quotient_word_length(G, H)
    except DomainError as exc:
        raise _Err(str(exc)) from None


def _l_averaged(res, args):
    _arity(args, 2, "averaged")
    L, H = res.length(args[0]), res.subgroup(args[1])
    if H.parent != L.group:
        raise _Err(f"type mismatch: {H.name} is not a subgroup of {L.group}")
    if L.group.order is None:
        raise _Err("averaged needs a finite group")
    return finite_averaged(L, H)[0]


def _l_pullback(res, args):
    _arity(args, 2, "pullback")
    phi, L = res.hom(args[0]), res.length(args[1])
    if L.group != phi.codomain:
        raise _Err(f"type mismatch: length on {L.group}, homomorphism into {phi.codomain}")
    return pullback(phi, L)


LENGTH_BUILDERS = {"word": _l_word, "quotient": _l_quotient, "averaged": _l_averaged, "pullback": _l_pullback}


def _h_reduction(res, args):
    _arity(args, 2, "reduction")
    G = res.group(args[0])
    _need(G, gr.Cyclic, "reduction")
    try:
        return gr.reduction_mod(res.int(args[1]), G)
    except DomainError as exc:
        raise _Err(str(exc)) from None


def _h_projection(res, args):
    _arity(args, 1, "projection")
    G = res.group(args[0])
    _need(G, gr.FreeProduct, "projection")
    return gr.free_product_projection(G)


def _h_dilation(res, args):
    _arity(args, 2, "dilation_part")
    G, Q = res.group(args[0]), res.group(args[1])
    _need(G, gr.AffineRationals, "dilation_part")
    _need(Q, gr.PositiveRationals, "dilation_part")
    return gr.Homomorphism(G, Q, func=lambda x: x[1], name="pr")


def _h_inner(res, args):
    _arity(args, 2, "inner")
    G = res.group(args[0])
    return gr.inner_automorphism(G, res.elem(G, args[1]))


HOM_BUILDERS = {"reduction": _h_reduction, "projection": _h_projection,
                "dilation_part": _h_dilation, "inner": _h_inner}


def _e_carry(res, args):
    _arity(args, 1, "carry")
    n = res.int(args[0])
    if n < 2:
        raise _Err("carry needs n >= 2")
    Z = gr.Cyclic(0)
    return Extension(Z, sg.Multiples(Z, n), gr.Cyclic(n), gr.reduction_mod(n),
                     table={i: i for i in range(1, n)}, name=f"carry{n}")


def _e_relations(res, args):
    _arity(args, 1, "relations_extension")
    G = res.group(args[0])
    _need(G, gr.FreeProduct, "relations_extension")
    R, pi = sg.relation_subgroup(G)
    return Extension(G, R, pi.codomain, pi, name=f"relations({G})")


def _e_dilation(res, args):
    _arity(args, 1, "dilation_extension")
    G = res.group(args[0])
    _need(G, gr.AffineRationals, "dilation_extension")
    Q = gr.PositiveRationals(G.primes)
    pr = gr.Homomorphism(G, Q, func=lambda x: x[1], name="pr")
    return Extension(G, sg.Translations(G), Q, pr, name="dilations")


def _e_split(res, args):
    _arity(args, 1, "split")
    E = res.group(args[0])
    _need(E, gr.SemidirectProduct, "split")
    return semidirect_extension(E)


EXTENSION_BUILDERS = {"carry": _e_carry, "relations_extension": _e_relations,
                      "dilation_extension": _e_dilation, "split": _e_split}


def _coefficient(text):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise _Err(f"bad coefficient {text.strip()!r}") from None


def _function(res, kind, pair, body):
    G = pair.G
    vals = {}
    for term in [t for t in body.split("|") if t.strip()]:
        if ":" not in term:
            raise _Err(f"expected 'element: coefficient', got {term.strip()!r}")
        g, c = term.rsplit(":", 1)
        x = res.elem(G, g)
        vals[x] = vals.get(x, 0) + _coefficient(c)
    cls = HeckeElement if kind == "hecke" else CosetVector
    try:
        return cls.from_elements(pair, vals)
    except DomainError as exc:
        raise _Err(str(exc)) from None


# ---------------------------------------------------------------------------
# the parser
# ---------------------------------------------------------------------------
def _expand(text):
    """Splice ``use`` snippets in; returns ``[(line_no, text, origin)]``."""
    out, used = [], set()
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        m = _USE.match(line)
        if m and m.group(1) in CATALOG:
            if m.group(1) not in used:
                used.add(m.group(1))
                for sub in CATALOG[m.group(1)].strip("\n").splitlines():
                    out.append((no, sub.strip(), m.group(1)))
            continue
        out.append((no, line, None))
    return out


def parse_config(text, tasks=None):
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    if tasks is None:
        from .tasks import TASKS as tasks
    cfg = ExperimentConfig(text=text)
    res = Resolver(cfg)
    errors = []
    for no, line, origin in _expand(text):
        if not line:
            continue
        where = f"line {no}" + (f" (from {origin})" if origin else "")
        try:
            if m := _SET.match(line):
                key, val = m.groups()
                setattr(cfg, key, res.int(val))
                if key == "budget" and cfg.budget <= 0:
                    raise _Err("budget must be positive")
            elif m := _USE.match(line):
                raise _Err(f"unknown catalog entry {m.group(1)!r}")
            elif m := _VEC.match(line):
                kind, name, pname, body = m.groups()
                _fresh(cfg, name)
                pair = res.ref(pname, "pair")
                cfg.decls[name] = Decl(kind, name, _function(res, kind, pair, body), no, line)
            elif m := _DECL.match(line):
                kind, name, expr = m.groups()
                _fresh(cfg, name)
                cfg.decls[name] = Decl(kind, name, _declare(res, kind, name, expr), no, line)
            elif m := _TASK.match(line):
                kind, rest = m.groups()
                cfg.tasks.append(_task(cfg, res, tasks, kind, rest, no))
            else:
                raise _Err(f"cannot parse {line!r}")
        except _Err as exc:
            errors.append(f"{where}: {exc}")
        except (DomainError, ValueError, TypeError) as exc:
            errors.append(f"{where}: {exc}")
    if errors:
        raise ConfigError(errors)
    return cfg


def _fresh(cfg, name):
    if name in cfg.decls:
        raise _Err(f"{name!r} already declared on line {cfg.decls[name].line}")


def _declare(res, kind, name, expr):
    if kind == "group":
        G = res.group(expr)
        return G
    if kind == "subgroup":
        H = res.subgroup(expr)
        H.name = name
        return H
    if kind == "pair":
        inner = gr._strip_parens(expr)
        parts = gr._split_top(inner) if inner is not None else []
        if len(parts) != 2:
            raise _Err("pair takes (GROUP, SUBGROUP)")
        G, H = res.group(parts[0]), res.subgroup(parts[1])
        if H.parent != G:
            raise _Err(f"type mismatch: {H.name} is not a subgroup of {G}")
        return HeckePair(G, H, name=name, budget=res.cfg.budget)
    if kind == "length":
        L = res.length(expr)
        L.name = name
        return L
    if kind == "hom":
        phi = res.hom(expr)
        phi.name = name
        return phi
    if kind == "extension":
        ext = res.extension(expr)
        ext.name = name
        return ext
    raise _Err(f"unknown declaration {kind!r}")


def _task(cfg, res, tasks, kind, rest, no):
    if kind not in tasks:
        raise _Err(f"unknown task {kind!r}; known: {', '.join(sorted(tasks))}")
    try:
        tokens = shlex.split(rest)
    except ValueError as exc:
        raise _Err(str(exc)) from None
    raw = {}
    for tok in tokens:
        if "=" not in tok:
            raise _Err(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        raw[k] = v
    params = tasks[kind].prepare(cfg, res, raw)
    return TaskSpec(kind, params, raw, no)
