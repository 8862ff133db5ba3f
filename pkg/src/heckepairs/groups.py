"""Concrete groups with exact arithmetic and unique normal forms.

Every element is a plain hashable payload whose value *is* its canonical
form, so equality of payloads is equality of group elements:

========================  =====================================================
family                    payload
========================  =====================================================
``Cyclic(n)``             ``int`` (``n == 0`` is the integers)
``FreeGroup(k)``          reduced ``tuple`` of nonzero ints, ``-i`` inverts ``i``
``FreeProduct(fs)``       alternating ``tuple`` of ``(factor, element)``
``DirectProduct(fs)``     ``tuple`` of factor payloads
``SemidirectProduct``     ``(n, q)``
``PermutationGroup``      image ``tuple`` (0-based), ``(a*b)[i] = a[b[i]]``
``AffineRationals``       ``(b, a)`` Fractions, the matrix ``[[a, b], [0, 1]]``
``PositiveRationals``     positive ``Fraction``
========================  =====================================================

Generator order is fixed per family and documented on each class; the letter
order used by breadth-first searches is ``s1, s1^-1, s2, s2^-1, ...`` with
inverses dropped when ``s == s^-1``.  Shortlex means: shorter words first,
ties broken by that letter order.
"""
from __future__ import annotations

import itertools
import random
import re
from collections import deque
from fractions import Fraction
from functools import cached_property

from .errors import BudgetExceeded, DomainError

_LETTERS = "abcdefghijklmnopqrstuvwxyz"
_NAME_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")
_CHAR_RE = re.compile(r"([A-Za-z])(?:\^(-?\d+))?")


def _default_names(count):
    if count <= len(_LETTERS):
        return tuple(_LETTERS[:count])
    return tuple(f"g{i}" for i in range(count))


def _split_top(text, sep=","):
    """Split on ``sep`` at bracket depth zero."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def _strip_parens(text):
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        return text[1:-1]
    return None


def _fraction(text):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational number: {text!r}") from exc


class Group:
    """Base class: a group with decidable word problem and finite generators.

    Subclasses implement ``identity``, ``gens``, ``contains``, ``_mul`` and
    ``_inv``.  The public ``mul``/``inv`` validate operands; hot loops inside
    the package call the underscored versions on already-validated payloads.
    """

    name = "group"
    #: number of elements, or None when infinite
    order = None

    identity = None

    @property
    def gens(self):
        raise NotImplementedError

    def contains(self, x):
        raise NotImplementedError

    def _mul(self, a, b):
        raise NotImplementedError

    def _inv(self, a):
        raise NotImplementedError

    # -- validated group law ---------------------------------------------
    def check(self, x):
        if not self.contains(x):
            raise DomainError(f"{x!r} is not an element of {self}")
        return x

    def mul(self, a, b):
        self.check(a)
        self.check(b)
        return self._mul(a, b)

    def inv(self, a):
        return self._inv(self.check(a))

    def canonical(self, x):
        return self.check(x)

    def product(self, xs):
        out = self.identity
        for x in xs:
            out = self._mul(out, x)
        return out

    def power(self, x, k):
        if k < 0:
            x, k = self._inv(x), -k
        out, base = self.identity, x
        while k:
            if k & 1:
                out = self._mul(out, base)
            base = self._mul(base, base)
            k >>= 1
        return out

    def conj(self, g, x):
        """``g x g^-1``."""
        return self._mul(self._mul(g, x), self._inv(g))

    def commutator(self, a, b):
        """``a b a^-1 b^-1``."""
        return self._mul(self._mul(a, b), self._mul(self._inv(a), self._inv(b)))

    def is_identity(self, x):
        return x == self.identity

    # -- generators and words ----------------------------------------------
    @cached_property
    def gen_names(self):
        return _default_names(len(self.gens))

    @cached_property
    def letters(self):
        """``(gen_index, sign, element)`` in the documented BFS order."""
        out = []
        for i, g in enumerate(self.gens):
            out.append((i, 1, g))
            gi = self._inv(g)
            if gi != g:
                out.append((i, -1, gi))
        return tuple(out)

    def eval_word(self, word):
        """Evaluate a sequence of ``(gen_index, exponent)`` pairs."""
        out = self.identity
        for i, e in word:
            out = self._mul(out, self.power(self.gens[i], e))
        return out

    def as_word(self, x):
        """Some word ``[(gen_index, +-1), ...]`` evaluating to ``x``."""
        return list(self._word_index.word(self.check(x)))

    def word_length(self, x):
        """Closed-form word length, or None when only BFS can tell."""
        return None

    @cached_property
    def _word_index(self):
        return WordIndex(self)

    # -- text ----------------------------------------------------------------
    def format(self, x):
        return self.format_word(self.as_word(x))

    def format_word(self, word):
        if not word:
            return "e"
        runs = []
        for i, e in word:
            if runs and runs[-1][0] == i:
                runs[-1][1] += e
            else:
                runs.append([i, e])
        out = []
        for i, e in runs:
            if e == 0:
                continue
            name = self.gen_names[i]
            out.append(name if e == 1 else f"{name}^{e}")
        sep = "" if all(len(n) == 1 for n in self.gen_names) else "*"
        return sep.join(out) or "e"

    def _parse_literal(self, text):
        return None

    def parse(self, text):
        """Parse a payload literal, or a word over the generator names."""
        text = str(text).strip()
        lit = self._parse_literal(text)
        if lit is not None:
            return self.check(lit)
        return self.parse_word(text)

    def parse_word(self, text):
        text = text.strip()
        if text in ("e", "1", ""):
            return self.identity
        names = {n: i for i, n in enumerate(self.gen_names)}
        word = []
        if all(len(n) == 1 for n in names):
            stripped = re.sub(r"[\s*]", "", text)
            pos = 0
            for m in _CHAR_RE.finditer(stripped):
                if m.start() != pos:
                    raise DomainError(f"cannot parse word {text!r} in {self}")
                pos = m.end()
                word.append(self._resolve(m.group(1), m.group(2), names, text))
            if pos != len(stripped):
                raise DomainError(f"cannot parse word {text!r} in {self}")
        else:
            for tok in re.split(r"[\s*]+", text):
                m = _NAME_RE.match(tok)
                if not m:
                    raise DomainError(f"cannot parse word {text!r} in {self}")
                word.append(self._resolve(m.group(1), m.group(2), names, text))
        return self.eval_word(word)

    def _resolve(self, name, exp, names, text):
        e = int(exp) if exp is not None else 1
        if name in names:
            return names[name], e
        if name.lower() in names and name.upper() == name:
            return names[name.lower()], -e
        raise DomainError(f"unknown generator {name!r} in {text!r} for {self}")

    # -- sampling --------------------------------------------------------------
    def random_word(self, rng, length):
        letters = self.letters
        if not letters:
            return self.identity
        out = self.identity
        for _ in range(length):
            out = self._mul(out, rng.choice(letters)[2])
        return out

    def sample(self, rng, count, max_length=4):
        return [self.random_word(rng, rng.randint(0, max_length)) for _ in range(count)]

    def elements(self):
        if self.order is None:
            raise DomainError(f"{self} is infinite")
        return self._word_index.all_elements()

    def sort_key(self, x):
        """Deterministic payload order used only to break shortlex ties."""
        return repr(x)

    def _signature(self):
        # structural identity; families override so equal constructions compare equal
        return id(self)

    def __eq__(self, other):
        return self is other or (type(other) is type(self) and other._signature() == self._signature())

    def __hash__(self):
        return hash((type(self).__name__, self._signature()))

    def __repr__(self):
        return self.name


class WordIndex:
    """Breadth-first shortlex word index over group elements (append-only)."""

    def __init__(self, group, budget=10 ** 6):
        self.group = group
        self.budget = budget
        e = group.identity
        self.words = {e: ()}
        self.frontier = [e]
        self.radius = 0

    def _grow(self):
        g = self.group
        nxt = []
        for x in self.frontier:
            wx = self.words[x]
            for i, s, el in g.letters:
                y = g._mul(x, el)
                if y not in self.words:
                    self.words[y] = wx + ((i, s),)
                    nxt.append(y)
        self.frontier = nxt
        self.radius += 1
        if len(self.words) > self.budget:
            raise BudgetExceeded(f"word index of {g} exceeded {self.budget} elements")

    def word(self, x):
        while x not in self.words:
            if not self.frontier:
                raise DomainError(f"{x!r} is not reachable from the generators of {self.group}")
            self._grow()
        return self.words[x]

    def length(self, x):
        return len(self.word(x))

    def all_elements(self):
        while self.frontier:
            self._grow()
        return list(self.words)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------
class Cyclic(Group):
    """Cyclic group of order ``n``; ``n == 0`` gives the integers.

    One generator ``t = 1``.  Payloads are ints, reduced into ``[0, n)``.
    """

    def _signature(self):
        return self.n

    def __init__(self, n=0):
        if n < 0:
            raise DomainError("cyclic order must be >= 0")
        self.n = n
        self.order = n or None
        self.name = "Z" if n == 0 else f"Z/{n}"

    identity = 0

    @cached_property
    def gens(self):
        return () if self.n == 1 else (1,)

    @cached_property
    def gen_names(self):
        return ("t",)

    def contains(self, x):
        if type(x) is not int:
            return False
        return self.n == 0 or 0 <= x < self.n

    def _mul(self, a, b):
        return (a + b) % self.n if self.n else a + b

    def _inv(self, a):
        return (-a) % self.n if self.n else -a

    def power(self, x, k):
        return (x * k) % self.n if self.n else x * k

    def word_length(self, x):
        if self.n == 0:
            return abs(x)
        return min(x, self.n - x)

    def as_word(self, x):
        self.check(x)
        if self.n and x > self.n // 2:
            return [(0, -1)] * (self.n - x)
        if self.n == 0 and x < 0:
            return [(0, -1)] * (-x)
        return [(0, 1)] * x

    def format(self, x):
        return str(x)

    def _parse_literal(self, text):
        if re.fullmatch(r"-?\d+", text):
            k = int(text)
            return k % self.n if self.n else k
        return None

    def sort_key(self, x):
        return (abs(x), x < 0, x)


def integers():
    return Cyclic(0)


class FreeGroup(Group):
    """Free group on ``rank`` letters ``a, b, ...``; ``A`` is ``a^-1``."""

    def _signature(self):
        return self.rank

    def __init__(self, rank):
        self.rank = rank
        self.name = f"F{rank}"

    identity = ()

    @cached_property
    def gens(self):
        return tuple((i + 1,) for i in range(self.rank))

    def contains(self, x):
        if type(x) is not tuple:
            return False
        prev = None
        for l in x:
            if type(l) is not int or l == 0 or abs(l) > self.rank:
                return False
            if prev is not None and prev == -l:
                return False
            prev = l
        return True

    def _mul(self, a, b):
        if not a:
            return b
        res = list(a)
        for l in b:
            if res and res[-1] == -l:
                res.pop()
            else:
                res.append(l)
        return tuple(res)

    def _inv(self, a):
        return tuple(-l for l in reversed(a))

    def word_length(self, x):
        return len(x)

    def as_word(self, x):
        self.check(x)
        return [(abs(l) - 1, 1 if l > 0 else -1) for l in x]

    def sort_key(self, x):
        return (len(x), tuple((abs(l), l < 0) for l in x))


class FreeProduct(Group):
    """Free product of ``factors``.

    Generators are the factor generators in factor order, named ``a, b, ...``
    globally.  Payload: alternating tuple of ``(factor_index, element)`` with
    no identity syllables.
    """

    def _signature(self):
        return self.factors

    def __init__(self, factors):
        self.factors = tuple(factors)
        if len(self.factors) < 2:
            raise DomainError("a free product needs at least two factors")
        self.name = "*".join(f"({f})" if isinstance(f, (FreeProduct, DirectProduct)) else str(f)
                             for f in self.factors)
        offsets, k = [], 0
        for f in self.factors:
            offsets.append(k)
            k += len(f.gens)
        self._offsets = tuple(offsets)

    identity = ()

    @cached_property
    def gens(self):
        out = []
        for i, f in enumerate(self.factors):
            for g in f.gens:
                out.append(((i, g),) if g != f.identity else ())
        return tuple(out)

    def contains(self, x):
        if type(x) is not tuple:
            return False
        prev = None
        for syl in x:
            if type(syl) is not tuple or len(syl) != 2:
                return False
            i, y = syl
            if type(i) is not int or not 0 <= i < len(self.factors):
                return False
            f = self.factors[i]
            if i == prev or y == f.identity or not f.contains(y):
                return False
            prev = i
        return True

    def _mul(self, a, b):
        if not a:
            return b
        if not b:
            return a
        res = list(a)
        for i, y in b:
            if res and res[-1][0] == i:
                z = self.factors[i]._mul(res[-1][1], y)
                res.pop()
                if z != self.factors[i].identity:
                    res.append((i, z))
            else:
                res.append((i, y))
        return tuple(res)

    def _inv(self, a):
        return tuple((i, self.factors[i]._inv(y)) for i, y in reversed(a))

    def letter(self, i, y):
        """The one-syllable element ``y`` of factor ``i``."""
        f = self.factors[i]
        f.check(y)
        return () if y == f.identity else ((i, y),)

    def word_length(self, x):
        total = 0
        for i, y in x:
            n = self.factors[i].word_length(y)
            if n is None:
                return None
            total += n
        return total

    def as_word(self, x):
        self.check(x)
        out = []
        for i, y in x:
            off = self._offsets[i]
            out.extend((off + j, e) for j, e in self.factors[i].as_word(y))
        return out

    def sort_key(self, x):
        return (len(x), tuple((i, self.factors[i].sort_key(y)) for i, y in x))


class DirectProduct(Group):
    """Direct product; generators are the factor generators embedded in order."""

    def _signature(self):
        return self.factors

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.name = " x ".join(f"({f})" if isinstance(f, (FreeProduct, DirectProduct)) else str(f)
                               for f in self.factors)
        orders = [f.order for f in self.factors]
        if all(o is not None for o in orders):
            o = 1
            for k in orders:
                o *= k
            self.order = o
        offsets, k = [], 0
        for f in self.factors:
            offsets.append(k)
            k += len(f.gens)
        self._offsets = tuple(offsets)

    @cached_property
    def identity(self):
        return tuple(f.identity for f in self.factors)

    @cached_property
    def gens(self):
        out = []
        for i, f in enumerate(self.factors):
            for g in f.gens:
                out.append(self.embed(i, g))
        return tuple(out)

    def embed(self, i, y):
        x = list(self.identity)
        x[i] = y
        return tuple(x)

    def contains(self, x):
        return (type(x) is tuple and len(x) == len(self.factors)
                and all(f.contains(y) for f, y in zip(self.factors, x)))

    def _mul(self, a, b):
        return tuple(f._mul(x, y) for f, x, y in zip(self.factors, a, b))

    def _inv(self, a):
        return tuple(f._inv(x) for f, x in zip(self.factors, a))

    def word_length(self, x):
        total = 0
        for f, y in zip(self.factors, x):
            n = f.word_length(y)
            if n is None:
                return None
            total += n
        return total

    def as_word(self, x):
        self.check(x)
        out = []
        for i, (f, y) in enumerate(zip(self.factors, x)):
            off = self._offsets[i]
            out.extend((off + j, e) for j, e in f.as_word(y))
        return out

    def format(self, x):
        return "(" + ", ".join(f.format(y) for f, y in zip(self.factors, x)) + ")"

    def _parse_literal(self, text):
        inner = _strip_parens(text)
        if inner is None:
            return None
        parts = _split_top(inner)
        if len(parts) != len(self.factors):
            return None
        return tuple(f.parse(p) for f, p in zip(self.factors, parts))

    def sort_key(self, x):
        return tuple(f.sort_key(y) for f, y in zip(self.factors, x))


class PermutationGroup(Group):
    """Permutation group generated by image tuples on ``{0, ..., degree-1}``.

    Product convention: ``(a*b)[i] = a[b[i]]`` (apply ``b`` first).  The whole
    group is enumerated at construction, so keep degrees small.
    """

    def _signature(self):
        return self._gens

    def __init__(self, generators, name=None, max_order=50000):
        gens = tuple(tuple(g) for g in generators)
        if not gens:
            raise DomainError("need at least one generator")
        self.degree = len(gens[0])
        for g in gens:
            if len(g) != self.degree or sorted(g) != list(range(self.degree)):
                raise DomainError(f"not a permutation of degree {self.degree}: {g}")
        self._gens = gens
        self.name = name or f"Perm({self.degree})"
        self._elements = None
        self._word_index_obj = WordIndex(self, budget=max_order)
        self._elements = frozenset(self._word_index_obj.all_elements())
        self.order = len(self._elements)

    @property
    def identity(self):
        return tuple(range(self.degree))

    @property
    def gens(self):
        return self._gens

    @cached_property
    def _word_index(self):
        return self._word_index_obj

    def contains(self, x):
        if self._elements is None:
            return type(x) is tuple and len(x) == self.degree
        return x in self._elements

    def _mul(self, a, b):
        return tuple(a[i] for i in b)

    def _inv(self, a):
        out = [0] * len(a)
        for i, j in enumerate(a):
            out[j] = i
        return tuple(out)

    def word_length(self, x):
        return self._word_index.length(self.check(x))

    def cycle(self, *points):
        """The cyclic permutation ``(p0 p1 ...)``."""
        img = list(range(self.degree))
        for k, p in enumerate(points):
            img[p] = points[(k + 1) % len(points)]
        return self.check(tuple(img))

    def _parse_literal(self, text):
        t = text.strip()
        if t.startswith("[") and t.endswith("]"):
            return tuple(int(v) for v in t[1:-1].replace(",", " ").split())
        if t.startswith("("):
            out = self.identity
            for cyc in re.findall(r"\(([^()]*)\)", t):
                pts = [int(v) for v in cyc.replace(",", " ").split()]
                if pts:
                    img = list(range(self.degree))
                    for k, p in enumerate(pts):
                        img[p] = pts[(k + 1) % len(pts)]
                    out = self._mul(out, tuple(img))
            return out
        return None

    def format(self, x):
        return "[" + ",".join(map(str, x)) + "]"

    def sort_key(self, x):
        return x


def symmetric(n):
    """``S_n`` generated by the adjacent transpositions ``(0 1), (1 2), ...``."""
    gens = []
    for i in range(n - 1):
        img = list(range(n))
        img[i], img[i + 1] = img[i + 1], img[i]
        gens.append(tuple(img))
    if not gens:
        gens = [tuple(range(n))]
    return PermutationGroup(gens, name=f"S{n}")


def _factor_over(q, primes):
    """Exponent vector of a positive rational over ``primes`` or None."""
    exps = []
    num, den = q.numerator, q.denominator
    if num <= 0:
        return None
    for p in primes:
        e = 0
        while num % p == 0:
            num //= p
            e += 1
        while den % p == 0:
            den //= p
            e -= 1
        exps.append(e)
    if num != 1 or den != 1:
        return None
    return exps


def _smooth(n, primes):
    for p in primes:
        while n % p == 0:
            n //= p
    return n == 1


class AffineRationals(Group):
    """``Z[1/S] x| <S>`` inside ``Q x| Q+*`` for a finite prime set ``S``.

    Element ``(b, a)`` is the matrix ``[[a, b], [0, 1]]``, so
    ``(b1, a1)(b2, a2) = (b1 + a1*b2, a1*a2)``.  Generators in order:
    ``(1, 1)`` then ``(0, p)`` for each prime.  The full group is not finitely
    generated; the prime set fixes the finitely generated piece explored.
    """

    def _signature(self):
        return self.primes

    def __init__(self, primes=(2, 3, 5)):
        self.primes = tuple(int(p) for p in primes)
        self.name = "Aff(Q)[" + ",".join(map(str, self.primes)) + "]"

    identity = (Fraction(0), Fraction(1))

    @cached_property
    def gens(self):
        return ((Fraction(1), Fraction(1)),) + tuple((Fraction(0), Fraction(p)) for p in self.primes)

    @cached_property
    def gen_names(self):
        return ("t",) + tuple(f"m{p}" for p in self.primes)

    def contains(self, x):
        if type(x) is not tuple or len(x) != 2:
            return False
        b, a = x
        if not all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in x):
            return False
        if a <= 0:
            return False
        b, a = Fraction(b), Fraction(a)
        return _factor_over(a, self.primes) is not None and _smooth(b.denominator, self.primes)

    def canonical(self, x):
        self.check(x)
        return (Fraction(x[0]), Fraction(x[1]))

    def _mul(self, x, y):
        return (x[0] + x[1] * y[0], x[1] * y[1])

    def _inv(self, x):
        return (-x[0] / x[1], 1 / x[1])

    def as_word(self, x):
        b, a = self.canonical(x)
        word = []
        d = b.denominator
        d_exps = _factor_over(Fraction(d), self.primes)
        for i, e in enumerate(d_exps):
            word.extend([(i + 1, -1)] * e)
        m = b.numerator
        word.extend([(0, 1 if m > 0 else -1)] * abs(m))
        for i, e in enumerate(d_exps):
            word.extend([(i + 1, 1)] * e)
        for i, e in enumerate(_factor_over(a, self.primes)):
            word.extend([(i + 1, 1 if e > 0 else -1)] * abs(e))
        return word

    def word_length(self, x):
        return None

    def format(self, x):
        return f"({x[0]},{x[1]})"

    def _parse_literal(self, text):
        inner = _strip_parens(text)
        if inner is None:
            return None
        parts = _split_top(inner)
        if len(parts) != 2:
            return None
        return (_fraction(parts[0]), _fraction(parts[1]))

    def sort_key(self, x):
        return (abs(x[0]), x[0], x[1])


class PositiveRationals(Group):
    """Multiplicative group ``<S>`` of positive rationals generated by primes."""

    def _signature(self):
        return self.primes

    def __init__(self, primes=(2, 3, 5)):
        self.primes = tuple(int(p) for p in primes)
        self.name = "Q+*[" + ",".join(map(str, self.primes)) + "]"

    identity = Fraction(1)

    @cached_property
    def gens(self):
        return tuple(Fraction(p) for p in self.primes)

    @cached_property
    def gen_names(self):
        return tuple(f"m{p}" for p in self.primes)

    def contains(self, x):
        if not isinstance(x, (int, Fraction)) or isinstance(x, bool):
            return False
        return x > 0 and _factor_over(Fraction(x), self.primes) is not None

    def canonical(self, x):
        return Fraction(self.check(x))

    def _mul(self, a, b):
        return a * b

    def _inv(self, a):
        return 1 / Fraction(a)

    def as_word(self, x):
        word = []
        for i, e in enumerate(_factor_over(Fraction(self.check(x)), self.primes)):
            word.extend([(i, 1 if e > 0 else -1)] * abs(e))
        return word

    def word_length(self, x):
        return sum(abs(e) for e in _factor_over(Fraction(self.check(x)), self.primes))

    def format(self, x):
        return str(x)

    def _parse_literal(self, text):
        if re.fullmatch(r"\d+(/\d+)?", text):
            return _fraction(text)
        return None

    def sort_key(self, x):
        return (x.numerator * x.denominator, x)


class SemidirectProduct(Group):
    """``N x| Q`` with ``(n1, q1)(n2, q2) = (n1 * phi(q1)(n2), q1 q2)``.

    ``images[j]`` lists the images of the generators of ``N`` under the
    automorphism attached to the ``j``-th generator of ``Q``.  Inverse
    automorphisms come from ``inverse_images`` when given, otherwise from the
    finite order of each automorphism.  The homomorphism property of each
    automorphism and of the action is sample-checked at construction.
    """

    def __init__(self, N, Q, images, inverse_images=None, max_aut_order=64, check_samples=64, seed=0):
        self.N, self.Q = N, Q
        self.name = f"({N}) x| ({Q})"
        if len(images) != len(Q.gens):
            raise DomainError("need one automorphism table per generator of Q")
        self._images = [tuple(N.check(v) for v in row) for row in images]
        for row in self._images:
            if len(row) != len(N.gens):
                raise DomainError("each automorphism table must list images of every N generator")
        if inverse_images is not None:
            self._inv_images = [tuple(N.check(v) for v in row) for row in inverse_images]
        else:
            self._inv_images = [self._invert_table(row, max_aut_order) for row in self._images]
        self._aut_cache = {}
        if N.order and Q.order:
            self.order = N.order * Q.order
        self._sample_check(check_samples, seed)

    def _apply_table(self, table, n):
        out = self.N.identity
        for j, e in self.N.as_word(n):
            v = table[j]
            out = self.N._mul(out, v if e > 0 else self.N._inv(v))
        return out

    def _invert_table(self, row, max_order):
        gens = self.N.gens
        cur = list(row)
        prev = list(gens)
        for _ in range(max_order):
            if tuple(cur) == tuple(gens):
                return tuple(prev)
            prev = cur
            if any((self.N.word_length(v) or 0) > 10 ** 4 for v in cur):
                break
            cur = [self._apply_table(row, v) for v in cur]
        raise DomainError("automorphism has no small finite order; pass inverse_images")

    def _sample_check(self, count, seed):
        rng = random.Random(seed)
        N, Q = self.N, self.Q
        ns = N.sample(rng, count, 4)
        for row, irow in zip(self._images, self._inv_images):
            for a, b in zip(ns, ns[1:] + ns[:1]):
                if self._apply_table(row, N._mul(a, b)) != N._mul(self._apply_table(row, a), self._apply_table(row, b)):
                    raise DomainError("action table is not a homomorphism of N")
            for g in N.gens:
                if self._apply_table(row, self._apply_table(irow, g)) != g:
                    raise DomainError("inverse action table does not invert the action")
        qs = Q.sample(rng, min(count, 16), 3)
        for q1, q2 in zip(qs, qs[1:]):
            for n in ns[:8]:
                if self.act(q1, self.act(q2, n)) != self.act(Q._mul(q1, q2), n):
                    raise DomainError("action Q -> Aut(N) is not a homomorphism")

    def _aut(self, q):
        tab = self._aut_cache.get(q)
        if tab is None:
            tab = tuple(self.N.gens)
            for j, e in self.Q.as_word(q):
                row = self._images[j] if e > 0 else self._inv_images[j]
                # compose: tab_new(g) = tab(row(g))
                tab = tuple(self._apply_table(tab, v) for v in row)
            self._aut_cache[q] = tab
        return tab

    def act(self, q, n):
        """Image of ``n`` under the automorphism attached to ``q``."""
        return self._apply_table(self._aut(q), n)

    @cached_property
    def identity(self):
        return (self.N.identity, self.Q.identity)

    @cached_property
    def gens(self):
        return (tuple((g, self.Q.identity) for g in self.N.gens)
                + tuple((self.N.identity, g) for g in self.Q.gens))

    def contains(self, x):
        return type(x) is tuple and len(x) == 2 and self.N.contains(x[0]) and self.Q.contains(x[1])

    def _mul(self, a, b):
        return (self.N._mul(a[0], self.act(a[1], b[0])), self.Q._mul(a[1], b[1]))

    def _inv(self, a):
        qi = self.Q._inv(a[1])
        return (self.act(qi, self.N._inv(a[0])), qi)

    def as_word(self, x):
        self.check(x)
        k = len(self.N.gens)
        return list(self.N.as_word(x[0])) + [(k + j, e) for j, e in self.Q.as_word(x[1])]

    def format(self, x):
        return f"({self.N.format(x[0])}; {self.Q.format(x[1])})"

    def _parse_literal(self, text):
        inner = _strip_parens(text)
        if inner is None:
            return None
        parts = _split_top(inner, ";")
        if len(parts) != 2:
            return None
        return (self.N.parse(parts[0]), self.Q.parse(parts[1]))

    def sort_key(self, x):
        return (self.N.sort_key(x[0]), self.Q.sort_key(x[1]))


def free_abelian(rank):
    """``Z^rank`` as a direct product, payload an exact integer vector."""
    return DirectProduct([Cyclic(0)] * rank)


# ---------------------------------------------------------------------------
# homomorphisms and quotients
# ---------------------------------------------------------------------------
class Homomorphism:
    """Group homomorphism given by generator images (or a structural map).

    With ``images`` the image of ``g`` is obtained by substituting into the
    word returned by ``domain.as_word``; whether the images respect the
    relators of the domain is the caller's responsibility and can be
    sample-checked with :meth:`check`.  ``func`` overrides substitution for
    structural maps (projections, inclusions, conjugations); ``inverse``, if
    given, is used by :meth:`preimage` instead of lifting generators.
    """

    def __init__(self, domain, codomain, images=None, func=None, name="phi", inverse=None):
        self.domain, self.codomain, self.name = domain, codomain, name
        self.func = func
        self.inverse = inverse
        if images is None and func is None:
            raise DomainError("a homomorphism needs generator images or a function")
        if images is not None:
            images = list(images)
            if len(images) != len(domain.gens):
                missing = domain.gen_names[len(images):]
                raise DomainError(f"no image assigned to generator(s) {', '.join(missing)} of {domain}")
            self.images = tuple(codomain.check(v) for v in images)
        else:
            self.images = tuple(func(g) for g in domain.gens)
        self._cache = {}

    def __call__(self, g):
        out = self._cache.get(g)
        if out is None:
            self.domain.check(g)
            if self.func is not None:
                out = self.func(g)
            else:
                cod = self.codomain
                out = cod.identity
                for j, e in self.domain.as_word(g):
                    v = self.images[j]
                    out = cod._mul(out, v if e > 0 else cod._inv(v))
            if len(self._cache) < 200000:
                self._cache[g] = out
        return out

    apply = __call__

    def check(self, samples):
        """First sampled pair breaking ``phi(ab) = phi(a)phi(b)``, or None."""
        for a, b in samples:
            if self(self.domain._mul(a, b)) != self.codomain._mul(self(a), self(b)):
                return (a, b)
        return None

    def lift_generators(self, budget=20000):
        """A preimage for each codomain generator, by BFS in the domain."""
        want = {g: None for g in self.codomain.gens}
        idx = self.domain._word_index
        for x in itertools.chain([self.domain.identity], self.domain.gens):
            y = self(x)
            if y in want and want[y] is None:
                want[y] = x
        seen = 0
        while any(v is None for v in want.values()):
            if not idx.frontier or seen > budget:
                raise BudgetExceeded(f"could not lift the generators of {self.codomain} along {self.name}")
            idx._grow()
            for x in idx.frontier:
                y = self(x)
                if y in want and want[y] is None:
                    want[y] = x
            seen = len(idx.words)
        return [want[g] for g in self.codomain.gens]

    @cached_property
    def _lifts(self):
        return self.lift_generators()

    def preimage(self, y):
        """Some ``x`` with ``phi(x) = y`` (requires surjectivity on generators)."""
        if self.inverse is not None:
            return self.inverse(y)
        dom = self.domain
        out = dom.identity
        for j, e in self.codomain.as_word(y):
            v = self._lifts[j]
            out = dom._mul(out, v if e > 0 else dom._inv(v))
        return out

    def __repr__(self):
        return f"{self.name}: {self.domain} -> {self.codomain}"


def free_product_projection(fp, name="pi"):
    """The natural surjection ``A * B * ... -> A x B x ...``."""
    target = DirectProduct(fp.factors)

    def proj(x):
        out = list(target.identity)
        for i, y in x:
            out[i] = fp.factors[i]._mul(out[i], y)
        return tuple(out)

    return Homomorphism(fp, target, func=proj, name=name)


def reduction_mod(n, source=None, name=None):
    """``Z -> Z/n`` (or ``Z/m -> Z/n`` when ``n | m``)."""
    source = source or Cyclic(0)
    if source.n and source.n % n:
        raise DomainError(f"Z/{source.n} -> Z/{n} is not well defined")
    return Homomorphism(source, Cyclic(n), images=[1 % n], name=name or f"mod{n}")


def inner_automorphism(group, g, name=None):
    """``x -> g x g^-1``."""
    group.check(g)
    gi = group._inv(g)
    return Homomorphism(group, group, func=lambda x: group.conj(g, x), name=name or "Ad",
                        inverse=lambda y: group.conj(gi, y))
