"""The mod 2 Lambda algebra.

Monomials are tuples of generator indices, ``(4, 7, 11, 15, 15)`` for
``l4 l7 l11 l15 l15``.  A monomial is admissible when ``2*i[k] >= i[k+1]``
for every adjacent pair; the admissible monomials form an additive basis.

Generator ``l_i`` sits in bidegree ``(s, t) = (1, i + 1)``.  Inadmissible
pairs are rewritten with

    l_i l_{2i+1+n} = sum_{k>=0} C(n-1-k, k) l_{i+n-k} l_{2i+1+k}     (n >= 0)

and the differential on generators is

    d(l_n) = sum_{j>=1} C(n-j, j) l_{n-j} l_{j-1},

extended by the Leibniz rule.  Binomials are taken mod 2 and vanish when any
argument is negative or the lower one exceeds the upper one.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, NamedTuple

Monomial = tuple[int, ...]

DEFAULT_STEP_BUDGET = 10_000_000


class RewriteBudgetExceeded(RuntimeError):
    """Raised when normalising a word takes more pair rewrites than allowed."""


class Bidegree(NamedTuple):
    s: int
    t: int

    @property
    def stem(self) -> int:
        return self.t - self.s

    def __add__(self, other):
        return Bidegree(self.s + other[0], self.t + other[1])


def binom2(a: int, b: int) -> int:
    if a < 0 or b < 0 or b > a:
        return 0
    return 1 if a & b == b else 0


def bidegree_of(m: Monomial) -> Bidegree:
    return Bidegree(len(m), sum(m) + len(m))


def is_admissible(m: Monomial) -> bool:
    return all(2 * m[k] >= m[k + 1] for k in range(len(m) - 1))


def relation(i: int, j: int) -> list[tuple[int, int]]:
    """Admissible pairs whose sum equals the inadmissible ``l_i l_j``."""
    n = j - 2 * i - 1
    return [(i + n - k, 2 * i + 1 + k) for k in range(n) if binom2(n - 1 - k, k)]


def generator_differential(n: int) -> list[tuple[int, int]]:
    return [(n - j, j - 1) for j in range(1, n // 2 + 1) if binom2(n - j, j)]


# ---------------------------------------------------------------------------
# basis enumeration

_basis_cache: dict[tuple[int, int], tuple[Monomial, ...]] = {}


def admissible_basis(s: int, t: int) -> tuple[Monomial, ...]:
    """Admissible monomials of bidegree (s, t) in lexicographic order."""
    key = (s, t)
    hit = _basis_cache.get(key)
    if hit is not None:
        return hit
    if s == 0:
        out: tuple[Monomial, ...] = ((),) if t == 0 else ()
    elif s == 1:
        out = ((t - 1,),) if t >= 1 else ()
    else:
        acc: list[Monomial] = []
        # first letter f leaves weight t - f - 1 for s - 1 letters, each >= 1
        for f in range(0, t - s + 1):
            rest = admissible_basis(s - 1, t - f - 1)
            if not rest:
                continue
            # rest is sorted, so the admissible continuations form a prefix
            cut = bisect_right(rest, (2 * f, float("inf")))
            acc.extend((f,) + r for r in rest[:cut])
        out = tuple(acc)
    _basis_cache[key] = out
    return out


# ---------------------------------------------------------------------------
# normal form

class _Rewriter:
    """Memoised right-insertion normaliser with a per-call step budget."""

    def __init__(self):
        self.append_cache: dict[tuple[Monomial, int], frozenset[Monomial]] = {}
        self.steps = 0
        self.budget = DEFAULT_STEP_BUDGET

    def append(self, m: Monomial, x: int) -> frozenset[Monomial]:
        """Normal form of ``m * l_x`` for admissible ``m``."""
        if not m or 2 * m[-1] >= x:
            return frozenset((m + (x,),))
        key = (m, x)
        hit = self.append_cache.get(key)
        if hit is not None:
            return hit
        self.steps += 1
        if self.steps > self.budget:
            raise RewriteBudgetExceeded(f"more than {self.budget} pair rewrites")
        out: set[Monomial] = set()
        head = m[:-1]
        for a, b in relation(m[-1], x):
            for p in self.append(head, a):
                out.symmetric_difference_update(self.append(p, b))
        result = frozenset(out)
        self.append_cache[key] = result
        return result

    def extend(self, terms: Iterable[Monomial], letters: Iterable[int]) -> set[Monomial]:
        current = set(terms)
        for x in letters:
            nxt: set[Monomial] = set()
            for m in current:
                nxt.symmetric_difference_update(self.append(m, x))
            current = nxt
            if not current:
                break
        return current

    def normal_form(self, word: Monomial) -> set[Monomial]:
        # longest admissible prefix goes in untouched
        k = 1
        while k < len(word) and 2 * word[k - 1] >= word[k]:
            k += 1
        return self.extend((word[:k],), word[k:])


_rewriter = _Rewriter()
_diff_cache: dict[Monomial, frozenset[Monomial]] = {}


def clear_caches() -> None:
    _rewriter.append_cache.clear()
    _diff_cache.clear()
    _basis_cache.clear()


def _run(fn, budget):
    _rewriter.steps = 0
    _rewriter.budget = DEFAULT_STEP_BUDGET if budget is None else budget
    try:
        return fn()
    finally:
        _rewriter.budget = DEFAULT_STEP_BUDGET


def rewrite(m: Monomial, budget: int | None = None) -> LambdaElement:
    """Admissible normal form of an arbitrary word."""
    m = tuple(m)
    terms = _run(lambda: _rewriter.normal_form(m), budget)
    return LambdaElement(bidegree_of(m), terms)


def _monomial_differential(m: Monomial) -> frozenset[Monomial]:
    hit = _diff_cache.get(m)
    if hit is not None:
        return hit
    out: set[Monomial] = set()
    for k, n in enumerate(m):
        pairs = generator_differential(n)
        if not pairs:
            continue
        prefix = m[:k]
        suffix = m[k + 1:]
        for a, b in pairs:
            out.symmetric_difference_update(_rewriter.extend((prefix,), (a, b) + suffix))
    result = frozenset(out)
    _diff_cache[m] = result
    return result


def monomial_differential(m: Monomial) -> frozenset[Monomial]:
    """d of an admissible monomial, as a set of admissible monomials."""
    return _monomial_differential(tuple(m))


# ---------------------------------------------------------------------------
# elements

@dataclass(frozen=True)
class LambdaElement:
    """An F2 sum of admissible monomials of a single bidegree.

    ``terms`` is stored sorted lexicographically, so ``terms[0]`` is the
    lexicographically least term.
    """

    bidegree: Bidegree
    terms: tuple[Monomial, ...] = ()

    def __init__(self, bidegree, terms: Iterable[Monomial] = ()):
        object.__setattr__(self, "bidegree", Bidegree(*bidegree))
        acc: set[Monomial] = set()
        for m in terms:
            acc.symmetric_difference_update({tuple(m)})
        for m in acc:
            if bidegree_of(m) != self.bidegree:
                raise ValueError(f"term {format_monomial(m)} not in bidegree {tuple(self.bidegree)}")
        object.__setattr__(self, "terms", tuple(sorted(acc)))

    @classmethod
    def monomial(cls, m: Iterable[int]) -> LambdaElement:
        m = tuple(m)
        if not is_admissible(m):
            return rewrite(m)
        return cls(bidegree_of(m), (m,))

    @classmethod
    def generator(cls, i: int) -> LambdaElement:
        return cls(Bidegree(1, i + 1), ((i,),))

    @classmethod
    def one(cls) -> LambdaElement:
        return cls(Bidegree(0, 0), ((),))

    @classmethod
    def zero(cls, s: int, t: int) -> LambdaElement:
        return cls(Bidegree(s, t), ())

    @property
    def s(self) -> int:
        return self.bidegree.s

    @property
    def t(self) -> int:
        return self.bidegree.t

    @property
    def stem(self) -> int:
        return self.bidegree.stem

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: LambdaElement) -> LambdaElement:
        if other.bidegree != self.bidegree:
            if not other.terms:
                return self
            if not self.terms:
                return other
            raise ValueError("cannot add elements of different bidegrees")
        return LambdaElement(self.bidegree, self.terms + other.terms)

    __sub__ = __add__

    def __mul__(self, other: LambdaElement) -> LambdaElement:
        return product(self, other)

    def __pow__(self, k: int) -> LambdaElement:
        out = LambdaElement.one()
        for _ in range(k):
            out = product(out, self)
        return out

    def leading_term(self, convention: str = "lex-least") -> Monomial | None:
        if not self.terms:
            return None
        return self.terms[-1] if convention == "lex-greatest" else self.terms[0]

    def differential(self) -> LambdaElement:
        return differential(self)

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(format_monomial(m) for m in self.terms)

    def __repr__(self):
        return f"LambdaElement({tuple(self.bidegree)}, {str(self)!r})"


def product(a: LambdaElement, b: LambdaElement, budget: int | None = None) -> LambdaElement:
    bideg = a.bidegree + b.bidegree

    def run():
        out: set[Monomial] = set()
        for ma in a.terms:
            for mb in b.terms:
                out.symmetric_difference_update(_rewriter.extend((ma,), mb))
        return out

    return LambdaElement(bideg, _run(run, budget))


def differential(a: LambdaElement) -> LambdaElement:
    out: set[Monomial] = set()
    for m in a.terms:
        out.symmetric_difference_update(_monomial_differential(m))
    return LambdaElement(Bidegree(a.s + 1, a.t), out)


# ---------------------------------------------------------------------------
# text form

_TOKEN = re.compile(r"l(\d+)")


def format_monomial(m: Monomial) -> str:
    return " ".join(f"l{i}" for i in m) if m else "1"


def parse_monomial(text: str) -> Monomial:
    text = text.strip()
    if text == "1":
        return ()
    parts = text.split()
    out = []
    for p in parts:
        match = _TOKEN.fullmatch(p)
        if not match:
            raise ValueError(f"bad lambda generator {p!r} in {text!r}")
        out.append(int(match.group(1)))
    return tuple(out)


def parse_element(text: str) -> LambdaElement:
    """Parse ``"l1 l0 + l2 l1"``; inadmissible words are normalised."""
    pieces = [p for p in text.split("+")]
    monos = [parse_monomial(p) for p in pieces]
    if not monos:
        raise ValueError("empty element")
    bideg = bidegree_of(monos[0])
    out = LambdaElement.zero(*bideg)
    for m in monos:
        if bidegree_of(m) != bideg:
            raise ValueError(f"inhomogeneous element {text!r}")
        out = out + LambdaElement.monomial(m)
    return out
