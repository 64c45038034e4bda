"""Ext over the Steenrod algebra from the reduced cobar complex.

Independent check on the Lambda engine: it enumerates its own basis (tensor
words in monomials of the dual Steenrod algebra F2[xi_1, xi_2, ...]) and
uses its own differential, built from the Milnor coproduct

    psi(xi_n) = sum_{i=0..n} xi_{n-i}^(2^i) (x) xi_i.

Only the linear algebra is shared.  The complex grows very quickly with
``t``, so cells whose neighbouring cochain groups exceed ``max_cells`` are
skipped and reported rather than computed.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product as cartesian

from .f2 import Echelon

Mono = tuple[int, ...]  # exponents (r_1, r_2, ...) of xi_1, xi_2, ...

DEFAULT_MAX_CELLS = 40_000


def xi_degree(n: int) -> int:
    return (1 << n) - 1


def mono_degree(r: Mono) -> int:
    return sum(e * xi_degree(i + 1) for i, e in enumerate(r))


def _trim(r) -> Mono:
    r = list(r)
    while r and r[-1] == 0:
        r.pop()
    return tuple(r)


def _mul(a: Mono, b: Mono) -> Mono:
    n = max(len(a), len(b))
    return _trim((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def _xi_power(n: int, e: int) -> Mono:
    if n == 0 or e == 0:
        return ()
    r = [0] * n
    r[n - 1] = e
    return tuple(r)


@lru_cache(maxsize=None)
def monomial_basis(degree: int) -> tuple[Mono, ...]:
    """Monomials of the dual Steenrod algebra in a given degree, sorted."""
    out = []

    def rec(rest, k, acc):
        if k == 0:
            if rest == 0:
                out.append(_trim(acc))
            return
        w = xi_degree(k)
        for e in range(rest // w + 1):
            acc[k - 1] = e
            rec(rest - e * w, k - 1, acc)
        acc[k - 1] = 0

    top = 1
    while xi_degree(top + 1) <= degree:
        top += 1
    rec(degree, top, [0] * top)
    return tuple(sorted(set(out)))


Tensor = dict  # {(left, right): 1} with F2 coefficients


def _tensor_mul(x: frozenset, y: frozenset) -> frozenset:
    out: set = set()
    for (a1, b1) in x:
        for (a2, b2) in y:
            out.symmetric_difference_update({(_mul(a1, a2), _mul(b1, b2))})
    return frozenset(out)


@lru_cache(maxsize=None)
def _psi_xi_power(n: int, j: int) -> frozenset:
    """psi(xi_n)^(2^j) = sum_i xi_{n-i}^(2^(i+j)) (x) xi_i^(2^j)."""
    return frozenset((_xi_power(n - i, 1 << (i + j)), _xi_power(i, 1 << j)) for i in range(n + 1))


@lru_cache(maxsize=None)
def coproduct(r: Mono) -> frozenset:
    """psi(xi^R) as a set of (left, right) monomial pairs."""
    out = frozenset({((), ())})
    for i, e in enumerate(r):
        j = 0
        while e:
            if e & 1:
                out = _tensor_mul(out, _psi_xi_power(i + 1, j))
            e >>= 1
            j += 1
    return out


@lru_cache(maxsize=None)
def reduced_coproduct(r: Mono) -> tuple[tuple[Mono, Mono], ...]:
    return tuple(sorted(p for p in coproduct(r) if p[0] and p[1]))


@lru_cache(maxsize=None)
def cochain_basis(s: int, t: int) -> tuple[tuple[Mono, ...], ...]:
    """Words [a_1|...|a_s] of positive-degree monomials with total degree t."""
    if s == 0:
        return ((),) if t == 0 else ()
    out = []
    for first in range(1, t - s + 2):
        heads = monomial_basis(first)
        tails = cochain_basis(s - 1, t - first)
        for h, tl in cartesian(heads, tails):
            out.append((h,) + tl)
    return tuple(out)


def cochain_size(s: int, t: int) -> int:
    return len(cochain_basis(s, t)) if s <= t else 0


@lru_cache(maxsize=None)
def _size(s: int, t: int) -> int:
    # counts without materialising the basis
    if s == 0:
        return 1 if t == 0 else 0
    return sum(len(monomial_basis(k)) * _size(s - 1, t - k) for k in range(1, t - s + 2))


def cobar_differential_columns(s: int, t: int) -> list[int]:
    src = cochain_basis(s, t)
    index = {w: i for i, w in enumerate(cochain_basis(s + 1, t))}
    cols = []
    for w in src:
        v = 0
        for k, a in enumerate(w):
            for x, y in reduced_coproduct(a):
                v ^= 1 << index[w[:k] + (x, y) + w[k + 1:]]
        cols.append(v)
    return cols


def cobar_ext_dims(max_t: int, max_s: int | None = None, max_cells: int = DEFAULT_MAX_CELLS,
                   skipped: list | None = None) -> dict[tuple[int, int], int]:
    """Ext^{s,t} dimensions (including zeros) for every feasible cell with t <= max_t.

    A cell is feasible when the cochain groups in degrees s-1, s, s+1 all
    have at most ``max_cells`` elements; infeasible cells are appended to
    ``skipped`` when a list is supplied.
    """
    if max_s is None:
        max_s = max_t
    out: dict[tuple[int, int], int] = {}
    ranks: dict[tuple[int, int], int] = {}

    def rank(s, t):
        key = (s, t)
        if key not in ranks:
            if s < 0 or _size(s, t) == 0 or _size(s + 1, t) == 0:
                ranks[key] = 0
            else:
                ranks[key] = Echelon(cobar_differential_columns(s, t)).rank
        return ranks[key]

    for t in range(max_t + 1):
        for s in range(min(max_s, t) + 1):
            if max(_size(s - 1, t) if s else 0, _size(s, t), _size(s + 1, t)) > max_cells:
                if skipped is not None:
                    skipped.append((s, t))
                continue
            out[(s, t)] = _size(s, t) - rank(s, t) - rank(s - 1, t)
    return out
