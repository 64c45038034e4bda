"""Stable stems from an E_infinity chart."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as cartesian

from .. import f2
from .chart import UNKNOWN, ChartAlgebra, TriDegree
from .facts import ExtensionFact


class IncompleteStem(ValueError):
    pass


@dataclass(frozen=True, order=True)
class AbelianGroup:
    """A finite abelian 2-group, as the exponents of its cyclic summands (descending)."""
    exponents: tuple[int, ...]

    @property
    def order(self) -> int:
        return 1 << sum(self.exponents)

    def __str__(self):
        if not self.exponents:
            return "0"
        return "⊕".join(f"ℤ/{1 << e}" for e in self.exponents)

    def ascii(self) -> str:
        if not self.exponents:
            return "0"
        return "+".join(f"Z/{1 << e}" for e in self.exponents)


def _stem_dots(chart: ChartAlgebra, stem: int) -> list[str]:
    if chart.tau is not None:
        raise IncompleteStem("group extraction needs a classical chart (no tau)")
    dots = sorted((g for g in chart.generators if g.degree.stem == stem),
                  key=lambda g: (g.degree.s, chart.order[g.name]))
    for s in sorted({g.degree.s for g in dots}):
        if not chart.is_complete(TriDegree(stem, s)):
            raise IncompleteStem(f"cell ({stem},{s}) is not declared complete")
    if not any(a <= stem <= b for a, b, _, _ in chart.complete):
        raise IncompleteStem(f"stem {stem} lies outside the chart's complete region")
    return [g.name for g in dots]


def stem_order(chart: ChartAlgebra, stem: int) -> int:
    """2 to the number of E_infinity dots in the stem."""
    return 1 << len(_stem_dots(chart, stem))


def _jordan_type(images: dict[str, str | None], names: list[str]) -> AbelianGroup:
    """Cyclic summands from the 'times 2' map on the associated graded."""
    index = {n: i for i, n in enumerate(names)}
    cols = [0 if images[n] is None else 1 << index[images[n]] for n in names]

    def power_rank(k):
        # rank of f^k, by composing columns
        cur = list(cols) if k else [1 << i for i in range(len(names))]
        for _ in range(k - 1):
            cur = [f2.apply_columns(cols, c) for c in cur]
        return f2.Echelon(cur).rank

    ranks = [power_rank(k) for k in range(len(names) + 2)]
    blocks = []
    for k in range(1, len(names) + 1):
        at_least = ranks[k - 1] - ranks[k]
        more = ranks[k] - ranks[k + 1]
        blocks += [k] * (at_least - more)
    return AbelianGroup(tuple(sorted(blocks, reverse=True)))


def stem_group_possibilities(chart: ChartAlgebra, stem: int,
                             extensions: list[ExtensionFact] = (), h0: str = "h0"):
    """Isomorphism types compatible with the chart and the extension facts.

    Returns (groups, branches): ``branches`` names the unknown extensions
    that were split on.
    """
    names = _stem_dots(chart, stem)
    base: dict[str, str | None] = {}
    for n in names:
        if h0 not in chart.by_name:
            raise IncompleteStem(f"the chart has no {h0}")
        p = chart.product_of(h0, n)
        if p is UNKNOWN:
            raise IncompleteStem(f"{h0}*{n} is not listed")
        if len(p) > 1:
            raise IncompleteStem(f"{h0}*{n} is not a single dot")
        base[n] = next(iter(p)) if p else None
    # an extension involving a dot that did not survive cannot occur
    exts = [e for e in extensions if e.stem == stem and e.source in base and e.target in base]
    for e in exts:
        if base[e.source] is not None and e.status != "absent":
            raise IncompleteStem(f"{e.source} already has a nonzero {h0} multiple")
    unknown = [e for e in exts if e.status == "unknown"]
    groups = set()
    for choice in cartesian((False, True), repeat=len(unknown)):
        images = dict(base)
        for e in exts:
            if e.status == "present":
                images[e.source] = e.target
        for e, on in zip(unknown, choice):
            if on:
                images[e.source] = e.target
        groups.add(_jordan_type(images, names))
    return sorted(groups, reverse=True), [f"{e.source} → {e.target}" for e in unknown]
