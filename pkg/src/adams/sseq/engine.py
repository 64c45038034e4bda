"""Differential deduction on a chart.

For every dot x the state keeps the set of values of d_r(x) that are still
consistent with what is known, as an affine subspace of the listed dots in
the target cell.  ``None`` stands for "nothing known and the target cell is
not complete", which can be narrowed by an explicit value but not
enumerated.

Every rule is a linear constraint

    sum_i  M_i d_r(x_i) = const

(Leibniz: ``d(xy) + d(x) y + x d(y) = 0``; asserted differentials of sums)
or a Moss higher Leibniz constraint.  A constraint narrows each of its
variables to the values compatible with the others' current sets.  Rules
only ever intersect, so the closure is monotone, terminates, and does not
depend on the order rules are applied in.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable

from .. import f2
from ..f2 import AffineSubspace
from .chart import UNKNOWN, ChartAlgebra, ChartGenerator, Expr, TriDegree
from .facts import Facts, MasseyFact

MAX_CANDIDATE_DIM = 12  # the Moss rule enumerates at most 2**12 candidates


class Contradiction(RuntimeError):
    pass


class UnresolvedDifferentials(ValueError):
    def __init__(self, page: int, names: list[str]):
        self.names = names
        super().__init__(f"d{page} is not determined on: {', '.join(names)}")


@dataclass
class Deduction:
    id: int
    rule: str
    page: int
    target: str
    value: str
    premises: tuple = ()
    note: str = ""
    citation: str = ""

    def to_json(self) -> dict:
        out = {"id": self.id, "rule": self.rule, "page": self.page, "target": self.target,
               "value": self.value, "premises": list(self.premises)}
        if self.note:
            out["note"] = self.note
        if self.citation:
            out["citation"] = self.citation
        return out

    def human(self) -> str:
        rel = "=" if self.rule != "contradiction" else ": "
        text = f"{self.target}{rel}{self.value}" if self.rule != "contradiction" else \
            f"CONTRADICTION at {self.target}"
        via = {"imported": "imported", "leibniz": "by Leibniz rule", "moss": "by Moss rule",
               "assert": "asserted", "what-if": "asserted (what-if)",
               "contradiction": "-"}[self.rule]
        out = f"{text} {via}"
        if self.note:
            out += f" {self.note}"
        if self.citation:
            out += f" [{self.citation}]"
        return out


@dataclass(frozen=True)
class Term:
    var: str
    by: str | None = None  # multiply d(var) by this dot; None means identity


@dataclass(frozen=True)
class Constraint:
    label: str
    terms: tuple[Term, ...]
    target: TriDegree
    const: int = 0
    rule: str = "leibniz"
    premises: tuple = ()


def _active(S: AffineSubspace) -> int:
    bits = S.basepoint
    for d in S.direction:
        bits |= d
    return bits


class DifferentialState:
    def __init__(self, chart: ChartAlgebra, page: int | None = None):
        self.chart = chart
        self.page = chart.page if page is None else page
        self.spaces: dict[str, AffineSubspace | None] = {}
        self.origin: dict[str, object] = {}
        self.log: list[Deduction] = []
        self.contradictions: list[Deduction] = []
        self.constraints: list[Constraint] = []
        for g in chart.generators:
            T = g.degree.shifted(self.page)
            n = len(chart.basis(T))
            if chart.closed and chart.in_region(g.degree) and not chart.in_region(T):
                self.spaces[g.name] = AffineSubspace.point(n, 0)
                self.origin[g.name] = "boundary"
            elif chart.is_complete(T) or T.stem < 0 or T.s <= 0:
                self.spaces[g.name] = AffineSubspace.full(n) if n else AffineSubspace.point(0, 0)
                self.origin[g.name] = "degree"
            else:
                self.spaces[g.name] = None
                self.origin[g.name] = "initial"

    # -- bookkeeping ---------------------------------------------------------

    def copy(self) -> DifferentialState:
        out = DifferentialState.__new__(DifferentialState)
        out.chart = self.chart
        out.page = self.page
        out.spaces = dict(self.spaces)
        out.origin = dict(self.origin)
        out.log = list(self.log)
        out.contradictions = list(self.contradictions)
        out.constraints = list(self.constraints)
        return out

    @property
    def contradicted(self) -> bool:
        return bool(self.contradictions)

    def target_cell(self, name: str) -> TriDegree:
        return self.chart.degree(name).shifted(self.page)

    def describe(self, name: str, S=None) -> str:
        S = self.spaces[name] if S is None else S
        if S is None:
            return "?"
        if S.is_empty:
            return "EMPTY"
        T = self.target_cell(name)
        base = self.chart.fmt(self.chart.expr(S.basepoint, T))
        if S.is_point:
            return base
        span = ", ".join(self.chart.fmt(self.chart.expr(d, T)) for d in S.direction)
        return f"{base} + span{{{span}}}"

    def known(self, name: str) -> Expr | None:
        S = self.spaces[name]
        if S is None or not S.is_point:
            return None
        return self.chart.expr(S.basepoint, self.target_cell(name))

    def is_zero(self, e: Expr) -> bool:
        return all(self.known(n) == frozenset() for n in e)

    def _record(self, rule, name, premises=(), note="", citation="") -> Deduction:
        d = Deduction(len(self.log) + 1, rule, self.page, f"d{self.page}({name})", self.describe(name),
                      tuple(premises), note, citation)
        self.log.append(d)
        self.origin[name] = d.id
        return d

    def _contradiction(self, name, premises, note) -> None:
        d = Deduction(len(self.log) + 1, "contradiction", self.page, f"d{self.page}({name})", "EMPTY",
                      tuple(premises), note)
        self.log.append(d)
        self.contradictions.append(d)

    def update(self, name: str, new: AffineSubspace, rule: str, premises=(), note="", citation="") -> bool:
        """Narrow d(name) to ``new`` (already intersected); log and report change."""
        old = self.spaces[name]
        if old is not None and new == old:
            return False
        self.spaces[name] = new
        if new.is_empty:
            self._record(rule, name, premises, note, citation)
            self._contradiction(name, (self.log[-1].id,) + tuple(premises), note)
        else:
            self._record(rule, name, premises, note, citation)
        return True

    def premise(self, name: str):
        o = self.origin.get(name)
        return o if isinstance(o, int) else f"{o}:{name}"

    def unresolved(self) -> list[str]:
        return [g.name for g in self.chart.generators
                if self.spaces[g.name] is None or not self.spaces[g.name].is_point]


# ---------------------------------------------------------------------------
# linear machinery


def _columns(chart: ChartAlgebra, src: TriDegree, T: TriDegree, by: str | None, bits: int):
    """Columns of the map d(var) -> term for the given source coordinates; None if unknown."""
    basis = chart.basis(src)
    cols = [0] * len(basis)
    for i in f2.iter_bits(bits):
        w = basis[i]
        if by is None:
            cols[i] = chart.vector(frozenset((w,)), T)
            continue
        p = chart.product_of(w, by)
        if p is UNKNOWN:
            return None
        cols[i] = chart.vector(p, T)
    return cols


def _image(state, term: Term, T: TriDegree):
    S = state.spaces[term.var]
    if S is None:
        return None
    src = state.target_cell(term.var)
    cols = _columns(state.chart, src, T, term.by, _active(S))
    if cols is None:
        return None
    return S.image(cols, len(state.chart.basis(T)))


def _pullback(S: AffineSubspace, cols: list[int], R: AffineSubspace) -> AffineSubspace:
    """{x in S : M x in R}, using only the columns on S's active coordinates."""
    d = list(S.direction)
    p = S.basepoint
    mp = f2.apply_columns(cols, p)
    md = [f2.apply_columns(cols, v) for v in d]
    lam = R.translate(mp).preimage(md)
    if lam.is_empty:
        return AffineSubspace.empty(S.ambient_dim)
    return lam.image(d, S.ambient_dim).translate(p)


def apply_constraint(state: DifferentialState, c: Constraint) -> bool:
    chart = state.chart
    T = c.target
    n = len(chart.basis(T))
    if any(state.spaces[t.var] is not None and state.spaces[t.var].is_empty for t in c.terms):
        return False
    images = [_image(state, t, T) for t in c.terms]
    changed = False
    for i, t in enumerate(c.terms):
        if any(img is None for j, img in enumerate(images) if j != i):
            continue
        rhs = AffineSubspace.point(n, c.const)
        for j, img in enumerate(images):
            if j != i:
                rhs = rhs + img
        S = state.spaces[t.var]
        if S is None:
            if t.by is not None or sum(1 for u in c.terms if u.var == t.var) > 1:
                continue
            new = rhs
        else:
            cols = _columns(chart, state.target_cell(t.var), T, t.by, _active(S))
            if cols is None:
                continue
            new = _pullback(S, cols, rhs)
        premises = tuple(state.premise(u.var) for j, u in enumerate(c.terms) if j != i) + c.premises
        if state.update(t.var, new, c.rule, premises, note=f"from {c.label}"):
            changed = True
            if new.is_empty:
                return True
            images[i] = _image(state, t, T)
    return changed


def leibniz_constraints(chart: ChartAlgebra, page: int) -> list[Constraint]:
    out = []
    for (x, y), Z in chart.products.items():
        T = (chart.degree(x) + chart.degree(y)).shifted(page)
        terms = [] if x == y else [Term(x, y), Term(y, x)]
        terms += [Term(z, None) for z in sorted(Z, key=chart.order.get)]
        if not terms:
            continue
        label = f"{x}*{y} = {chart.fmt(Z)}"
        out.append(Constraint(label, tuple(terms), T))
    return out


# ---------------------------------------------------------------------------
# operations


def assert_differential(state: DifferentialState, page: int, source: Expr, value: Expr,
                        citation: str = "", rule: str = "assert") -> DifferentialState:
    chart = state.chart
    if page != state.page:
        raise ValueError(f"state is on page {state.page}, not {page}")
    source = frozenset(source)
    if not source:
        raise ValueError("empty source")
    gone = sorted(n for n in source | frozenset(value) if n not in chart.by_name)
    if gone:
        raise ValueError(f"{', '.join(gone)} not on the E{page} page")
    deg = chart.expr_degree(source)
    T = deg.shifted(page)
    if value:
        vd = chart.expr_degree(value)
        if (vd.stem, vd.s) != (T.stem, T.s):
            raise ValueError(f"degree law: d{page} of {chart.fmt(source)} lands in ({T.stem},{T.s}), "
                             f"not {vd}")
    v = chart.vector(value, T)
    n = len(chart.basis(T))
    if len(source) == 1:
        (x,) = source
        S = state.spaces[x]
        new = AffineSubspace.point(n, v) if S is None else S & AffineSubspace.point(n, v)
        state.update(x, new, rule, (), citation=citation)
    else:
        label = f"d{page}({chart.fmt(source)}) = {chart.fmt(value)}"
        c = Constraint(label, tuple(Term(x) for x in sorted(source, key=chart.order.get)), T, v, rule)
        state.constraints.append(c)
        apply_constraint(state, c)
    return state


def seed(state: DifferentialState, facts: Facts) -> DifferentialState:
    """Apply the imported facts that concern the state's page."""
    chart = state.chart
    for p in facts.permanent:
        if p.name in chart.by_name:
            assert_differential(state, state.page, frozenset((p.name,)), frozenset(),
                                p.citation or "permanent cycle", rule="imported")
    for d in facts.differentials:
        if d.page == state.page and all(n in chart.by_name for n in d.source | d.value):
            assert_differential(state, d.page, d.source, d.value, d.citation, rule="imported")
    return state


def leibniz_closure(chart: ChartAlgebra, state: DifferentialState,
                    rng: random.Random | None = None) -> DifferentialState:
    constraints = leibniz_constraints(chart, state.page) + state.constraints
    changed = True
    while changed and not state.contradicted:
        changed = False
        order = list(constraints)
        if rng is not None:
            rng.shuffle(order)
        for c in order:
            if apply_constraint(state, c):
                changed = True
                if state.contradicted:
                    break
    return state


# ---------------------------------------------------------------------------
# brackets


@dataclass
class BracketValue:
    kind: str  # "coset" | "undefined" | "unknown"
    coset: AffineSubspace | None = None
    reason: str = ""


class BracketOracle:
    """Evaluates <a, b, v> in the chart from imported bracket facts.

    Routes, in order: definedness (b*v must vanish), the zero entry
    (<a, b, 0> is the indeterminacy), an imported fact, and juggling
    <a, b, c'> d ⊆ <a, b, c' d>.
    """

    def __init__(self, chart: ChartAlgebra, facts: Facts, page: int):
        self.chart = chart
        self.facts = [m for m in facts.massey if m.page == page]

    def _cell_products(self, left: Expr, cell: TriDegree, right: Expr | None, T: TriDegree):
        """Vectors of left*w (or w*right) for each dot w of a complete cell."""
        ch = self.chart
        if not ch.is_complete(cell):
            return None
        out = []
        for w in ch.basis(cell):
            p = ch.multiply(left, frozenset((w,))) if right is None else ch.multiply(frozenset((w,)), right)
            if p is UNKNOWN:
                return None
            out.append(ch.vector(p, T))
        return out

    def indeterminacy(self, a: Expr, b: Expr, v: Expr, dv: TriDegree, T: TriDegree):
        ch = self.chart
        da, db = ch.expr_degree(a), ch.expr_degree(b)
        n = len(ch.basis(T))
        c1 = TriDegree(db.stem + dv.stem + 1, db.s + dv.s - 1)
        g1 = self._cell_products(a, c1, None, T)
        if g1 is None:
            return None
        g2: list[int] = []
        if v:
            c2 = TriDegree(da.stem + db.stem + 1, da.s + db.s - 1)
            g2 = self._cell_products(None, c2, v, T)
            if g2 is None:
                return None
        return AffineSubspace.linear(n, g1 + g2)

    def evaluate(self, a: Expr, b: Expr, v: Expr, dv: TriDegree) -> BracketValue:
        ch = self.chart
        da, db = ch.expr_degree(a), ch.expr_degree(b)
        T = TriDegree(da.stem + db.stem + dv.stem + 1, da.s + db.s + dv.s - 1)
        bv = ch.multiply(b, v)
        if bv is not UNKNOWN and bv:
            return BracketValue("undefined", reason=f"{ch.fmt(b)}*({ch.fmt(v)}) = {ch.fmt(bv)} != 0")
        ind = self.indeterminacy(a, b, v, dv, T)
        if not v:
            if ind is None:
                return BracketValue("unknown", reason="indeterminacy not computable")
            return BracketValue("coset", ind, "zero entry")
        for m in self.facts:
            if m.b == b and {m.a, m.c} == {a, v} and (m.a == a or m.c == a):
                coset = AffineSubspace.point(len(ch.basis(T)), ch.vector(m.value, T))
                if not m.strict:
                    if ind is None:
                        return BracketValue("unknown", reason="indeterminacy not computable")
                    coset = coset + ind
                return BracketValue("coset", coset, f"imported <{ch.fmt(m.a)},{ch.fmt(m.b)},{ch.fmt(m.c)}>")
        if ind is None:
            return BracketValue("unknown", reason="indeterminacy not computable")
        for m in self.facts:
            if m.a != a or m.b != b or not m.c:
                continue
            dc = ch.expr_degree(m.c)
            cell = TriDegree(dv.stem - dc.stem, dv.s - dc.s)
            for d in ch.basis(cell):
                prod = ch.multiply(m.c, frozenset((d,)))
                if prod is UNKNOWN or prod != v:
                    continue
                wd = ch.multiply(m.value, frozenset((d,)))
                if wd is UNKNOWN:
                    continue
                coset = ind.translate(ch.vector(wd, T))
                return BracketValue("coset", coset,
                                    f"juggling <{ch.fmt(m.a)},{ch.fmt(m.b)},{ch.fmt(m.c)}>*{d} "
                                    f"in <{ch.fmt(a)},{ch.fmt(b)},{ch.fmt(m.c)}*{d}>")
        return BracketValue("unknown", reason="no route")


def moss_constraint(chart: ChartAlgebra, state: DifferentialState, fact: MasseyFact,
                    oracle: BracketOracle | None = None) -> DifferentialState:
    """Impose d_r<a,b,c> ⊆ <a,b,d_r c> on the candidates for d_r(c)."""
    if fact.page != state.page or state.contradicted:
        return state
    if not (state.is_zero(fact.a) and state.is_zero(fact.b)):
        return state
    if len(fact.c) != 1 or len(fact.value) == 0:
        return state
    oracle = oracle or BracketOracle(chart, Facts(massey=[fact]), state.page)
    (c,) = fact.c
    Sc = state.spaces[c]
    if Sc is None or Sc.is_empty or Sc.dim > MAX_CANDIDATE_DIM:
        return state
    Tv = chart.expr_degree(fact.value).shifted(state.page)
    n = len(chart.basis(Tv))
    required = AffineSubspace.point(n, 0)
    for x in fact.value:
        Sx = state.spaces[x]
        if Sx is None:
            required = None
            break
        required = required + Sx
    dv = state.target_cell(c)
    survivors, reasons, kept = [], [], []
    for v in Sc.points():
        ve = chart.expr(v, dv)
        r = oracle.evaluate(fact.a, fact.b, ve, dv)
        label = chart.fmt(ve)
        if r.kind == "undefined":
            reasons.append(f"{label}: bracket undefined ({r.reason})")
            continue
        if r.kind == "coset" and required is not None and (r.coset & required).is_empty:
            reasons.append(f"{label}: <{chart.fmt(fact.a)},{chart.fmt(fact.b)},{label}> "
                           f"excludes d{state.page}({chart.fmt(fact.value)}) via {r.reason}")
            continue
        survivors.append(v)
        kept.append(f"{label}: {r.reason}" if r.kind == "coset" else f"{label}: not excluded ({r.reason})")
    if survivors:
        hull = AffineSubspace(Sc.ambient_dim, survivors[0], [s ^ survivors[0] for s in survivors[1:]])
        new = Sc & hull
    else:
        new = AffineSubspace.empty(Sc.ambient_dim)
    premises = [fact.id] + [state.premise(x) for x in sorted(fact.a | fact.b | fact.value)]
    note = (f"from <{chart.fmt(fact.a)},{chart.fmt(fact.b)},{chart.fmt(fact.c)}> = {chart.fmt(fact.value)}"
            + (f"; eliminated {'; '.join(reasons)}" if reasons else "")
            + (f"; kept {'; '.join(kept)}" if kept else ""))
    state.update(c, new, "moss", premises, note=note, citation=fact.citation)
    return state


def propagate(chart: ChartAlgebra, state: DifferentialState, facts: Facts,
              rng: random.Random | None = None) -> DifferentialState:
    """Leibniz closure and every Moss constraint of this page, to a fixpoint."""
    oracle = BracketOracle(chart, facts, state.page)
    while True:
        before = len(state.log)
        leibniz_closure(chart, state, rng)
        masseys = [m for m in facts.massey if m.page == state.page]
        if rng is not None:
            rng.shuffle(masseys)
        for m in masseys:
            moss_constraint(chart, state, m, oracle)
        if state.contradicted or len(state.log) == before:
            return state


def run_page(chart: ChartAlgebra, facts: Facts, page: int | None = None,
             what_if: Iterable[tuple[int, Expr, Expr]] = (), rng=None) -> DifferentialState:
    state = DifferentialState(chart, page)
    seed(state, facts)
    for p, src, val in what_if:
        if p == state.page:
            assert_differential(state, p, src, val, rule="what-if")
    return propagate(chart, state, facts, rng)


# ---------------------------------------------------------------------------
# pages


def turn_page(chart: ChartAlgebra, state: DifferentialState) -> ChartAlgebra:
    """E_{r+1} from E_r and a fully determined d_r."""
    if state.contradicted:
        raise Contradiction(state.contradictions[0].human())
    missing = state.unresolved()
    if missing:
        raise UnresolvedDifferentials(state.page, missing)
    r = state.page
    survivors: dict[tuple, list[tuple[str, int]]] = {}  # cell -> [(name, vector)]
    quotient: dict[tuple, tuple[int, list[int]]] = {}  # cell -> (image count, image + reps)
    for cell, names in chart.cells.items():
        deg = chart.degree(names[0])
        kernel = f2.Echelon(f2.column_kernel([state.spaces[n].basepoint for n in names]))
        incoming = TriDegree(deg.stem + 1, deg.s - r, deg.weight)
        image = [chart.vector(state.known(x), deg) for x in chart.basis(incoming)]
        ech = f2.Echelon(image)
        # single dots first, so surviving dots keep their names
        singles = [1 << i for i in range(len(names)) if kernel.contains(1 << i)]
        out = []
        for v in singles + f2.rref_ints(kernel.basis())[0]:
            if ech.add(v):
                out.append(("+".join(names[i] for i in f2.iter_bits(v)), v))
        survivors[cell] = out
        quotient[cell] = (len(image), image + [v for _, v in out])

    gens = []
    for cell, names in chart.cells.items():
        g = chart.by_name[names[0]]
        for name, v in survivors[cell]:
            imported = any(chart.by_name[n].imported for n in name.split("+"))
            gens.append(ChartGenerator(name, g.degree, None, imported, chart.by_name[name].note
                                       if name in chart.by_name else ""))
    new_names = {gg.name for gg in gens}

    def coords(e: Expr, deg: TriDegree):
        cell = chart.cell_key(deg)
        v = chart.vector(e, deg)
        n_image, vectors = quotient[cell]
        rem, combo = f2.Echelon(vectors, track=True).reduce_tracked(v)
        if rem:
            return None
        return frozenset(survivors[cell][k - n_image][0] for k in f2.iter_bits(combo) if k >= n_image)

    products = {}
    tau = chart.tau if chart.tau in new_names else None
    by_cell = {gg.name: gg for gg in gens}
    names = [gg.name for gg in gens]
    for i, p in enumerate(names):
        for q in names[i:]:
            ep, eq = frozenset(p.split("+")), frozenset(q.split("+"))
            prod = chart.multiply(ep, eq)
            if prod is UNKNOWN:
                continue
            if tau in (p, q):
                other = by_cell[q if p == tau else p].degree
                deg = TriDegree(other.stem, other.s, None if other.weight is None else other.weight - 1)
            else:
                deg = by_cell[p].degree + by_cell[q].degree
            if prod and chart.cell_key(deg) not in quotient:
                continue
            val = coords(prod, deg) if prod else frozenset()
            if val is None:
                continue
            products[(p, q)] = val

    if chart.closed:
        complete = list(chart.complete)
    else:
        complete = []
        for a, b, lo, hi in chart.complete:
            for stem in range(a, b + 1):
                for s in range(lo, hi + 1):
                    src = TriDegree(stem + 1, s - r)
                    if src.s <= 0 or chart.is_complete(src):
                        complete.append((stem, stem, s, s))
    meta = dict(chart.metadata)
    return ChartAlgebra(gens, products, tau, complete, chart.closed, meta, r + 1)


def page_span(chart: ChartAlgebra) -> int:
    ss = [g.degree.s for g in chart.generators if g.name != chart.tau]
    return (max(ss) - min(ss)) if ss else 0


def run_to_einf(chart: ChartAlgebra, facts: Facts, what_if=(), max_page: int | None = None):
    """Turn pages until no differential can connect two dots; returns (E_inf chart, states)."""
    states = []
    last = max_page if max_page is not None else chart.page + page_span(chart)
    current = chart
    while current.page <= last:
        state = run_page(current, facts, what_if=what_if)
        states.append(state)
        if state.contradicted:
            raise Contradiction(state.contradictions[0].human())
        current = turn_page(current, state)
    return current, states
