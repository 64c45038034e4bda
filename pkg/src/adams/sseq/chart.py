"""Charts: finite presented pieces of an Adams E_r page.

A chart lists named dots (an F2 basis of each listed cell), a product table
and a few pieces of metadata:

* Products are commutative.  A pair missing from the table is UNKNOWN,
  never zero; a zero product is written with ``"value": []``.
* ``complete`` lists rectangles ``[stem_lo, stem_hi, s_lo, s_hi]`` whose
  cells are known to contain exactly the listed dots.  Outside them the
  listed dots are only part of the group.
* ``closed`` asserts that no differential enters or leaves the complete
  region except between listed dots.  It is an imported assumption and is
  echoed in reports.

Weights are all present or all absent.  When absent, each (stem, s) cell is
one slice and the distinguished generator tau acts inside it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .. import f2


class ChartError(ValueError):
    """Validation failed; ``problems`` lists every problem found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class Unknown:
    """Result of a product that the table does not determine."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNKNOWN"

    def __bool__(self):
        raise TypeError("UNKNOWN has no truth value")


UNKNOWN = Unknown()

Expr = frozenset  # F2 sum of dot names; frozenset() is zero


class TriDegree(NamedTuple):
    stem: int
    s: int
    weight: int | None = None

    def __add__(self, other):
        if self.weight is None or other.weight is None:
            w = None
        else:
            w = self.weight + other.weight
        return TriDegree(self.stem + other.stem, self.s + other.s, w)

    def cell(self) -> tuple:
        return (self.stem, self.s) if self.weight is None else (self.stem, self.s, self.weight)

    def shifted(self, page: int) -> TriDegree:
        """Target of d_page: stem down one, filtration up by the page."""
        return TriDegree(self.stem - 1, self.s + page, self.weight)

    def __str__(self):
        if self.weight is None:
            return f"({self.stem},{self.s})"
        return f"({self.stem},{self.s},{self.weight})"


@dataclass(frozen=True)
class ChartGenerator:
    name: str
    degree: TriDegree
    tau_multiple: str | None = None
    imported: bool = False
    note: str = ""


def parse_expr(text: str | Iterable[str]) -> Expr:
    """``"a + b"`` or ``["a", "b"]`` to an F2 sum; ``"0"`` and ``[]`` are zero."""
    if isinstance(text, str):
        parts = [p.strip() for p in text.split("+")]
        parts = [p for p in parts if p and p != "0"]
    else:
        parts = list(text)
    out: set[str] = set()
    for p in parts:
        out.symmetric_difference_update({p})
    return frozenset(out)


def format_expr(e: Expr, order: dict[str, int] | None = None) -> str:
    if e is UNKNOWN:
        return "UNKNOWN"
    if not e:
        return "0"
    key = (lambda n: (order.get(n, 1 << 30), n)) if order else None
    return " + ".join(sorted(e, key=key))


@dataclass
class ChartAlgebra:
    generators: list[ChartGenerator]
    products: dict[tuple[str, str], Expr]
    tau: str | None = None
    complete: list[tuple[int, int, int, int]] = field(default_factory=list)
    closed: bool = False
    metadata: dict = field(default_factory=dict)
    page: int = 2

    def __post_init__(self):
        self.by_name = {g.name: g for g in self.generators}
        self.order = {g.name: i for i, g in enumerate(self.generators)}
        self.cells: dict[tuple, list[str]] = {}
        for g in self.generators:
            self.cells.setdefault(g.degree.cell(), []).append(g.name)
        self.weighted = any(g.degree.weight is not None for g in self.generators if g.name != self.tau)

    # -- degrees and cells -------------------------------------------------

    def degree(self, name: str) -> TriDegree:
        return self.by_name[name].degree

    def expr_degree(self, e: Expr) -> TriDegree | None:
        degs = {self.degree(n).cell() for n in e}
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous expression {format_expr(e, self.order)}")
        return self.degree(next(iter(e))) if e else None

    def cell_key(self, deg: TriDegree) -> tuple:
        if not self.weighted:
            return (deg.stem, deg.s)
        return deg.cell()

    def basis(self, deg: TriDegree) -> list[str]:
        return self.cells.get(self.cell_key(deg), [])

    def in_region(self, deg: TriDegree) -> bool:
        return any(a <= deg.stem <= b and lo <= deg.s <= hi for a, b, lo, hi in self.complete)

    def is_complete(self, deg: TriDegree) -> bool:
        return self.in_region(deg)

    def target(self, name: str, page: int | None = None) -> TriDegree:
        return self.degree(name).shifted(self.page if page is None else page)

    # -- vectors -----------------------------------------------------------

    def vector(self, e: Expr, deg: TriDegree) -> int:
        basis = self.basis(deg)
        index = {n: i for i, n in enumerate(basis)}
        v = 0
        for n in e:
            if n not in index:
                raise ValueError(f"{n} is not a dot in cell {deg}")
            v ^= 1 << index[n]
        return v

    def expr(self, v: int, deg: TriDegree) -> Expr:
        basis = self.basis(deg)
        return frozenset(basis[i] for i in f2.iter_bits(v))

    def fmt(self, e) -> str:
        return format_expr(e, self.order)

    # -- products ----------------------------------------------------------

    def product_of(self, a: str, b: str):
        key = (a, b) if (a, b) in self.products else (b, a)
        return self.products.get(key, UNKNOWN)

    def multiply(self, e1: Expr, e2: Expr):
        """Bilinear extension of the table; UNKNOWN if any needed pair is unlisted."""
        self.expr_degree(e1)
        self.expr_degree(e2)
        out: set[str] = set()
        for a in e1:
            for b in e2:
                p = self.product_of(a, b)
                if p is UNKNOWN:
                    return UNKNOWN
                out.symmetric_difference_update(p)
        return frozenset(out)

    # -- serialisation ------------------------------------------------------

    def to_json(self) -> dict:
        gens = []
        for g in self.generators:
            d = {"name": g.name, "stem": g.degree.stem, "s": g.degree.s, "weight": g.degree.weight}
            if g.tau_multiple:
                d["tau_multiple"] = g.tau_multiple
            if g.imported:
                d["imported"] = True
            if g.note:
                d["note"] = g.note
            gens.append(d)
        prods = [{"a": a, "b": b, "value": sorted(v, key=self.order.get)}
                 for (a, b), v in sorted(self.products.items(),
                                         key=lambda kv: (self.order[kv[0][0]], self.order[kv[0][1]]))]
        out = {"generators": gens, "products": prods, "tau": self.tau, "page": self.page,
               "complete": [list(r) for r in self.complete], "closed": self.closed}
        if self.metadata:
            out["metadata"] = self.metadata
        return out


def _check_int(v, what, problems, allow_none=False):
    if v is None and allow_none:
        return True
    if not isinstance(v, int) or isinstance(v, bool):
        problems.append(f"{what}: expected an integer, got {v!r}")
        return False
    return True


def chart_from_json(data: dict, source: str = "<chart>") -> ChartAlgebra:
    """Build and validate a chart; all problems are collected before raising."""
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ChartError([f"{source}: top level must be an object"])
    tau = data.get("tau")
    gens: list[ChartGenerator] = []
    seen: dict[str, int] = {}
    for i, g in enumerate(data.get("generators", [])):
        where = f"{source}: generators[{i}]"
        name = g.get("name") if isinstance(g, dict) else None
        if not isinstance(name, str) or not name:
            problems.append(f"{where}: missing name")
            continue
        where = f"{where} ({name})"
        if name in seen:
            problems.append(f"{where}: duplicate name (first at generators[{seen[name]}])")
            continue
        seen[name] = i
        ok = _check_int(g.get("stem"), f"{where} stem", problems)
        ok &= _check_int(g.get("s"), f"{where} s", problems)
        ok &= _check_int(g.get("weight"), f"{where} weight", problems, allow_none=True)
        if not ok:
            continue
        if g["s"] < 0:
            problems.append(f"{where}: negative filtration {g['s']}")
        deg = TriDegree(g["stem"], g["s"], g.get("weight"))
        if name == tau and (deg.stem, deg.s) != (0, 0):
            problems.append(f"{where}: tau must have degree (0,0,-1), got {deg}")
        if name == tau and deg.weight not in (None, -1):
            problems.append(f"{where}: tau must have weight -1, got {deg.weight}")
        gens.append(ChartGenerator(name, deg, g.get("tau_multiple"), bool(g.get("imported", False)),
                                   g.get("note", "")))
    if tau is not None and tau not in seen:
        problems.append(f"{source}: tau generator {tau!r} is not listed")

    by_name = {g.name: g for g in gens}
    weights = {g.degree.weight is None for g in gens if g.name != tau}
    if len(weights) > 1:
        problems.append(f"{source}: weights must be given for every generator or for none")
    weighted = weights == {False}

    def deg_key(d: TriDegree):
        return (d.stem, d.s, d.weight) if weighted else (d.stem, d.s)

    def tau_deg(d: TriDegree) -> TriDegree:
        return TriDegree(d.stem, d.s, d.weight - 1 if weighted else d.weight)

    products: dict[tuple[str, str], Expr] = {}
    for i, p in enumerate(data.get("products", [])):
        a, b, value = (p.get("a"), p.get("b"), p.get("value")) if isinstance(p, dict) else (None, None, None)
        where = f"{source}: products[{i}] ({a}, {b})"
        bad = [x for x in (a, b) if x not in by_name]
        if bad:
            problems.append(f"{where}: unknown generator {', '.join(map(str, bad))}")
            continue
        if not isinstance(value, list):
            problems.append(f"{where}: value must be a list of names")
            continue
        missing = [x for x in value if x not in by_name]
        if missing:
            problems.append(f"{where}: value mentions unknown generator {', '.join(missing)}")
            continue
        key = (a, b)
        if key in products or (b, a) in products:
            problems.append(f"{where}: pair listed twice")
            continue
        if a == tau or b == tau:
            other = by_name[b if a == tau else a]
            expected = tau_deg(other.degree)
        else:
            expected = by_name[a].degree + by_name[b].degree
        for x in value:
            if deg_key(by_name[x].degree) != deg_key(expected):
                problems.append(f"{where}: value term {x} has degree {by_name[x].degree}, "
                                f"expected {expected}")
        products[key] = parse_expr(value)

    for g in gens:
        if g.tau_multiple is not None:
            if tau is None:
                problems.append(f"{source}: {g.name} has tau_multiple but the chart has no tau")
            elif g.tau_multiple not in by_name:
                problems.append(f"{source}: {g.name}.tau_multiple names unknown generator {g.tau_multiple}")
            elif deg_key(by_name[g.tau_multiple].degree) != deg_key(tau_deg(g.degree)):
                problems.append(f"{source}: {g.name}.tau_multiple {g.tau_multiple} has the wrong degree")

    complete = []
    for i, r in enumerate(data.get("complete", [])):
        if not (isinstance(r, list) and len(r) == 4 and all(isinstance(x, int) for x in r)):
            problems.append(f"{source}: complete[{i}] must be [stem_lo, stem_hi, s_lo, s_hi]")
        else:
            complete.append(tuple(r))
    page = data.get("page", 2)
    if not isinstance(page, int) or page < 2:
        problems.append(f"{source}: page must be an integer >= 2")
        page = 2
    if problems:
        raise ChartError(problems)
    chart = ChartAlgebra(gens, products, tau, complete, bool(data.get("closed", False)),
                         data.get("metadata", {}), page)
    # tau_multiple is shorthand for a product entry; keep the table as the source of truth
    for g in gens:
        if g.tau_multiple is not None and chart.product_of(tau, g.name) is UNKNOWN:
            chart.products[(tau, g.name)] = frozenset((g.tau_multiple,))
    return chart


def load_chart(path) -> ChartAlgebra:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ChartError([f"{path}: line {e.lineno} column {e.colno}: {e.msg}"]) from None
    return chart_from_json(data, str(path))
