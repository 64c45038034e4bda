"""Fact files: imported differentials, Massey products and extensions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .chart import ChartAlgebra, ChartError, Expr, parse_expr


@dataclass(frozen=True)
class DifferentialFact:
    page: int
    source: Expr
    value: Expr
    citation: str = ""
    id: str = ""


@dataclass(frozen=True)
class PermanentFact:
    """d_r(name) = 0 on every page."""
    name: str
    citation: str = ""
    id: str = ""


@dataclass(frozen=True)
class MasseyFact:
    a: Expr
    b: Expr
    c: Expr
    value: Expr
    strict: bool
    page: int
    citation: str = ""
    id: str = ""


@dataclass(frozen=True)
class ExtensionFact:
    stem: int
    source: str
    target: str
    status: str  # present | absent | unknown
    citation: str = ""


@dataclass
class Facts:
    differentials: list[DifferentialFact] = field(default_factory=list)
    permanent: list[PermanentFact] = field(default_factory=list)
    massey: list[MasseyFact] = field(default_factory=list)
    extensions: list[ExtensionFact] = field(default_factory=list)

    def extended(self, differentials=()) -> Facts:
        return Facts(self.differentials + list(differentials), list(self.permanent),
                     list(self.massey), list(self.extensions))


def facts_from_json(data: dict, chart: ChartAlgebra | None = None, source: str = "<facts>") -> Facts:
    problems: list[str] = []
    out = Facts()

    def names_ok(expr, where):
        if chart is None:
            return True
        bad = sorted(n for n in expr if n not in chart.by_name)
        if bad:
            problems.append(f"{where}: unknown generator {', '.join(bad)}")
            return False
        try:
            chart.expr_degree(expr)
        except ValueError as e:
            problems.append(f"{where}: {e}")
            return False
        return True

    def degree(expr):
        return chart.expr_degree(expr) if chart is not None else None

    for i, d in enumerate(data.get("differentials", [])):
        where = f"{source}: differentials[{i}]"
        try:
            page = int(d["page"])
            src = parse_expr(d["source"])
            val = parse_expr(d["value"])
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"{where}: malformed ({e})")
            continue
        if not src:
            problems.append(f"{where}: empty source")
            continue
        if names_ok(src, where) and names_ok(val, where) and chart is not None and val:
            want = degree(src).shifted(page)
            got = degree(val)
            if (got.stem, got.s) != (want.stem, want.s):
                problems.append(f"{where}: degree law violated, d{page} of {degree(src)} "
                                f"lands in ({want.stem},{want.s}), value is in {got}")
        out.differentials.append(DifferentialFact(page, src, val, d.get("source_citation", d.get("citation", "")),
                                                  d.get("id", f"diff{i}")))
    for i, p in enumerate(data.get("permanent", [])):
        name = p if isinstance(p, str) else p.get("name")
        cite = "" if isinstance(p, str) else p.get("citation", "")
        names_ok(frozenset((name,)), f"{source}: permanent[{i}]")
        out.permanent.append(PermanentFact(name, cite, f"perm{i}"))
    for i, m in enumerate(data.get("massey", [])):
        where = f"{source}: massey[{i}]"
        try:
            a, b, c, v = (parse_expr(m[k]) for k in ("a", "b", "c", "value"))
        except (KeyError, TypeError) as e:
            problems.append(f"{where}: malformed ({e})")
            continue
        if all(names_ok(x, where) for x in (a, b, c, v)) and chart is not None and a and b and c and v:
            da, db, dc, dv = (degree(x) for x in (a, b, c, v))
            want = (da.stem + db.stem + dc.stem + 1, da.s + db.s + dc.s - 1)
            if (dv.stem, dv.s) != want:
                problems.append(f"{where}: bracket degree law violated, value in {dv}, expected {want}")
        out.massey.append(MasseyFact(a, b, c, v, bool(m.get("strict", False)), int(m.get("page", 2)),
                                     m.get("citation", ""), m.get("id", f"massey{i}")))
    for i, e in enumerate(data.get("extensions", [])):
        where = f"{source}: extensions[{i}]"
        status = e.get("status")
        if status not in ("present", "absent", "unknown"):
            problems.append(f"{where}: status must be present, absent or unknown")
            continue
        if chart is not None:
            if not all(names_ok(frozenset((e.get(k),)), where) for k in ("from", "to")):
                continue
            ds, dt = chart.degree(e["from"]), chart.degree(e["to"])
            if ds.stem != e.get("stem") or dt.stem != e.get("stem"):
                problems.append(f"{where}: both ends must lie in stem {e.get('stem')}")
            if dt.s <= ds.s:
                problems.append(f"{where}: target filtration must exceed source filtration")
        out.extensions.append(ExtensionFact(e.get("stem"), e.get("from"), e.get("to"), status,
                                            e.get("citation", "")))
    if problems:
        raise ChartError(problems)
    return out


def load_facts(path, chart: ChartAlgebra | None = None) -> Facts:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ChartError([f"{path}: line {e.lineno} column {e.colno}: {e.msg}"]) from None
    return facts_from_json(data, chart, str(path))
