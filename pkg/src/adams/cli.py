"""Command-line interface: ``adams {ext,massey,propagate,chart,groups}``.

Exit codes: 0 success, 1 input error, 2 contradiction found, 3 resource
budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field

from .ext import CONVENTIONS, CatalogEntry, ExtTable, LambdaExt, ResourceBudgetExceeded, default_catalog, identify
from .lambda_algebra import LambdaElement, RewriteBudgetExceeded, bidegree_of, parse_monomial, product
from .massey import NotDefined, massey3
from .render import picture_from_chart, picture_from_ext, render_svg, render_text
from . import sseq

EXIT_OK, EXIT_INPUT, EXIT_CONTRADICTION, EXIT_BUDGET = 0, 1, 2, 3

# Internal degrees above this take hours; they need --stretch.
STRETCH_T = 40

MOTIVIC_CHART = "motivic_mini_chart.json"
MOTIVIC_FACTS = "motivic_mini_facts.json"
CLASSICAL_CHART = "classical_51_52_chart.json"
CLASSICAL_FACTS = "classical_51_52_facts.json"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    subcommand: str
    max_t: int = 20
    max_s: int | None = None
    cache_dir: str | None = None
    threads: int = 1
    convention: str = "lex-least"
    memory_mb: float = 2048
    stretch: bool = False
    output: str | None = None
    what_if: list[tuple[int, frozenset, frozenset]] = field(default_factory=list)

    def __post_init__(self):
        if self.max_t < 0 or (self.max_s is not None and self.max_s < 0):
            raise InputError("bounds must be non-negative")
        if self.threads < 1:
            raise InputError("--threads must be at least 1")
        if self.max_t > STRETCH_T and not self.stretch:
            raise InputError(f"t > {STRETCH_T} takes hours; pass --stretch to run it anyway")
        if self.cache_dir is not None:
            os.makedirs(self.cache_dir, exist_ok=True)
            if not os.access(self.cache_dir, os.W_OK):
                raise InputError(f"cache directory {self.cache_dir} is not writable")

    def engine(self) -> LambdaExt:
        return LambdaExt(self.convention, self.cache_dir, self.memory_mb, self.threads)


def _out(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def dimension_grid(table: ExtTable) -> str:
    dims = {}
    for (s, t), cl in table.classes.items():
        dims[(t - s, s)] = len(cl)
    if not dims:
        return "(empty)\n"
    stems = range(0, max(k[0] for k in dims) + 1)
    top = max(k[1] for k in dims)
    w = max(3, len(str(max(stems))) + 1)
    rows = []
    for s in range(top, -1, -1):
        rows.append(f"{s:>3} |" + "".join((str(dims[(n, s)]) if (n, s) in dims else ".").rjust(w) for n in stems))
    rows.append("    +" + "-" * (w * len(stems)))
    rows.append("     " + "".join(str(n).rjust(w) for n in stems))
    return "\n".join(rows) + "\n"


def build_table(cfg: RunConfig, engine: LambdaExt | None = None) -> ExtTable:
    engine = engine or cfg.engine()
    table = engine.table(cfg.max_t, cfg.max_s)
    return identify(default_catalog(), table, strict=False)


# ---------------------------------------------------------------------------
# ext


def cmd_ext(cfg: RunConfig, args) -> int:
    table = build_table(cfg)
    if args.json:
        _out(table.dumps() + "\n", cfg.output)
    else:
        text = dimension_grid(table)
        if args.classes:
            text += "".join(f"stem {c.stem:>3}  s {c.s:>2}  t {c.t:>3}  {c.name or '':<4} {' '.join(f'l{i}' for i in c.tag)}\n"
                            for c in table)
        text += f"total {table.total()} classes for t <= {cfg.max_t}\n"
        for line in table.report:
            text += f"note: {line}\n"
        _out(text, cfg.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# massey

_TAG = re.compile(r"l\d+(\s+l\d+)*")


def class_labels(engine: LambdaExt, s: int, t: int) -> list[str]:
    classes = engine.homology_basis(s, t)
    labels = [c.label() for c in classes]
    for e in default_catalog():
        if (e.s, e.stem + e.s) != (s, t):
            continue
        hits = [i for i, c in enumerate(classes) if e.tag is None or c.tag == e.tag]
        if e.tag is None and len(classes) != 1:
            continue
        if hits:
            labels[hits[0]] = e.name
    return labels


def _resolve_factor(token: str, engine: LambdaExt, stretch: bool) -> LambdaElement:
    token = token.strip()
    power = 1
    m = re.fullmatch(r"(.+?)\^(\d+)", token)
    if m and not _TAG.fullmatch(token):
        token, power = m.group(1), int(m.group(2))
    if _TAG.fullmatch(token):
        mono = parse_monomial(token)
        s, t = bidegree_of(mono)
        entry = CatalogEntry(token, t - s, s, mono, engine.convention)
    else:
        catalog = default_catalog()
        if token not in catalog:
            raise InputError(f"unknown class {token!r}; use a catalog name ({', '.join(e.name for e in catalog)}) "
                             "or a tag such as 'l2 l3 l3'")
        entry = catalog[token]
    t = entry.stem + entry.s
    if t * power > STRETCH_T and not stretch:
        raise InputError(f"{token} lives at t = {t}; pass --stretch to compute that far")
    classes = engine.homology_basis(entry.s, t)
    if entry.tag is not None and entry.convention == engine.convention:
        found = [c for c in classes if c.tag == entry.tag]
    else:
        found = classes if len(classes) == 1 else []
    if not found and entry.tag is not None:
        # the tag may be written in the other convention; its representative is still a cycle
        other = next(c for c in CONVENTIONS if c != engine.convention)
        found = [c for c in LambdaExt(other, memory_limit_mb=engine.memory_limit_mb).homology_basis(entry.s, t)
                 if c.tag == entry.tag]
    if not found:
        raise InputError(f"cannot identify {token} at stem {entry.stem}, s {entry.s}")
    return found[0].representative ** power


def resolve(token: str, engine: LambdaExt, stretch: bool = False) -> LambdaElement:
    """``h2^2``, ``h1*h3``, ``D1`` or a tag like ``'l2 l3 l3'`` to a cycle."""
    out = None
    for part in token.split("*"):
        x = _resolve_factor(part, engine, stretch)
        out = x if out is None else product(out, x)
    return out


def cmd_massey(cfg: RunConfig, args) -> int:
    engine = cfg.engine()
    a, b, c = (resolve(x, engine, cfg.stretch) for x in args.classes)
    try:
        r = massey3(a, b, c, engine)
    except NotDefined as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT
    labels = class_labels(engine, *r.bidegree)
    r = type(r)(r.bidegree, r.value, r.value_element, r.indeterminacy, r.homology_dim, tuple(labels))
    s, t = r.bidegree
    lines = [f"{r.describe()}, indeterminacy {r.indeterminacy_dim}",
             f"bidegree (s,t) = ({s},{t}), stem {t - s}",
             f"strictly defined: {'yes' if r.strictly_defined else 'no'}",
             f"representative: {r.value_element}"]
    if not r.strictly_defined:
        lines.append("elements: " + ", ".join(r.describe(x) for x in r.elements()))
    _out("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# charts and deduction


def parse_what_if(text: str) -> tuple[int, frozenset, frozenset]:
    m = re.fullmatch(r"d(\d+):([^=]+)=(.*)", text.strip())
    if not m:
        raise InputError(f"bad --what-if {text!r}; expected e.g. d2:D1=0 or d2:D1=h0^2h3g2")
    return int(m.group(1)), sseq.parse_expr(m.group(2)), sseq.parse_expr(m.group(3))


def _load(chart_path, facts_path, default_chart, default_facts):
    chart_path = chart_path or str(sseq.data_path(default_chart))
    chart = sseq.load_chart(chart_path)
    if facts_path == "-":
        facts = sseq.Facts()
    else:
        facts = sseq.load_facts(facts_path or str(sseq.data_path(default_facts)), chart)
    return chart, facts


def cmd_propagate(cfg: RunConfig, args) -> int:
    chart, facts = _load(args.chart, args.facts, MOTIVIC_CHART, MOTIVIC_FACTS)
    for _, src, val in cfg.what_if:
        for n in src | val:
            if n not in chart.by_name:
                raise InputError(f"--what-if mentions unknown generator {n}")
    state = sseq.run_page(chart, facts, what_if=cfg.what_if)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            for d in state.log:
                fh.write(json.dumps(d.to_json(), sort_keys=True, ensure_ascii=False) + "\n")
    text = [d.human() for d in state.log]
    if state.contradicted:
        text.append("")
        text += [f"contradiction: {d.human()}" for d in state.contradictions]
        _out("\n".join(text) + "\n", cfg.output)
        return EXIT_CONTRADICTION
    unresolved = state.unresolved()
    text.append("")
    text.append(f"page {state.page}: {len(chart.generators) - len(unresolved)} of {len(chart.generators)} "
                f"differentials determined")
    if unresolved:
        text.append("undetermined: " + ", ".join(unresolved))
    if args.export and not unresolved:
        nxt = sseq.turn_page(chart, state)
        with open(args.export, "w", encoding="utf-8") as fh:
            json.dump(nxt.to_json(), fh, indent=1, ensure_ascii=False)
            fh.write("\n")
        text.append(f"E{nxt.page} written to {args.export}")
    _out("\n".join(text) + "\n", cfg.output)
    return EXIT_OK


def cmd_chart(cfg: RunConfig, args) -> int:
    if args.source == "ext":
        engine = cfg.engine()
        table = build_table(cfg, engine)
        pic = picture_from_ext(table, engine)
        if args.stems:
            lo, hi = args.stems
            keep = [i for i, d in enumerate(pic.dots) if lo <= d[0] <= hi]
            remap = {old: new for new, old in enumerate(keep)}
            pic.dots = [pic.dots[i] for i in keep]
            pic.lines = [(remap[a], remap[b], op) for a, b, op in pic.lines if a in remap and b in remap]
    else:
        chart = sseq.load_chart(args.source)
        state = None
        if args.facts:
            facts = sseq.load_facts(args.facts, chart)
            state = sseq.run_page(chart, facts, what_if=cfg.what_if)
        pic = picture_from_chart(chart, state)
    _out(render_svg(pic) if args.format == "svg" else render_text(pic), cfg.output)
    return EXIT_OK


def cmd_groups(cfg: RunConfig, args) -> int:
    chart, facts = _load(args.chart, args.facts, CLASSICAL_CHART, CLASSICAL_FACTS)
    try:
        einf, _ = sseq.run_to_einf(chart, facts, what_if=cfg.what_if)
    except sseq.Contradiction as e:
        print(f"contradiction: {e}", file=sys.stderr)
        return EXIT_CONTRADICTION
    lines = []
    for stem in args.stem:
        order = sseq.stem_order(einf, stem)
        groups, branches = sseq.stem_group_possibilities(einf, stem, facts.extensions)
        dots = [g.name for g in einf.generators if g.degree.stem == stem]
        lines.append(f"stem {stem}: order {order} = 2^{order.bit_length() - 1}")
        lines.append(f"  E_inf dots: {', '.join(dots)}")
        for g in groups:
            lines.append(f"  {g}")
        if branches:
            lines.append(f"  branching on unknown extension: {'; '.join(branches)}")
    _out("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("--cache", default=None,
                        help="slice cache directory (default: $ADAMS_CACHE, else no cache)")
    common.add_argument("--convention", choices=("lex-least", "lex-greatest"), default="lex-least",
                        help="which term of a representative is its tag")
    common.add_argument("--memory-mb", type=float, default=2048, help="per-slice matrix memory ceiling")
    common.add_argument("--stretch", action="store_true", help=f"allow t > {STRETCH_T} (hours)")
    common.add_argument("-o", "--output", default=None, help="write output here instead of stdout")

    p = _Parser(prog="adams", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    q = sub.add_parser("ext", parents=[common], help="Ext dimensions from the Lambda algebra")
    q.add_argument("--max-t", type=int, required=True)
    q.add_argument("--max-s", type=int, default=None)
    q.add_argument("--json", action="store_true", help="export classes as JSON")
    q.add_argument("--classes", action="store_true", help="list every class with its tag")

    q = sub.add_parser("massey", parents=[common], help="three-fold Massey product")
    q.add_argument("classes", nargs=3, metavar="CLASS", help="catalog name, power (h2^2), product (h1*h3) or tag")

    q = sub.add_parser("propagate", parents=[common], help="deduce differentials on a chart")
    q.add_argument("chart", nargs="?", default=None, help="chart JSON (default: shipped motivic mini-chart)")
    q.add_argument("facts", nargs="?", default=None, help="facts JSON, or - for none (default: shipped facts)")
    q.add_argument("--what-if", action="append", default=[], metavar="dR:SOURCE=VALUE",
                   help="inject a differential in a branch, e.g. d2:D1=0")
    q.add_argument("--log", default=None, help="write the deduction log as JSON lines")
    q.add_argument("--export", default=None, help="write the next page's chart as JSON")

    q = sub.add_parser("chart", parents=[common], help="render a chart as SVG or text")
    q.add_argument("source", help="'ext' for the Lambda E2 page, or a chart JSON file")
    q.add_argument("--facts", default=None, help="facts JSON; draws the deduced differentials")
    q.add_argument("--what-if", action="append", default=[], metavar="dR:SOURCE=VALUE")
    q.add_argument("--max-t", type=int, default=20)
    q.add_argument("--stems", type=int, nargs=2, default=None, metavar=("LO", "HI"))
    q.add_argument("--format", choices=("svg", "text"), default="svg")

    q = sub.add_parser("groups", parents=[common], help="stable stems from the E_infinity page")
    q.add_argument("chart", nargs="?", default=None, help="chart JSON (default: shipped stems 51-52 chart)")
    q.add_argument("facts", nargs="?", default=None, help="facts JSON (default: shipped facts)")
    q.add_argument("--stem", type=int, action="append", default=None)
    q.add_argument("--what-if", action="append", default=[], metavar="dR:SOURCE=VALUE")
    return p


COMMANDS = {"ext": cmd_ext, "massey": cmd_massey, "propagate": cmd_propagate, "chart": cmd_chart,
            "groups": cmd_groups}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:  # usage errors and --help
        return e.code if isinstance(e.code, int) else EXIT_INPUT
    try:
        if args.subcommand == "groups" and not args.stem:
            args.stem = [51, 52]
        cfg = RunConfig(args.subcommand, getattr(args, "max_t", 20), getattr(args, "max_s", None),
                        args.cache or os.environ.get("ADAMS_CACHE"), args.threads, args.convention,
                        args.memory_mb, args.stretch, args.output,
                        [parse_what_if(w) for w in getattr(args, "what_if", [])])
        return COMMANDS[args.subcommand](cfg, args)
    except (InputError, sseq.ChartError, sseq.IncompleteStem, sseq.UnresolvedDifferentials, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ResourceBudgetExceeded, RewriteBudgetExceeded, MemoryError) as e:
        print(f"budget exhausted: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
