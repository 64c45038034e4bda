"""Adams charts as SVG or plain text.

Stem runs rightward and filtration upward, one grid unit per step.  Output
depends only on the input, so the same chart always renders to the same
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .lambda_algebra import LambdaElement, product

# -- styling, all in one place -------------------------------------------------
UNIT = 36
MARGIN = 44
DOT_RADIUS = 3.2
DOT_SPREAD = 7
FONT_SIZE = 9
COLORS = {"dot": "#000000", "h0": "#000000", "h1": "#1f5fbf", "h2": "#1f9f4f",
          "arrow": "#c0392b", "grid": "#e4e4e4", "label": "#333333"}
LINE_WIDTH = 1.0


@dataclass
class Picture:
    dots: list[tuple[int, int, str]] = field(default_factory=list)  # (stem, s, label)
    lines: list[tuple[int, int, str]] = field(default_factory=list)  # (dot, dot, "h0"/"h1"/"h2")
    arrows: list[tuple[int, int, int]] = field(default_factory=list)  # (source, target, page)
    title: str = ""

    def positions(self) -> list[tuple[float, float]]:
        """Dot centres in chart units, with dots sharing a cell spread sideways."""
        cells: dict[tuple[int, int], list[int]] = {}
        for i, (stem, s, _) in enumerate(self.dots):
            cells.setdefault((stem, s), []).append(i)
        pos = [(0.0, 0.0)] * len(self.dots)
        for (stem, s), members in cells.items():
            k = len(members)
            for j, i in enumerate(members):
                offset = (j - (k - 1) / 2) * DOT_SPREAD / UNIT
                pos[i] = (stem + offset, float(s))
        return pos


def picture_from_ext(table, engine, operators=("h0", "h1", "h2")) -> Picture:
    """Dots for every class of an Ext table, with lines for h0, h1, h2 products."""
    pic = Picture(title=f"Ext, t <= {table.metadata.get('max_t')}")
    index = {}
    for c in table:
        index[(c.s, c.t, c.index)] = len(pic.dots)
        pic.dots.append((c.stem, c.s, c.label()))
    gens = {"h0": 0, "h1": 1, "h2": 3}
    for c in table:
        for op in operators:
            i = gens[op]
            g = LambdaElement.generator(i)
            s, t = c.s + 1, c.t + i + 1
            if t > table.metadata.get("max_t", t) or not table.at(s, t):
                continue
            coords = engine.homology(s, t).coordinates(product(g, c.representative))
            k = 0
            while coords:
                if coords & 1 and (s, t, k) in index:
                    pic.lines.append((index[(c.s, c.t, c.index)], index[(s, t, k)], op))
                coords >>= 1
                k += 1
    return pic


def picture_from_chart(chart, state=None, operators=("h0", "h1", "h2")) -> Picture:
    """Dots of a chart, lines for listed h_i products, arrows for known nonzero d_r."""
    pic = Picture(title=chart.metadata.get("title", "") + (f" (E{chart.page})" if chart.page else ""))
    index = {}
    for g in chart.generators:
        if g.name == chart.tau:
            continue
        index[g.name] = len(pic.dots)
        pic.dots.append((g.degree.stem, g.degree.s, g.name))
    for op in operators:
        if op not in chart.by_name:
            continue
        for g in chart.generators:
            if g.name not in index:
                continue
            p = chart.product_of(op, g.name)
            if not isinstance(p, frozenset):
                continue
            for x in sorted(p, key=chart.order.get):
                if x in index:
                    pic.lines.append((index[g.name], index[x], op))
    if state is not None:
        for g in chart.generators:
            value = state.known(g.name) if g.name in index else None
            for x in sorted(value or (), key=chart.order.get):
                if x in index:
                    pic.arrows.append((index[g.name], index[x], state.page))
    return pic


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def render_svg(pic: Picture) -> str:
    pos = pic.positions()
    if pic.dots:
        stems = [p[0] for p in pos]
        ss = [p[1] for p in pos]
        lo_x, hi_x = int(min(stems)) - 1, int(max(stems) + 0.999) + 1
        lo_y, hi_y = 0, int(max(ss)) + 1
    else:
        lo_x, hi_x, lo_y, hi_y = 0, 1, 0, 1
    width = (hi_x - lo_x) * UNIT + 2 * MARGIN
    height = (hi_y - lo_y) * UNIT + 2 * MARGIN

    def X(x):
        return MARGIN + (x - lo_x) * UNIT

    def Y(y):
        return height - MARGIN - (y - lo_y) * UNIT

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    if pic.title:
        out.append(f'<title>{escape(pic.title)}</title>')
    out.append(f'<g stroke="{COLORS["grid"]}" stroke-width="0.5">')
    for x in range(lo_x, hi_x + 1):
        out.append(f'<line x1="{_fmt(X(x))}" y1="{_fmt(Y(lo_y))}" x2="{_fmt(X(x))}" y2="{_fmt(Y(hi_y))}"/>')
    for y in range(lo_y, hi_y + 1):
        out.append(f'<line x1="{_fmt(X(lo_x))}" y1="{_fmt(Y(y))}" x2="{_fmt(X(hi_x))}" y2="{_fmt(Y(y))}"/>')
    out.append('</g>')
    out.append(f'<g font-family="sans-serif" font-size="{FONT_SIZE}" fill="{COLORS["label"]}">')
    for x in range(lo_x, hi_x + 1):
        out.append(f'<text x="{_fmt(X(x))}" y="{_fmt(Y(lo_y) + 14)}" text-anchor="middle">{x}</text>')
    for y in range(lo_y, hi_y + 1):
        out.append(f'<text x="{_fmt(X(lo_x) - 8)}" y="{_fmt(Y(y) + 3)}" text-anchor="end">{y}</text>')
    out.append('</g>')
    for a, b, op in pic.lines:
        (x1, y1), (x2, y2) = pos[a], pos[b]
        out.append(f'<line class="{op}" x1="{_fmt(X(x1))}" y1="{_fmt(Y(y1))}" x2="{_fmt(X(x2))}" '
                   f'y2="{_fmt(Y(y2))}" stroke="{COLORS[op]}" stroke-width="{LINE_WIDTH}"/>')
    if pic.arrows:
        out.append('<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" '
                   f'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="{COLORS["arrow"]}"/></marker></defs>')
    for a, b, page in pic.arrows:
        (x1, y1), (x2, y2) = pos[a], pos[b]
        out.append(f'<line class="d{page}" x1="{_fmt(X(x1))}" y1="{_fmt(Y(y1))}" x2="{_fmt(X(x2))}" '
                   f'y2="{_fmt(Y(y2))}" stroke="{COLORS["arrow"]}" stroke-width="{LINE_WIDTH}" '
                   f'marker-end="url(#head)"/>')
    for (x, y), (_, _, label) in zip(pos, pic.dots):
        out.append(f'<circle cx="{_fmt(X(x))}" cy="{_fmt(Y(y))}" r="{DOT_RADIUS}" fill="{COLORS["dot"]}">'
                   f'<title>{escape(label)}</title></circle>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def render_text(pic: Picture) -> str:
    """Aligned grid: number of dots per (stem, s), filtration upward."""
    if not pic.dots:
        return "(empty chart)\n"
    counts: dict[tuple[int, int], int] = {}
    for stem, s, _ in pic.dots:
        counts[(stem, s)] = counts.get((stem, s), 0) + 1
    stems = range(min(k[0] for k in counts), max(k[0] for k in counts) + 1)
    top = max(k[1] for k in counts)
    w = max(2, len(str(max(stems))), len(str(max(counts.values())))) + 1
    lab = len(str(top)) + 1
    lines = []
    for s in range(top, -1, -1):
        cells = "".join((str(counts[(n, s)]) if (n, s) in counts else ".").rjust(w) for n in stems)
        lines.append(f"{str(s).rjust(lab)} |{cells}")
    lines.append(" " * lab + " +" + "-" * (w * len(stems)))
    lines.append(" " * lab + "  " + "".join(str(n).rjust(w) for n in stems))
    return "\n".join(lines) + "\n"
