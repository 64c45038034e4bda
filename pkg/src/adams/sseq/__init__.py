"""Deduction engine for Adams spectral sequence charts."""

from importlib import resources

from .chart import (UNKNOWN, ChartAlgebra, ChartError, ChartGenerator, TriDegree, chart_from_json,
                    format_expr, load_chart, parse_expr)
from .engine import (BracketOracle, Contradiction, DifferentialState, UnresolvedDifferentials,
                     assert_differential, leibniz_closure, moss_constraint, propagate, run_page,
                     run_to_einf, seed, turn_page)
from .facts import (DifferentialFact, ExtensionFact, Facts, MasseyFact, PermanentFact, facts_from_json,
                    load_facts)
from .groups import AbelianGroup, IncompleteStem, stem_group_possibilities, stem_order


def data_path(name: str):
    """Path of a shipped data file, e.g. ``data_path("motivic_mini_chart.json")``."""
    return resources.files("adams") / "data" / name


def report(state: DifferentialState) -> list[dict]:
    """Machine-readable deduction log (one dict per deduction)."""
    return [d.to_json() for d in state.log]


__all__ = [
    "UNKNOWN", "AbelianGroup", "BracketOracle", "ChartAlgebra", "ChartError", "ChartGenerator",
    "Contradiction", "DifferentialFact", "DifferentialState", "ExtensionFact", "Facts",
    "IncompleteStem", "MasseyFact", "PermanentFact", "TriDegree", "UnresolvedDifferentials",
    "assert_differential", "chart_from_json", "data_path", "facts_from_json", "format_expr",
    "leibniz_closure", "load_chart", "load_facts", "moss_constraint", "parse_expr", "propagate",
    "report", "run_page", "run_to_einf", "seed", "stem_group_possibilities", "stem_order", "turn_page",
]
