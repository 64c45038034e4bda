"""Charts, the differential deducer, page turning and group extraction."""

import json
import random

import pytest

from adams import f2
from adams import sseq
from adams.sseq import (UNKNOWN, AbelianGroup, ChartError, Contradiction, DifferentialState, Facts,
                        IncompleteStem, TriDegree, UnresolvedDifferentials, chart_from_json, facts_from_json,
                        leibniz_closure, propagate, run_page, run_to_einf, seed, stem_group_possibilities,
                        stem_order, turn_page)
from adams.sseq.engine import assert_differential
from adams.sseq.groups import _jordan_type

EVERYWHERE = [[-5, 60, 0, 30]]


def make_chart(dots, products=(), complete=EVERYWHERE, closed=False, tau=None, page=2):
    data = {"generators": [{"name": n, "stem": a, "s": b} for n, (a, b) in dots.items()],
            "products": [{"a": a, "b": b, "value": v} for a, b, v in products],
            "complete": complete, "closed": closed, "tau": tau, "page": page}
    return chart_from_json(data)


def make_facts(chart, differentials=(), permanent=(), massey=(), extensions=()):
    data = {"differentials": [{"page": p, "source": s, "value": v} for p, s, v in differentials],
            "permanent": list(permanent),
            "massey": [dict(zip(("a", "b", "c", "value", "strict"), m)) for m in massey],
            "extensions": list(extensions)}
    return facts_from_json(data, chart)


@pytest.fixture(scope="module")
def mini():
    chart = sseq.load_chart(sseq.data_path("motivic_mini_chart.json"))
    return chart, sseq.load_facts(sseq.data_path("motivic_mini_facts.json"), chart)


@pytest.fixture(scope="module")
def classical():
    chart = sseq.load_chart(sseq.data_path("classical_51_52_chart.json"))
    return chart, sseq.load_facts(sseq.data_path("classical_51_52_facts.json"), chart)


# a toy page: d2(x) = a forces d2(xy) = a*y = ay, and conversely
LEIBNIZ_DOTS = {"x": (1, 1), "y": (2, 1), "xy": (3, 2), "a": (0, 3), "ay": (2, 4)}
LEIBNIZ_PRODUCTS = [("x", "y", ["xy"]), ("a", "y", ["ay"])]


# -- loading ------------------------------------------------------------------

def test_chart_validation_collects_every_problem():
    data = {"generators": [{"name": "x", "stem": 1, "s": 1}, {"name": "x", "stem": 2, "s": 1},
                           {"name": "y", "stem": "three", "s": 1}],
            "products": [{"a": "x", "b": "z", "value": []}, {"a": "x", "b": "x", "value": ["x"]}],
            "page": 1}
    with pytest.raises(ChartError) as err:
        chart_from_json(data, "bad.json")
    text = "\n".join(err.value.problems)
    assert "duplicate" in text and "z" in text and "page" in text
    assert len(err.value.problems) >= 4


def test_chart_product_degree_mismatch_names_pair():
    with pytest.raises(ChartError) as err:
        make_chart({"x": (1, 1), "y": (2, 1), "z": (5, 5)}, [("x", "y", ["z"])])
    assert "x" in str(err.value) and "y" in str(err.value)


def test_weights_all_or_none():
    data = {"generators": [{"name": "x", "stem": 1, "s": 1, "weight": 1}, {"name": "y", "stem": 2, "s": 1}]}
    with pytest.raises(ChartError):
        chart_from_json(data)


def test_load_chart_reports_json_position(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"generators": [\n  {"name": "x",, }\n]}')
    with pytest.raises(ChartError) as err:
        sseq.load_chart(p)
    assert "line 2" in str(err.value)


def test_facts_degree_law():
    chart = make_chart(LEIBNIZ_DOTS, LEIBNIZ_PRODUCTS)
    with pytest.raises(ChartError) as err:
        make_facts(chart, differentials=[(2, ["x"], ["ay"])])
    assert "degree law" in str(err.value)
    with pytest.raises(ChartError):
        make_facts(chart, differentials=[(2, ["nope"], [])])


def test_chart_round_trips_through_json(mini):
    chart, _ = mini
    again = chart_from_json(json.loads(json.dumps(chart.to_json())))
    assert again.to_json() == chart.to_json()


def test_multiply_unknown_and_zero(mini):
    chart, _ = mini
    assert chart.multiply(frozenset({"h1"}), frozenset({"h2"})) is UNKNOWN
    assert chart.multiply(frozenset({"tau"}), frozenset({"h5c0d0"})) == frozenset()
    assert chart.multiply(frozenset({"h0"}), frozenset({"h0"})) == frozenset({"h0^2"})
    assert chart.multiply(frozenset({"c0"}), frozenset({"h5d0"})) == chart.multiply(
        frozenset({"h5d0"}), frozenset({"c0"}))
    with pytest.raises(TypeError):
        bool(UNKNOWN)


# -- deduction ---------------------------------------------------------------

def test_leibniz_forward():
    chart = make_chart(LEIBNIZ_DOTS, LEIBNIZ_PRODUCTS)
    state = run_page(chart, make_facts(chart, differentials=[(2, ["x"], ["a"])]))
    assert state.known("xy") == frozenset({"ay"})
    assert any(d.rule == "leibniz" and d.target == "d2(xy)" for d in state.log)


def test_leibniz_backward():
    chart = make_chart(LEIBNIZ_DOTS, LEIBNIZ_PRODUCTS)
    state = run_page(chart, make_facts(chart, differentials=[(2, ["xy"], ["ay"])]))
    assert state.known("x") == frozenset({"a"})


def test_unknown_product_blocks_inference():
    chart = make_chart(LEIBNIZ_DOTS, [("x", "y", ["xy"])])  # a*y not listed
    state = run_page(chart, make_facts(chart, differentials=[(2, ["x"], ["a"])]))
    assert state.known("xy") is None


def test_incomplete_target_stays_unknown():
    chart = make_chart({"x": (1, 1), "a": (0, 3)}, complete=[[1, 1, 1, 1]])
    state = run_page(chart, Facts())
    assert state.spaces["x"] is None and "x" in state.unresolved()


def test_empty_facts_give_empty_log():
    chart = make_chart({"x": (1, 1), "a": (0, 3)})
    state = run_page(chart, Facts())
    assert state.log == [] and state.unresolved() == ["x"]


def test_conflicting_assertions_contradict():
    chart = make_chart(LEIBNIZ_DOTS, LEIBNIZ_PRODUCTS)
    facts = make_facts(chart, differentials=[(2, ["x"], ["a"]), (2, ["x"], [])])
    state = run_page(chart, facts)
    assert state.contradicted
    assert state.contradictions[0].target == "d2(x)"


def test_leibniz_contradiction():
    chart = make_chart(LEIBNIZ_DOTS, LEIBNIZ_PRODUCTS)
    facts = make_facts(chart, differentials=[(2, ["x"], ["a"]), (2, ["xy"], [])])
    assert run_page(chart, facts).contradicted


def test_assert_rejects_wrong_page_and_degree():
    chart = make_chart(LEIBNIZ_DOTS, LEIBNIZ_PRODUCTS)
    state = DifferentialState(chart)
    with pytest.raises(ValueError):
        assert_differential(state, 3, frozenset({"x"}), frozenset({"a"}))
    with pytest.raises(ValueError):
        assert_differential(state, 2, frozenset({"x"}), frozenset({"ay"}))
    with pytest.raises(ValueError):
        assert_differential(state, 2, frozenset({"ghost"}), frozenset())


def test_closed_region_forces_boundary_zero():
    chart = make_chart({"x": (10, 1), "y": (9, 3)}, complete=[[10, 10, 1, 1]], closed=True)
    state = DifferentialState(chart)
    assert state.origin["x"] == "boundary" and state.known("x") == frozenset()


def test_flagship_deduction(mini):
    chart, facts = mini
    state = run_page(chart, facts)
    assert not state.contradicted
    assert state.known("D1") == frozenset({"h0^2h3g2"})
    assert state.unresolved() == []
    moss = [d for d in state.log if d.rule == "moss"]
    assert moss and moss[-1].target == "d2(D1)" and "eliminated 0" in moss[-1].note


def test_what_if_zero_contradicts(mini):
    chart, facts = mini
    state = run_page(chart, facts, what_if=[(2, frozenset({"D1"}), frozenset())])
    assert state.contradicted
    assert "D1" in state.contradictions[0].target


def test_idempotent(mini):
    chart, facts = mini
    state = run_page(chart, facts)
    n = len(state.log)
    again = propagate(chart, state.copy(), facts)
    assert len(again.log) == n and again.spaces == state.spaces


def test_confluent_under_random_orders(mini):
    chart, facts = mini
    reference = run_page(chart, facts).spaces
    for seed_ in range(12):
        assert run_page(chart, facts, rng=random.Random(seed_)).spaces == reference


def test_monotone_in_facts(mini):
    chart, facts = mini
    full = run_page(chart, facts)
    weaker = Facts(facts.differentials[:2], facts.permanent[:3], [], [])
    partial = run_page(chart, weaker)
    for name, S in full.spaces.items():
        P = partial.spaces[name]
        assert P is None or S.is_subset(P), name


def test_leibniz_closure_does_not_need_masseys(mini):
    chart, facts = mini
    state = DifferentialState(chart)
    seed(state, facts)
    leibniz_closure(chart, state)
    assert state.known("D1") is None  # only the Moss rule pins it down


def test_report_is_machine_readable(mini):
    chart, facts = mini
    rows = sseq.report(run_page(chart, facts))
    assert all({"id", "rule", "page", "target", "value", "premises"} <= set(r) for r in rows)
    json.dumps(rows)


# -- pages --------------------------------------------------------------------

def test_turn_page_toy():
    chart = make_chart(LEIBNIZ_DOTS, LEIBNIZ_PRODUCTS)
    state = run_page(chart, make_facts(chart, differentials=[(2, ["x"], ["a"])]))
    e3 = turn_page(chart, state)
    assert e3.page == 3
    assert [g.name for g in e3.generators] == ["y"]


def test_turn_page_requires_known_differentials():
    chart = make_chart({"x": (1, 1), "a": (0, 3)})
    with pytest.raises(UnresolvedDifferentials):
        turn_page(chart, run_page(chart, Facts()))


@pytest.mark.parametrize("seed_", range(8))
def test_turn_page_exactness(seed_):
    """Random d2 between two filtrations: E3 cell sizes are kernel and cokernel dimensions."""
    rng = random.Random(seed_)
    dots, diffs = {}, []
    sizes = {}
    for stem in range(0, 8, 2):
        src = [f"s{stem}_{i}" for i in range(rng.randint(0, 3))]
        tgt = [f"t{stem}_{i}" for i in range(rng.randint(0, 3))]
        for n in src:
            dots[n] = (stem + 1, 1)
        for n in tgt:
            dots[n] = (stem, 3)
        cols = []
        for n in src:
            value = [m for m in tgt if rng.random() < 0.5]
            diffs.append((2, [n], value))
            cols.append(sum(1 << tgt.index(m) for m in value))
        rank = f2.Echelon(cols).rank
        sizes[(stem + 1, 1)] = len(src) - rank
        sizes[(stem, 3)] = len(tgt) - rank
    chart = make_chart(dots)
    state = run_page(chart, make_facts(chart, differentials=diffs + [(2, [n], []) for n in dots
                                                                      if n.startswith("t")]))
    e3 = turn_page(chart, state)
    got = {}
    for g in e3.generators:
        got[(g.degree.stem, g.degree.s)] = got.get((g.degree.stem, g.degree.s), 0) + 1
    assert got == {k: v for k, v in sizes.items() if v}


def test_e3_of_mini_chart(mini):
    chart, facts = mini
    e3 = turn_page(chart, run_page(chart, facts))
    names = {g.name for g in e3.generators}
    assert "D1" not in names and "h0^2h3g2" not in names and "tauG" not in names
    assert "h0h3g2" in names and "h3g2" in names


# -- groups -------------------------------------------------------------------

def test_stems_51_and_52(classical):
    chart, facts = classical
    einf, states = run_to_einf(chart, facts)
    assert stem_order(einf, 51) == 128
    groups, branches = stem_group_possibilities(einf, 51, facts.extensions)
    assert [str(g) for g in groups] == ["ℤ/8⊕ℤ/8⊕ℤ/2", "ℤ/8⊕ℤ/4⊕ℤ/2⊕ℤ/2"]
    assert branches == ["h0h3g2 → gn"]
    assert stem_order(einf, 52) == 8
    groups, branches = stem_group_possibilities(einf, 52, facts.extensions)
    assert groups == [AbelianGroup((1, 1, 1))] and branches == []


def test_what_if_d4_removes_gn(classical):
    chart, facts = classical
    no_d2 = Facts([d for d in facts.differentials if d.source != frozenset({"D1"})],
                  facts.permanent, facts.massey, facts.extensions)
    what_if = [(2, frozenset({"D1"}), frozenset()), (3, frozenset({"D1"}), frozenset()),
               (4, frozenset({"D1"}), frozenset({"gn"}))]
    einf, _ = run_to_einf(chart, no_d2, what_if=what_if)
    names = {g.name for g in einf.generators}
    assert "gn" not in names and "D1" not in names
    groups, branches = stem_group_possibilities(einf, 51, no_d2.extensions)
    assert [g.ascii() for g in groups] == ["Z/8+Z/8+Z/2"] and branches == []


def test_run_to_einf_raises_on_contradiction(classical):
    chart, facts = classical
    with pytest.raises(Contradiction):
        run_to_einf(chart, facts, what_if=[(2, frozenset({"D1"}), frozenset())])


def test_empty_stem_has_order_one():
    chart = make_chart({"h0": (0, 1), "x": (3, 1)}, [("h0", "x", [])], complete=[[0, 5, 0, 5]], closed=True)
    assert stem_order(chart, 4) == 1
    groups, _ = stem_group_possibilities(chart, 4)
    assert [str(g) for g in groups] == ["0"]


def test_incomplete_stem_refused():
    chart = make_chart({"h0": (0, 1), "x": (3, 1)}, complete=[[0, 0, 0, 5]])
    with pytest.raises(IncompleteStem):
        stem_order(chart, 3)
    motivic = make_chart({"tau": (0, 0), "x": (3, 1)}, tau="tau")
    with pytest.raises(IncompleteStem):
        stem_order(motivic, 3)


def test_unlisted_h0_product_refused():
    chart = make_chart({"h0": (0, 1), "x": (3, 1), "y": (3, 2)})
    with pytest.raises(IncompleteStem):
        stem_group_possibilities(chart, 3)


def test_jordan_type():
    images = {"a": "b", "b": "c", "c": None, "d": None, "e": "f", "f": None}
    assert _jordan_type(images, list(images)) == AbelianGroup((3, 2, 1))
    assert AbelianGroup((3, 2, 1)).order == 64
    assert str(AbelianGroup(())) == "0"


def test_tridegree_shift():
    assert TriDegree(52, 5).shifted(2) == TriDegree(51, 7)
    assert str(TriDegree(3, 1)) == "(3,1)"
