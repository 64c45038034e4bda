"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines are printed in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
Criteria 7 and 8 run only with ``ADAMS_STRETCH=1``: the (6,60) cell they
need takes ~39 GB of matrix storage.
"""

from __future__ import annotations

import os
import random
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from adams import cli, sseq  # noqa: E402
from adams.cobar import cobar_ext_dims  # noqa: E402
from adams.ext import LambdaExt, ResourceBudgetExceeded, default_catalog  # noqa: E402
from adams.lambda_algebra import LambdaElement, admissible_basis, differential, product  # noqa: E402
from adams.massey import bracket_contains, massey3  # noqa: E402
from oracles.resolution import resolution_ext_dims  # noqa: E402

STRETCH = os.environ.get("ADAMS_STRETCH") == "1"
RESULTS: list[str] = []
GATE_NOTE = "gated; set ADAMS_STRETCH=1 (needs ~39 GB of RAM for the (6,60) cell)"


def record(n: int, title: str, ok: bool | None, detail: str) -> None:
    status = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
    line = f"{status} [{n}] {title}: {detail}"
    RESULTS.append(line)
    print(line)


def h(i: int) -> LambdaElement:
    return LambdaElement.generator((1 << i) - 1)


def _random_element(rng, max_t):
    while True:
        t = rng.randint(1, max_t)
        s = rng.randint(1, min(t, 5))
        basis = admissible_basis(s, t)
        if basis:
            return LambdaElement((s, t), rng.sample(basis, rng.randint(1, min(3, len(basis)))))


def check_1():
    count = 0
    bad = []
    for t in range(31):
        for s in range(t + 1):
            for m in admissible_basis(s, t):
                count += 1
                if not differential(differential(LambdaElement.monomial(m))).is_zero():
                    bad.append(m)
    rng = random.Random(31337)
    leibniz_bad = assoc_bad = 0
    for _ in range(1000):
        x = _random_element(rng, 12)
        y = _random_element(rng, 25 - x.t)
        if differential(product(x, y)) != product(differential(x), y) + product(x, differential(y)):
            leibniz_bad += 1
    for _ in range(1000):
        x = _random_element(rng, 9)
        y = _random_element(rng, max(1, (25 - x.t) // 2))
        z = _random_element(rng, max(1, 25 - x.t - y.t))
        if product(product(x, y), z) != product(x, product(y, z)):
            assoc_bad += 1
    ok = not bad and not leibniz_bad and not assoc_bad
    return ok, (f"d^2=0 on all {count} admissible monomials with t<=30 ({len(bad)} failures); "
                f"Leibniz 1000 random pairs ({leibniz_bad} failures); "
                f"associativity 1000 random triples ({assoc_bad} failures), t<=25")


def check_2():
    lam = LambdaExt().ext_dimensions(24)
    skipped = []
    cobar = cobar_ext_dims(24, skipped=skipped)
    cobar_bad = [k for k, d in cobar.items() if lam.get(k, 0) != d]
    res = {k: v for k, v in resolution_ext_dims(24).items() if v}
    res_bad = sorted(set(lam.items()) ^ set(res.items()))
    cells = sum(1 for t in range(25) for s in range(t + 1))
    ok = not cobar_bad and not res_bad and len(cobar) + len(skipped) == cells
    return ok, (f"{cells} cells with t<=24: cobar oracle agrees on all {len(cobar)} cells within its "
                f"size cap ({len(cobar_bad)} mismatches); the other {len(skipped)} cells have cochain "
                f"groups up to ~1.7e7 and are checked against the independent minimal-resolution "
                f"oracle, which agrees on every cell ({len(res_bad)} mismatches)")


def check_3():
    start = time.perf_counter()
    engine = LambdaExt()
    r = massey3(h(1), h(0), product(h(2), h(2)), engine)
    elapsed = time.perf_counter() - start
    c0 = engine.homology_basis(3, 11)
    ok = (r.bidegree == (3, 11) and r.indeterminacy_dim == 0 and len(c0) == 1
          and r.elements() == [1] and bracket_contains(r, c0[0], engine) and elapsed < 1.0)
    return ok, f"<h1,h0,h2^2> = {{c0}} at (s,t)={tuple(r.bidegree)}, indeterminacy {r.indeterminacy_dim}, " \
               f"{elapsed * 1000:.0f} ms on a fresh engine"


def check_4():
    chart = sseq.load_chart(sseq.data_path("motivic_mini_chart.json"))
    facts = sseq.load_facts(sseq.data_path("motivic_mini_facts.json"), chart)
    state = sseq.run_page(chart, facts)
    S = state.spaces["D1"]
    unique = S is not None and S.is_point and state.known("D1") == frozenset({"h0^2h3g2"})
    branch = sseq.run_page(chart, facts, what_if=[(2, frozenset({"D1"}), frozenset())])
    with open(os.devnull, "w") as sink:
        old, sys.stdout = sys.stdout, sink
        try:
            code = cli.main(["propagate", "--what-if", "d2:D1=0"])
        finally:
            sys.stdout = old
    ok = unique and not state.contradicted and branch.contradicted and code == 2
    return ok, (f"d2(D1) = {state.describe('D1')} (a single point: {unique}); "
                f"what-if d2(D1)=0 -> contradiction {branch.contradicted}, exit code {code}")


def check_5():
    chart = sseq.load_chart(sseq.data_path("classical_51_52_chart.json"))
    facts = sseq.load_facts(sseq.data_path("classical_51_52_facts.json"), chart)
    einf, _ = sseq.run_to_einf(chart, facts)
    order51 = sseq.stem_order(einf, 51)
    g51, b51 = sseq.stem_group_possibilities(einf, 51, facts.extensions)
    g52, b52 = sseq.stem_group_possibilities(einf, 52, facts.extensions)
    ok = (order51 == 128 and len(g51) == 2 and b51 == ["h0h3g2 → gn"]
          and [g.exponents for g in g52] == [(1, 1, 1)] and not b52)
    return ok, (f"stem 51 order {order51}, groups {{{', '.join(map(str, g51))}}} branching on {b51}; "
                f"stem 52 {{{', '.join(map(str, g52))}}}")


def check_6(tmp):
    outs = {}
    for threads in (1, 4):
        path = os.path.join(tmp, f"ext{threads}.json")
        svg = os.path.join(tmp, f"chart{threads}.svg")
        with open(os.devnull, "w") as sink:
            old, sys.stdout = sys.stdout, sink
            try:
                cli.main(["ext", "--max-t", "22", "--json", "--threads", str(threads), "-o", path])
                cli.main(["chart", "ext", "--max-t", "22", "--threads", str(threads), "-o", svg])
            finally:
                sys.stdout = old
        with open(path, "rb") as a, open(svg, "rb") as b:
            outs[threads] = (a.read(), b.read())
    ok = outs[1] == outs[4] and len(outs[1][0]) > 0
    return ok, f"Ext JSON ({len(outs[1][0])} bytes) and SVG chart exports for t<=22 identical with 1 and 4 workers"


def check_7():
    cat = default_catalog()
    found = {}
    for name in ("D1", "G"):
        e = cat[name]
        engine = LambdaExt(e.convention)
        try:
            tags = [c.tag for c in engine.homology_basis(e.s, e.stem + e.s)]
        except ResourceBudgetExceeded as err:
            found[name] = f"not computed ({err})"
            continue
        found[name] = e.tag in tags
    ok = all(v is True for v in found.values())
    return ok, f"catalog tags ({cat['D1'].convention} convention) found at (5,57) and (6,60): {found}"


def check_8():
    engine = LambdaExt(default_catalog()["D1"].convention)
    cat = default_catalog()
    d1 = next(c for c in engine.homology_basis(5, 57) if c.tag == cat["D1"].tag)
    g = next(c for c in engine.homology_basis(6, 60) if c.tag == cat["G"].tag)
    r = massey3(h(1), h(0), d1, engine)
    ok = bracket_contains(r, g, engine)
    return ok, f"<h1,h0,D1> = {r}; contains G: {ok}"


TITLES = {
    1: "Lambda algebra identities",
    2: "Ext dimensions against independent oracles, t<=24",
    3: "Massey product <h1,h0,h2^2>",
    4: "Deduction of d2(D1) on the mini-chart",
    5: "Stems 51 and 52",
    6: "Determinism across worker counts",
    7: "Tags of D1 and G (stretch)",
    8: "<h1,h0,D1> contains G (stretch)",
}


def _run(n, *args):
    ok, detail = {1: check_1, 2: check_2, 3: check_3, 4: check_4, 5: check_5, 6: check_6,
                  7: check_7, 8: check_8}[n](*args)
    record(n, TITLES[n], ok, detail)
    return ok


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_criterion(n):
    assert _run(n)


def test_criterion_6(tmp_path):
    assert _run(6, str(tmp_path))


@pytest.mark.parametrize("n", [7, 8])
def test_stretch_criterion(n):
    if not STRETCH:
        record(n, TITLES[n], None, GATE_NOTE)
        pytest.skip("stretch criterion; set ADAMS_STRETCH=1")
    assert _run(n)


def main() -> int:
    import tempfile
    failures = 0
    for n in range(1, 9):
        if n in (7, 8) and not STRETCH:
            record(n, TITLES[n], None, GATE_NOTE)
            continue
        try:
            ok = _run(n, tempfile.mkdtemp()) if n == 6 else _run(n)
        except Exception as e:  # report and keep going
            record(n, TITLES[n], False, f"raised {type(e).__name__}: {e}")
            ok = False
        failures += not ok
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
