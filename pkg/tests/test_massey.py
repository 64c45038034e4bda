"""Three-fold Massey products in Ext."""

import random
import time

import pytest

from adams import f2
from adams.ext import default_engine
from adams.lambda_algebra import LambdaElement, product
from adams.massey import NotDefined, bracket_contains, massey3


def h(i):
    return LambdaElement.generator((1 << i) - 1)


def cls(s, t, k=0):
    return default_engine().homology_basis(s, t)[k]


def coords(x):
    e = default_engine()
    return e.homology(*x.bidegree).coordinates(x)


def independent_indeterminacy(a, b, c):
    """a.H + H.c computed directly from homology bases (oracle for the engine's coset)."""
    e = default_engine()
    s, t = a.s + b.s + c.s - 1, a.t + b.t + c.t
    target = e.homology(s, t)
    gens = []
    for x in e.homology_basis(b.s + c.s - 1, b.t + c.t):
        gens.append(target.coordinates(product(a, x.representative)))
    for x in e.homology_basis(a.s + b.s - 1, a.t + b.t):
        gens.append(target.coordinates(product(x.representative, c)))
    return f2.Echelon(gens).rank


def test_c0_bracket():
    start = time.perf_counter()
    r = massey3(h(1), h(0), product(h(2), h(2)))
    assert time.perf_counter() - start < 1.0
    assert r.bidegree == (3, 11)
    assert r.value == 1 and r.homology_dim == 1
    assert r.indeterminacy_dim == 0 and r.strictly_defined
    assert bracket_contains(r, cls(3, 11))


@pytest.mark.parametrize("a,b,c,want", [
    # <h_{i+1}, h_i, h_{i+1}> = h_i h_{i+2}  and  <h_i, h_{i+1}, h_i> = h_{i+1}^2
    (1, 0, 1, (0, 2)),
    (2, 1, 2, (1, 3)),
    (0, 1, 0, (1, 1)),
    (1, 2, 1, (2, 2)),
    (2, 3, 2, (3, 3)),
])
def test_classical_brackets(a, b, c, want):
    r = massey3(h(a), h(b), h(c))
    assert r.strictly_defined
    assert r.value == coords(product(h(want[0]), h(want[1]))) != 0


def test_zero_bracket():
    r = massey3(h(0), h(1), h(2))
    assert r.homology_dim == 0 and r.value == 0 and r.describe() == "0"


def test_bracket_with_indeterminacy():
    # <h2, h0 h2, h0^2> lands at stem 7, s 4 with one-dimensional indeterminacy {0, h0^3 h3}
    a, b, c = h(2), product(h(0), h(2)), product(h(0), h(0))
    r = massey3(a, b, c)
    assert r.indeterminacy_dim == independent_indeterminacy(a, b, c) == 1
    h0cubed_h3 = coords(product(product(product(h(0), h(0)), h(0)), h(3)))
    assert sorted(r.elements()) == sorted({0, h0cubed_h3})
    assert bracket_contains(r, 0) and bracket_contains(r, h0cubed_h3)


@pytest.mark.parametrize("triple", [
    (h(1), h(0), product(h(2), h(2))),
    (h(2), product(h(0), h(2)), product(h(0), h(0))),
    (h(3), h(2), product(h(0), h(2))),
    (h(3), product(h(1), h(3)), product(h(1), h(1))),
])
def test_perturbation_moves_only_inside_indeterminacy(triple):
    base = massey3(*triple)
    rng = random.Random(5)
    for _ in range(25):
        r = massey3(*triple, rng=rng)
        assert r.indeterminacy == base.indeterminacy
        assert base.indeterminacy.contains(r.value ^ base.value)


def test_changing_representatives_of_inputs():
    # h0 h2 = l3 l0 is homologous to l2 l1, since d(l4) = l2 l1 + l3 l0
    a, c = h(2), product(h(0), h(0))
    b1 = product(h(0), h(2))
    b2 = b1 + LambdaElement.generator(4).differential()
    assert b2 != b1 and coords(b2) == coords(b1)
    r1, r2 = massey3(a, b1, c), massey3(a, b2, c)
    assert r1.indeterminacy == r2.indeterminacy
    assert r1.indeterminacy.contains(r1.value ^ r2.value)


def test_not_defined_names_product():
    with pytest.raises(NotDefined) as err:
        massey3(h(0), h(0), h(1))
    assert err.value.which == "a*b"
    assert "NOT_DEFINED" in str(err.value)
    with pytest.raises(NotDefined) as err:
        massey3(h(1), h(0), h(0))
    assert err.value.which == "b*c"


def test_rejects_non_cycles():
    with pytest.raises(ValueError):
        massey3(LambdaElement.generator(2), h(0), h(1))


def test_bracket_contains_checks_bidegree():
    r = massey3(h(1), h(0), product(h(2), h(2)))
    with pytest.raises(ValueError):
        bracket_contains(r, h(3))


def test_accepts_homology_classes():
    r = massey3(cls(1, 2), cls(1, 1), cls(2, 8))
    assert r.value == 1 and str(r).startswith("[") and "indeterminacy 0" in str(r)
