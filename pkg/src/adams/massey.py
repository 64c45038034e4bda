"""Three-fold Massey products in the homology of the Lambda algebra.

Signs are dropped throughout (everything is mod 2).  For cycles a, b, c with
ab = d(u) and bc = d(v) the bracket <a, b, c> is the coset of uc + av modulo
a.H + H.c, where the two H's are the homology groups in the bidegrees of v
and u respectively.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import f2
from .ext import HomologyClass, LambdaExt, default_engine
from .f2 import AffineSubspace
from .lambda_algebra import Bidegree, LambdaElement, differential, product


class NotDefined(ValueError):
    """The bracket is not defined because one of the products is nonzero in homology."""

    def __init__(self, which: str, classes: str):
        self.which = which
        super().__init__(f"NOT_DEFINED: {which} = {classes} is nonzero")


@dataclass(frozen=True)
class MasseyResult:
    bidegree: Bidegree
    value: int
    value_element: LambdaElement
    indeterminacy: AffineSubspace
    homology_dim: int
    labels: tuple[str, ...] = ()

    @property
    def strictly_defined(self) -> bool:
        return self.indeterminacy.dim == 0

    @property
    def indeterminacy_dim(self) -> int:
        return self.indeterminacy.dim

    def elements(self) -> list[int]:
        """Every element of the bracket, as homology coordinates."""
        return sorted(self.indeterminacy.translate(self.value).points())

    def describe(self, coords: int | None = None) -> str:
        coords = self.value if coords is None else coords
        if not coords:
            return "0"
        return " + ".join(self.labels[i] if i < len(self.labels) else f"x{i}" for i in f2.iter_bits(coords))

    def __str__(self):
        return (f"{self.describe()} at (s,t)={tuple(self.bidegree)}, "
                f"indeterminacy {self.indeterminacy_dim}")


def _rep(x) -> LambdaElement:
    if isinstance(x, HomologyClass):
        return x.representative
    if isinstance(x, LambdaElement):
        return x
    raise TypeError(f"expected a homology class or cycle, got {type(x).__name__}")


def _random_cycle(engine: LambdaExt, bideg: Bidegree, rng: random.Random) -> LambdaElement:
    h = engine.homology(*bideg)
    v = 0
    for r in list(h.reps) + list(h.boundary_rows):
        if rng.random() < 0.5:
            v ^= r
    return h.element(v)


def massey3(a, b, c, engine: LambdaExt | None = None, rng: random.Random | None = None) -> MasseyResult:
    """<a, b, c> from cochain representatives.

    ``rng`` perturbs the bounding cochains by random cycles; it exists so the
    tests can check that the answer only moves inside the indeterminacy.
    """
    engine = engine or default_engine()
    ra, rb, rc = _rep(a), _rep(b), _rep(c)
    for x in (ra, rb, rc):
        if not differential(x).is_zero():
            raise ValueError(f"{x} is not a cycle")
    ab = product(ra, rb)
    bc = product(rb, rc)
    u = engine.bound_by(ab)
    if u is None:
        raise NotDefined("a*b", engine.homology(*ab.bidegree).describe(engine.class_of(ab)))
    v = engine.bound_by(bc)
    if v is None:
        raise NotDefined("b*c", engine.homology(*bc.bidegree).describe(engine.class_of(bc)))
    if rng is not None:
        u = u + _random_cycle(engine, u.bidegree, rng)
        v = v + _random_cycle(engine, v.bidegree, rng)

    bideg = Bidegree(ra.s + rb.s + rc.s - 1, ra.t + rb.t + rc.t)
    value_el = product(u, rc) + product(ra, v)
    if value_el.is_zero():
        value_el = LambdaElement.zero(*bideg)
    target = engine.homology(*bideg)
    value = target.coordinates(value_el) if not value_el.is_zero() else 0

    gens = []
    for x in engine.homology_basis(rb.s + rc.s - 1, rb.t + rc.t):
        gens.append(target.coordinates(product(ra, x.representative)) if not ra.is_zero() else 0)
    for x in engine.homology_basis(ra.s + rb.s - 1, ra.t + rb.t):
        gens.append(target.coordinates(product(x.representative, rc)) if not rc.is_zero() else 0)
    indet = AffineSubspace.linear(target.dim, gens)
    labels = tuple(c.label() for c in target.classes)
    return MasseyResult(bideg, value, value_el, indet, target.dim, labels)


def bracket_contains(r: MasseyResult, x, engine: LambdaExt | None = None) -> bool:
    """True iff x lies in the bracket; x is a homology class, a cycle, or coordinates."""
    if isinstance(x, int):
        coords = x
    else:
        rep = _rep(x)
        if rep.is_zero():
            coords = 0
        else:
            if rep.bidegree != r.bidegree:
                raise ValueError(f"bidegree mismatch: {tuple(rep.bidegree)} vs {tuple(r.bidegree)}")
            engine = engine or default_engine()
            coords = engine.homology(*rep.bidegree).coordinates(rep)
    return r.indeterminacy.contains(coords ^ r.value)
