import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_ideal
from netalg.errors import PreconditionError, ResourceExhaustedError
from netalg.groebner import (
    Ideal,
    elimination_ideal,
    groebner_basis,
    ideal_dimension,
    is_reduced,
    max_independent_set,
    parse_dump,
    s_polynomial,
)
from netalg.polyalg import MonomialOrder, VariableRing


def certificate_failures(ideal, gb):
    """Everything a reduced Groebner basis of ``ideal`` must satisfy."""
    bad = []
    if not is_reduced(gb):
        bad.append("not reduced")
    for g in ideal.generators:
        if gb.reduce(g):
            bad.append(f"generator {g} does not reduce to 0")
    for f, g in combinations(gb.elements, 2):
        if gb.reduce(s_polynomial(f, g, gb.order)):
            bad.append(f"S({f}, {g}) does not reduce to 0")
    return bad


@given(st.integers(0, 10**9), st.sampled_from(["lex", "grevlex"]))
@settings(max_examples=80, deadline=None)
def test_random_basis_certificates(seed, kind):
    ideal, order = random_ideal(random.Random(seed), order_kind=kind, max_terms=4)
    gb = groebner_basis(ideal, order)
    assert certificate_failures(ideal, gb) == []


@given(st.integers(0, 10**9))
@settings(max_examples=40, deadline=None)
def test_reduced_basis_is_independent_of_strategy(seed):
    ideal, order = random_ideal(random.Random(seed), max_terms=4)
    a = groebner_basis(ideal, order, strategy="normal")
    b = groebner_basis(ideal, order, strategy="sugar")
    assert sorted(map(str, a.elements)) == sorted(map(str, b.elements))


def test_textbook_grevlex_basis():
    ring = VariableRing(["x", "y"])
    order = MonomialOrder.grevlex(ring)
    ideal = Ideal(ring, [ring.parse("x^3 - 2*x*y", order), ring.parse("x^2*y - 2*y^2 + x", order)])
    gb = groebner_basis(ideal, order)
    assert sorted(map(str, gb.elements)) == sorted(["x^2", "x*y", "y^2 - 1/2*x"])


def test_twisted_cubic_implicitization():
    ring = VariableRing(["t", "x", "y", "z"])
    order = MonomialOrder.lex(ring)
    gens = [ring.parse(s, order) for s in ("x - t", "y - t^2", "z - t^3")]
    gb = groebner_basis(Ideal(ring, gens), order)
    elim = elimination_ideal(gb, ["x", "y", "z"])
    assert sorted(map(str, elim.generators)) == sorted(["x^2 - y", "x*y - z", "x*z - y^2", "y^3 - z^2"])


def test_block_order_elimination_matches_lex():
    ring = VariableRing(["t", "x", "y", "z"])
    lex = MonomialOrder.lex(ring)
    block = MonomialOrder.block(ring, [["t"], ["x", "y", "z"]])
    gens = [ring.parse(s) for s in ("x - t", "y - t^2", "z - t^3")]
    e1 = elimination_ideal(groebner_basis(Ideal(ring, gens), lex), ["x", "y", "z"])
    e2 = elimination_ideal(groebner_basis(Ideal(ring, gens), block), ["x", "y", "z"])
    # same ideal iff the reduced grevlex bases coincide
    b1 = groebner_basis(e1, MonomialOrder.grevlex(ring))
    b2 = groebner_basis(e2, MonomialOrder.grevlex(ring))
    assert sorted(map(str, b1.elements)) == sorted(map(str, b2.elements))


def test_elimination_requires_elimination_order():
    ring = VariableRing(["x", "y"])
    order = MonomialOrder.grevlex(ring)
    gb = groebner_basis(Ideal(ring, [ring.parse("x - y^2", order)]), order)
    with pytest.raises(PreconditionError):
        elimination_ideal(gb, ["y"])


def test_unit_and_zero_ideals():
    ring = VariableRing(["x", "y"])
    order = MonomialOrder.grevlex(ring)
    gb = groebner_basis(Ideal(ring, [ring.parse("x*y - 1", order), ring.parse("x", order)]), order)
    assert gb.is_unit()
    assert ideal_dimension(Ideal(ring, [ring.parse("x", order), ring.parse("x - 1", order)])) == -1
    assert ideal_dimension(Ideal(ring, [])) == 2


def test_dimension_examples():
    ring = VariableRing(["x", "y", "z"])
    p = ring.parse
    assert ideal_dimension(Ideal(ring, [p("x*y"), p("x*z")])) == 2
    assert ideal_dimension(Ideal(ring, [p("x - y^2"), p("z - x*y")])) == 1
    assert ideal_dimension(Ideal(ring, [p("x^2 - 1"), p("y^2 - 2"), p("z - x*y")])) == 0


def test_budget_exhaustion_reports_state():
    ring = VariableRing(["x", "y", "z", "w"])
    order = MonomialOrder.lex(ring)
    gens = [ring.parse(s, order) for s in ("x^3 - y*z + w", "y^3 - x*w^2 + 1", "z^3 - x*y*w - 2")]
    with pytest.raises(ResourceExhaustedError) as info:
        groebner_basis(Ideal(ring, gens), order, budget=50)
    assert "basis_size" in info.value.state


def test_unknown_strategy_rejected():
    ring = VariableRing(["x"])
    with pytest.raises(PreconditionError):
        groebner_basis(Ideal(ring, [ring.parse("x")]), MonomialOrder.lex(ring), strategy="fastest")


def test_dump_roundtrip():
    ring = VariableRing(["a", "b", "c"])
    order = MonomialOrder.block(ring, [["a"], ["b", "c"]])
    gb = groebner_basis(Ideal(ring, [ring.parse("a*b - c", order), ring.parse("b^2 - a", order)]), order)
    back = parse_dump(gb.dump(), ring)
    assert back.order == gb.order
    assert back.elements == gb.elements


def test_max_independent_set_exact():
    supports = [frozenset({0, 1}), frozenset({1, 2}), frozenset({2, 3})]
    free, heuristic = max_independent_set(supports, 4)
    assert len(free) == 2 and not heuristic
    assert not any(s <= free for s in supports)
