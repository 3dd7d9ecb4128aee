from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from netalg.errors import MalformedInputError
from netalg.polyalg import (
    Comparison,
    MonomialOrder,
    Polynomial,
    RationalFunction,
    VariableRing,
    exact_div,
    mono_compare,
    parse_polynomial,
    parse_rational,
    poly_divmod,
    render,
    to_q,
    try_exact_div,
)

RING = VariableRing(["x", "y", "z"])
GREVLEX = MonomialOrder.grevlex(RING)
LEX = MonomialOrder.lex(RING)

exps3 = st.tuples(*[st.integers(0, 3)] * 3)
coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=7)
polys = st.dictionaries(exps3, coeffs, max_size=5).map(lambda d: Polynomial.from_dict(RING, d, GREVLEX))
points = st.tuples(*[st.fractions(min_value=-5, max_value=5, max_denominator=5)] * 3)


def ev(p, pt):
    return Fraction(str(p.evaluate([mpq(v.numerator, v.denominator) for v in pt])))


@given(polys, polys)
def test_addition_and_multiplication_commute(p, q):
    assert p + q == q + p
    assert p * q == q * p


@given(polys, polys, polys)
@settings(max_examples=50)
def test_distributive(p, q, r):
    assert p * (q + r) == p * q + p * r


@given(polys, polys, points)
@settings(max_examples=60)
def test_evaluation_is_a_ring_homomorphism(p, q, pt):
    assert ev(p * q, pt) == ev(p, pt) * ev(q, pt)
    assert ev(p - q, pt) == ev(p, pt) - ev(q, pt)


@given(polys)
def test_render_parse_roundtrip(p):
    assert parse_polynomial(render(p), RING, GREVLEX) == p


@given(polys)
def test_reorder_preserves_terms(p):
    assert p.reorder(LEX).as_dict() == p.as_dict()
    assert p.reorder(LEX) == p


@given(exps3, exps3, exps3)
def test_orders_are_multiplicative(a, b, c):
    for order in (LEX, GREVLEX, MonomialOrder.block(RING, [["z"], ["x", "y"]])):
        before = mono_compare(a, b, order)
        ac = tuple(i + k for i, k in zip(a, c))
        bc = tuple(j + k for j, k in zip(b, c))
        assert mono_compare(ac, bc, order) == before


def test_textbook_comparisons():
    # x*y^2 vs y^3*z: lex prefers x; grevlex compares degree first
    assert mono_compare((1, 2, 0), (0, 3, 1), LEX) is Comparison.GREATER
    assert mono_compare((1, 2, 0), (0, 3, 1), GREVLEX) is Comparison.LESS
    # same degree: grevlex breaks ties on the smallest variable, reversed
    assert mono_compare((1, 1, 1), (2, 0, 1), GREVLEX) is Comparison.LESS
    assert mono_compare((2, 0, 1), (1, 2, 0), GREVLEX) is Comparison.LESS


def test_block_order_eliminates_first_block():
    order = MonomialOrder.block(RING, [["x"], ["y", "z"]])
    assert mono_compare((1, 0, 0), (0, 5, 5), order) is Comparison.GREATER
    assert not order.is_graded
    assert GREVLEX.is_graded
    assert not LEX.is_graded


@given(exps3, exps3)
def test_packed_divisibility_matches_exponents(a, b):
    assert RING.divides(RING.pack(a), RING.pack(b)) == all(i <= j for i, j in zip(a, b))


def test_exponent_overflow_rejected():
    with pytest.raises(MalformedInputError):
        RING.pack((1 << 15, 0, 0))


@given(polys, st.lists(polys.filter(lambda p: bool(p)), min_size=1, max_size=3))
@settings(max_examples=60)
def test_division_identity(f, divisors):
    quotients, rem = poly_divmod(f, divisors)
    total = rem
    for q, d in zip(quotients, divisors):
        total = total + q * d
    assert total == f
    # no term of the remainder is divisible by a leading monomial
    for _, m, _ in rem._terms:
        assert not any(RING.divides(d.lm_packed, m) for d in divisors)


@given(polys, polys.filter(lambda p: bool(p)))
@settings(max_examples=60)
def test_exact_division(p, d):
    assert exact_div(p * d, d) == p


def test_try_exact_div_detects_remainder():
    x, y = RING.gen("x"), RING.gen("y")
    assert try_exact_div(x * x + y, x) is None


def test_parse_forms():
    p = parse_polynomial("3/4*x^2*y - (y - z)^2 + 2", RING)
    assert p.evaluate({"x": 2, "y": 1, "z": 1}) == 5
    with pytest.raises(MalformedInputError):
        parse_polynomial("x + w", RING)
    with pytest.raises(MalformedInputError):
        parse_polynomial("x +* y", RING)


def test_to_q_rejects_floats():
    assert to_q("3/4") == mpq(3, 4)
    with pytest.raises(MalformedInputError):
        to_q(0.5)
    with pytest.raises(MalformedInputError):
        to_q("1/0")


def test_rational_function_arithmetic():
    f = parse_rational("x/(1 - x*y)", RING)
    g = parse_rational("y/(1 - x*y)", RING)
    s = f + g
    assert s == parse_rational("(x + y)/(1 - x*y)", RING)
    assert f / f == RationalFunction.from_poly(RING.const(1))
    pt = {"x": mpq(1, 2), "y": mpq(3), "z": mpq(0)}
    assert s.evaluate(pt) == mpq(7, 2) / (1 - mpq(3, 2))
    with pytest.raises(ZeroDivisionError):
        parse_rational("1/(x - 1)", RING).evaluate({"x": 1, "y": 0, "z": 0})


def test_rational_substitution_and_mod_evaluation():
    f = parse_rational("x/(1 - x*y)", RING)
    assert f.substitute({"y": 0}) == RationalFunction.from_poly(RING.gen("x"))
    p = 2_147_483_647
    val = f.evaluate_mod([3, 5, 0], p)
    assert val * (1 - 15) % p == 3


def test_ring_rejects_bad_tags():
    with pytest.raises(MalformedInputError):
        VariableRing(["a", "a"])
    with pytest.raises(MalformedInputError):
        VariableRing(["t", "s"], ["saturation-t", "saturation-t"])
