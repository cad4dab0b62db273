"""Exact-algebra tests: monomials, combinations, and the two derivations."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatcalc.terms import (
    Combination,
    d_dt,
    d_dy,
    make_monomial,
    monomial,
    parse_monomial,
    weight,
)


class TestMakeMonomial:
    def test_pair_of_first_derivatives(self):
        m = make_monomial([1, 1])
        assert m.as_dict() == {1: 2}
        assert m.degree == 2
        assert weight(m) == 2
        assert str(m) == "f1^2/f^1"

    def test_lemma_style_monomial(self):
        m = make_monomial([1, 1, 1, 1, 2])
        assert m.as_dict() == {1: 4, 2: 1}
        assert weight(m) == 6
        assert str(m) == "f1^4 f2/f^4"

    def test_empty_is_density(self):
        m = make_monomial([])
        assert m.is_empty()
        assert weight(m) == 0
        assert str(m) == "f"

    @pytest.mark.parametrize("bad", [[0], [-1], [2, 0], [1, -3]])
    def test_rejects_nonpositive_orders(self, bad):
        with pytest.raises(ValueError):
            make_monomial(bad)

    def test_weight_examples(self):
        assert weight(make_monomial([2, 2])) == 4
        assert weight(make_monomial([1] * 8)) == 8

    def test_equality_is_exponent_map_equality(self):
        assert make_monomial([2, 1, 1]) == monomial({1: 2, 2: 1})
        assert make_monomial([1, 2]) != make_monomial([3])


class TestParsePrint:
    @pytest.mark.parametrize(
        "text",
        ["f", "f1^2/f^1", "f1^4 f2/f^4", "f2 f3^2/f^2", "f1^8/f^7", "f2^3/f^2"],
    )
    def test_round_trip(self, text):
        assert str(parse_monomial(text)) == text

    def test_plain_numerator(self):
        assert parse_monomial("f1 f3") == make_monomial([1, 3])

    def test_denominator_mismatch_rejected(self):
        with pytest.raises(ValueError):
            parse_monomial("f1^2/f^3")

    def test_combination_str_matches_sign_layout(self):
        c = Combination(
            {
                make_monomial([2, 2]): -1,
                make_monomial([1] * 4): Fraction(1, 3),
            }
        )
        assert str(c) == "-f2^2/f^1 + 1/3 f1^4/f^3"

    def test_zero_prints_as_zero(self):
        assert str(Combination.zero()) == "0"

    def test_to_lines(self):
        c = Combination({make_monomial([1, 1]): Fraction(6, 5)})
        assert c.to_lines() == "6/5 * f1^2/f^1"


class TestSpatialDerivative:
    def test_quotient_rule_f1_squared(self):
        got = d_dy(Combination.term(make_monomial([1, 1])))
        expected = Combination(
            {make_monomial([1, 2]): 2, make_monomial([1, 1, 1]): -1}
        )
        assert got == expected

    def test_quotient_rule_f2_squared(self):
        got = d_dy(Combination.term(make_monomial([2, 2])))
        expected = Combination(
            {make_monomial([2, 3]): 2, make_monomial([1, 2, 2]): -1}
        )
        assert got == expected

    def test_density_derivative(self):
        assert d_dy(Combination.term(make_monomial([]))) == Combination.term(
            make_monomial([1])
        )


class TestHeatDerivative:
    def test_fisher_integrand(self):
        got = d_dt(Combination.term(make_monomial([1, 1])))
        expected = Combination(
            {
                make_monomial([1, 3]): 1,
                make_monomial([1, 1, 2]): Fraction(-1, 2),
            }
        )
        assert got == expected

    def test_third_derivative_head_term(self):
        got = d_dt(Combination.term(make_monomial([3, 3])))
        expected = Combination(
            {
                make_monomial([3, 5]): 1,
                make_monomial([2, 3, 3]): Fraction(-1, 2),
            }
        )
        assert got == expected

    def test_heat_equation_on_density(self):
        got = d_dt(Combination.term(make_monomial([])))
        assert got == Combination.term(make_monomial([2]), Fraction(1, 2))


# -- randomized structure ---------------------------------------------------

orders = st.lists(st.integers(min_value=1, max_value=5), min_size=0, max_size=6)
monomials = orders.map(make_monomial)
coefficients = st.fractions(
    min_value=-10, max_value=10, max_denominator=12
).filter(lambda q: q != 0)
combinations = st.dictionaries(monomials, coefficients, min_size=0, max_size=4).map(
    Combination
)


@settings(max_examples=150, deadline=None)
@given(monomials)
def test_d_dy_raises_weight_by_one(m):
    for out, _ in d_dy(Combination.term(m)).items():
        assert out.weight == m.weight + 1


@settings(max_examples=150, deadline=None)
@given(monomials)
def test_d_dt_raises_weight_by_two(m):
    for out, _ in d_dt(Combination.term(m)).items():
        assert out.weight == m.weight + 2


@settings(max_examples=150, deadline=None)
@given(combinations, combinations, coefficients)
def test_derivations_are_linear(a, b, q):
    assert d_dy(a + b.scaled(q)) == d_dy(a) + d_dy(b).scaled(q)
    assert d_dt(a + b.scaled(q)) == d_dt(a) + d_dt(b).scaled(q)


@settings(max_examples=150, deadline=None)
@given(combinations)
def test_mixed_partials_commute(c):
    assert d_dt(d_dy(c)) == d_dy(d_dt(c))
