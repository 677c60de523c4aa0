import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import expressions

from westervelt.kernel import JetExpr, func, jet, param
from westervelt.parser import ParseError, UnknownIdentifierError, parse


def test_mixed_partials_commute():
    assert parse("p_tx + p_xt") == 2 * jet("p", 1, 1)


def test_function_prime_marks():
    assert parse("f'(p)*p_t") == func("f", 1, jet("p")) * jet("p", 1, 0)
    assert parse("h'''(u_x)") == func("h", 3, jet("u", 0, 1))


def test_two_term_normal_form():
    e = parse("c^2*p_xx + beta*p_txx")
    assert len(e) == 2
    assert e == param("c") ** 2 * jet("p", 0, 2) + param("beta") * jet("p", 1, 2)


def test_precedence_and_associativity():
    assert parse("2 + 3*4") == JetExpr.const(14)
    assert parse("2^3^2") == JetExpr.const(512)
    assert parse("-p^2") == -(jet("p") ** 2)
    assert parse("(1 + 2)*p") == 3 * jet("p")
    assert parse("8/2/2") == JetExpr.const(2)


def test_rational_and_scientific_literals_are_exact():
    assert parse("3/2") == JetExpr.const(__import__("fractions").Fraction(3, 2))
    assert parse("1e-3") == parse("1/1000")
    assert parse("0.1") == parse("1/10")
    assert parse("2.5E2") == JetExpr.const(250)


def test_rational_exponents():
    assert parse("p^(1/2)*p^(1/2)") == jet("p")
    assert parse("c^-2") == parse("1/c^2")


def test_syntax_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse("p_x + * 2")
    assert info.value.position == 6


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse("alpha*p")


def test_malformed_derivative_suffix():
    with pytest.raises(ParseError):
        parse("p_ty")
    with pytest.raises(ParseError):
        parse("p_")


def test_non_constant_exponent_rejected():
    with pytest.raises(ParseError):
        parse("p^p")


def test_unbalanced_parentheses():
    with pytest.raises(ParseError):
        parse("(p + 1")
    with pytest.raises(ParseError):
        parse("p + 1)")


@settings(max_examples=80, deadline=None)
@given(expressions())
def test_print_parse_round_trip(e):
    from westervelt.kernel import to_string

    assert parse(to_string(e)) == e


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet="ptxuf_'()+-*/^ 0123456789", max_size=12))
def test_parser_never_crashes_unexpectedly(text):
    try:
        parse(text)
    except ParseError:
        pass
    except ZeroDivisionError:
        pass
