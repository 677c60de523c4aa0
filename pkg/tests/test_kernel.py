from fractions import Fraction

import pytest
from hypothesis import given, settings
from strategies import expressions, nonzero_rationals, polynomials

from westervelt.families import FSpec
from westervelt.kernel import (
    D,
    CyclicBindingError,
    DivisionError,
    JetCoord,
    JetExpr,
    NonConcreteFunctionError,
    UnassignedSymbolError,
    as_expr,
    euler_operator,
    eval_numeric,
    expr_pow,
    func,
    jet,
    jet_coords,
    param,
    partial,
    split_params,
    substitute,
    to_string,
    total_derivative,
)
from westervelt.parser import parse


# --- total derivatives -------------------------------------------------------


def test_dx_of_p_is_p_x():
    assert total_derivative(jet("p"), "x") == jet("p", 0, 1)


def test_dt_of_f_uses_chain_rule():
    assert total_derivative(parse("f(p)"), "t") == parse("f'(p)*p_t")


def test_mixed_total_derivative_by_hand():
    expected = parse("p_t + x*p_tx")
    assert D(D(parse("x*p"), "x"), "t") == expected
    assert D(D(parse("x*p"), "t"), "x") == expected


def test_word_derivative_matches_repeated_application():
    e = parse("f(p)*p_x + t*u")
    assert D(e, "txx") == total_derivative(total_derivative(total_derivative(e, "t"), "x"), "x")


def test_function_of_composite_argument():
    e = func("f", 0, parse("v_t/c^2"))
    assert total_derivative(e, "x") == parse("c^(-2)*f'(c^(-2)*v_t)*v_tx")


def test_base_power_derivative():
    e = parse("(p + p0)^(7/3)")
    assert total_derivative(e, "x") == parse("7/3*(p+p0)^(4/3)*p_x")


# --- Euler operator --------------------------------------------------------


def test_euler_of_p_t_squared():
    assert euler_operator(parse("p_t^2"), "p") == parse("-2*p_tt")


def test_euler_annihilates_main_equation_times_one():
    residual = parse("f'(p)*p_tt + f''(p)*p_t^2 - beta*p_txx - c^2*p_xx")
    assert euler_operator(residual, "p").is_zero()


def test_euler_of_lagrangian_gives_wave_operator():
    # L = p_t^2/2 - c^2 p_x^2/2 has E_p(L) = -p_tt + c^2 p_xx
    assert euler_operator(parse("1/2*p_t^2 - 1/2*c^2*p_x^2"), "p") == parse("-p_tt + c^2*p_xx")


# --- substitution and numerics ---------------------------------------------


def test_substitute_zero_binding():
    assert substitute(parse("p_x"), {"p_x": 0}).is_zero()


def test_substitute_power_law_family():
    f = FSpec.power_law(k=1, p0=0, q=Fraction(7, 3))
    got = substitute(parse("f'(p)*p_t"), {"f": f})
    assert got == parse("10/3*p^(7/3)*p_t")


def test_substitute_is_simultaneous():
    # p_x -> p_t and p_t -> u apply in one pass, so p_x does not become u
    got = substitute(parse("p_x + 2*p_t"), {"p_x": parse("p_t"), "p_t": parse("u")})
    assert got == parse("p_t + 2*u")


def test_cyclic_binding_rejected():
    with pytest.raises(CyclicBindingError):
        substitute(parse("p_x"), {"p_x": parse("p_t"), "p_t": parse("p_x + 1")})


def test_substitute_parameters():
    assert substitute(parse("c^2 - nu^2"), {"c": 2, "nu": 1}) == JetExpr.const(3)


def test_eval_numeric_examples():
    assert eval_numeric(parse("p_x^2"), {"p_x": 3}) == 9.0
    f = FSpec.westervelt_poly(kappa=1, n=2)
    assert eval_numeric(parse("f'(p)"), {"p": 2}, {"f": f}) == 5.0
    assert eval_numeric(parse("c^2 - nu^2"), {"c": 2, "nu": 1}) == 3.0


def test_eval_numeric_errors():
    with pytest.raises(UnassignedSymbolError):
        eval_numeric(parse("p_x + c"), {"p_x": 1.0})
    with pytest.raises(NonConcreteFunctionError):
        eval_numeric(parse("f(p)"), {"p": 1.0})


def test_pde_residual_vanishes_on_sampled_shock():
    import numpy as np

    from westervelt import tws

    params = tws.TWParams()
    h = FSpec.westervelt_poly(kappa=1, n=2)
    residual = parse("f'(p)*p_tt + f''(p)*p_t^2 - beta*p_txx - c^2*p_xx")
    for xi in np.linspace(-3, 3, 7):
        U, U1, U2, U3 = tws.shock_derivatives(xi, params, 3)
        nu = params.nu
        vals = {"p": U, "p_t": -nu * U1, "p_tt": nu ** 2 * U2, "p_txx": -nu * U3, "p_xx": U2,
                "beta": params.beta, "c": params.c}
        assert abs(eval_numeric(residual, vals, {"f": h})) < 1e-10


# --- representation ----------------------------------------------------------


def test_division_only_by_parameters():
    assert (parse("p_x") / param("beta")) * param("beta") == parse("p_x")
    with pytest.raises(DivisionError):
        parse("p_x") / parse("p_t")


def test_scale_is_pulled_out_of_base_powers():
    assert parse("(2*p + 2)^(-1)") == parse("1/2*(p + 1)^(-1)")
    assert parse("(c^(-2)*v_t)^(3/2)") == parse("c^(-3)*v_t^(3/2)")


def test_integer_powers_expand():
    assert expr_pow(parse("p + 1"), 2) == parse("p^2 + 2*p + 1")
    assert parse("(p + p0)^(3/2) * (p + p0)^(1/2)") == parse("(p + p0)^2")


def test_split_params_separates_coefficients():
    parts = split_params(parse("beta*p_x + c^2*p_x + u"))
    assert len(parts) == 2
    assert parts[jet("p", 0, 1).key[0][0]] == parse("beta + c^2")


def test_jet_coords_and_partials():
    e = parse("p_x*u + f(p_t)")
    assert set(jet_coords(e)) == {JetCoord("p", 0, 1), JetCoord("u"), JetCoord("p", 1, 0)}
    assert partial(e, JetCoord("p", 1, 0)) == parse("f'(p_t)")


def test_printer_forms():
    assert to_string(parse("c^(-2)*v_t")) == "c^(-2)*v_t"
    assert to_string(parse("f''(p)")) == "f''(p)"
    assert to_string(parse("(p + 2/5)^(7/3)")) == "(2/5 + p)^(7/3)"
    assert to_string(JetExpr()) == "0"


# --- properties ----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(expressions())
def test_total_derivatives_commute(e):
    assert D(D(e, "t"), "x") == D(D(e, "x"), "t")


@settings(max_examples=60, deadline=None)
@given(expressions())
def test_normalization_is_idempotent(e):
    again = JetExpr.from_key(e.key)
    assert again == e
    assert parse(to_string(e)) == e


@settings(max_examples=60, deadline=None)
@given(expressions(), expressions(), nonzero_rationals)
def test_total_derivative_is_linear(a, b, alpha):
    for d in ("t", "x"):
        assert total_derivative(alpha * a + b, d) == alpha * total_derivative(a, d) + total_derivative(b, d)


@settings(max_examples=40, deadline=None)
@given(polynomials(), polynomials())
def test_euler_annihilates_divergences(A, B):
    div = total_derivative(A, "t") + total_derivative(B, "x")
    for v in ("p", "u"):
        assert euler_operator(div, v).is_zero()


@settings(max_examples=40, deadline=None)
@given(expressions(), expressions())
def test_euler_annihilates_divergences_with_functions(A, B):
    div = total_derivative(A, "t") + total_derivative(B, "x")
    assert euler_operator(div, "p").is_zero()


@settings(max_examples=60, deadline=None)
@given(expressions(), expressions(), expressions())
def test_ring_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


def test_as_expr_accepts_numbers_and_text():
    assert as_expr(Fraction(1, 2)) == as_expr("1/2")
    assert as_expr(0.25) == as_expr("1/4")
