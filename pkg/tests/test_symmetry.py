from fractions import Fraction

import pytest
from hypothesis import given, settings
from strategies import expressions

from westervelt import catalog
from westervelt.families import FSpec
from westervelt.kernel import D, JetExpr, func, jet, substitute
from westervelt.parser import parse
from westervelt.symmetry import (
    AnsatzTooLarge,
    Characteristic,
    Generator,
    ProjectionError,
    is_symmetry,
    lie_bracket,
    linearize_along,
    project_pot2,
    symmetry_residual,
    symmetry_search,
    to_characteristic,
)
from westervelt.systems import build_system, build_westervelt

X1 = Generator.make(tau=1)
X2 = Generator.make(xi=1)


def X3(q="q"):
    return Generator.make(xi=parse(f"({q})*x"), p=parse("-2*(p+p0)"))


def X4():
    return Generator.make(xi=parse("x^2"), p=parse("x*(p+p0)"))


# --- characteristic form -----------------------------------------------------


def test_characteristic_forms():
    assert to_characteristic(X1, ["p"])["p"] == parse("-p_t")
    assert to_characteristic(X3(), ["p"])["p"] == parse("-2*(p+p0) - q*x*p_x")
    assert to_characteristic(X4(), ["p"])["p"] == parse("x*(p+p0) - x^2*p_x")


# --- linearization -------------------------------------------------------------


def test_linearize_simple_cases():
    P = {"p": parse("x*p_t + p^2")}
    assert linearize_along(P, parse("p_x")) == D(P["p"], "x")
    assert linearize_along(P, func("f", 0, jet("p"))) == parse("f'(p)") * P["p"]


@settings(max_examples=50, deadline=None)
@given(expressions(), expressions())
def test_linearization_commutes_with_total_derivatives(e, P):
    P = {"p": P, "u": parse("t*u_x")}
    for d in ("t", "x"):
        assert linearize_along(P, D(e, d)) == D(linearize_along(P, e), d)


@settings(max_examples=30, deadline=None)
@given(expressions(), expressions(), expressions())
def test_linearization_is_linear_in_direction(e, A, B):
    U = parse("u_x")
    lhs = linearize_along({"p": A + B, "u": U}, e)
    assert lhs == linearize_along({"p": A, "u": U}, e) + linearize_along({"p": B, "u": 0}, e)


# --- determining equations -------------------------------------------------------


def test_translations_for_generic_f():
    sys = build_westervelt()
    assert symmetry_residual(sys, {"p": parse("-p_t")}) == [JetExpr()]
    assert is_symmetry(sys, {"p": "-p_x"})


def test_non_symmetry_has_nonzero_residual():
    sys = build_westervelt()
    assert not symmetry_residual(sys, {"p": parse("p")})[0].is_zero()


@pytest.mark.parametrize("q, p0, k", catalog.POWER_LAW_SAMPLES)
def test_power_law_scaling(q, p0, k):
    sys = build_westervelt(FSpec.power_law(k, p0, q))
    P = {"p": substitute(parse("-2*(p+p0) - q*x*p_x"), {"q": q, "p0": p0})}
    assert is_symmetry(sys, P)


@pytest.mark.parametrize("p0, k", catalog.INVERSE_CUBE_SAMPLES)
def test_inverse_cube_nonrigid_scaling(p0, k):
    sys = build_westervelt(FSpec.inverse_cube(k, p0))
    P = {"p": substitute(parse("x*(p+p0) - x^2*p_x"), {"p0": p0})}
    assert is_symmetry(sys, P)


def test_scaling_fails_for_wrong_family():
    sys = build_westervelt(FSpec.power_law(1, 0, 2))
    assert not is_symmetry(sys, {"p": parse("-2*p - 3*x*p_x")})
    assert not is_symmetry(build_westervelt(), {"p": parse("-2*p - 2*x*p_x")})


def test_every_catalog_characteristic_at_first_sample():
    from westervelt.verify import VerifyOptions, _family_cases

    opts = VerifyOptions(samples=1, symbolic=False)
    for entry in catalog.SYMMETRIES:
        v0 = entry.system == "pot2.l2"
        for label, f, b in _family_cases(entry.family, opts, v0):
            sys = build_system(entry.system, f=f)
            P = {v: substitute(parse(t), b) for v, t in entry.components}
            assert is_symmetry(sys, P), (entry.id, label)


# --- brackets ------------------------------------------------------------------


def test_bracket_table():
    assert lie_bracket(X1, X2).is_zero()
    assert lie_bracket(X1, X3()).is_zero()
    assert lie_bracket(X2, X3()) == X2 * parse("q")
    assert lie_bracket(X2, X4()) == X3(-4) * Fraction(-1, 2)
    assert lie_bracket(X3(-4), X4()) == X4() * -4


def test_bracket_antisymmetry_and_jacobi():
    gens = [X1, X2, X3(-4), X4()]
    zero = Generator.make(p=0)
    for a in gens:
        for b in gens:
            assert lie_bracket(a, b) == -lie_bracket(b, a)
            for c in gens:
                total = (lie_bracket(a, lie_bracket(b, c)) + lie_bracket(b, lie_bracket(c, a))
                         + lie_bracket(c, lie_bracket(a, b)))
                assert total == zero


# --- projections ----------------------------------------------------------------


def test_pot2_projections():
    s1, s2 = build_system("pot2.l1"), build_system("pot2.l2")
    assert project_pot2({"v": parse("1")}, 1, s1).is_zero()
    got = project_pot2({"v": parse("-2*(c^2*p0*t + v) - q*x*v_x")}, 1, s1)
    assert got == parse("-2*(p+p0) - q*x*p_x")
    assert project_pot2({"w": parse("t*x")}, 2, s2).is_zero()


def test_projection_rejects_missing_component():
    with pytest.raises(ProjectionError):
        project_pot2({"p": parse("1")}, 1)


# --- search ---------------------------------------------------------------------


def _in_span(basis, text, depvars=("p",)):
    from westervelt.symmetry import characteristic_in_span

    return characteristic_in_span(basis, {"p": parse(text)}, depvars)


def test_search_generic():
    basis = symmetry_search(build_westervelt(), 1)
    assert len(basis) == 2
    assert _in_span(basis, "-p_t") and _in_span(basis, "-p_x")


def test_search_power_law():
    basis = symmetry_search(build_westervelt(FSpec.power_law(1, 0, 2)), 1)
    assert len(basis) == 3
    assert _in_span(basis, "-2*p - 2*x*p_x")


def test_search_inverse_cube():
    basis = symmetry_search(build_westervelt(FSpec.inverse_cube(1, Fraction(2, 5))), 2)
    assert len(basis) == 4
    assert _in_span(basis, "x*(p+2/5) - x^2*p_x")
    assert _in_span(basis, "-2*(p+2/5) + 4*x*p_x")


def test_search_guard():
    with pytest.raises(AnsatzTooLarge):
        symmetry_search(build_westervelt(), 3, max_unknowns=10)


def test_characteristic_printing():
    assert "P^p" in str(Characteristic(p="-p_t"))
