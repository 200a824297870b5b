"""Tests for the expression language."""

import pytest
import sympy

from skdv_core.algebra.poly import DiffPoly, JetAtom
from skdv_core.dsl import parse, parse_component, parse_super, render, render_components, tokenize
from skdv_core.exceptions import (
    DSLSyntaxError,
    ParityError,
    UnknownFieldError,
    UnsupportedOperationError,
)
from skdv_core.models.registry import SKDV2_LAGRANGIAN, SKDV_SUPER_EQUATION, SUPER_HAMILTONIAN
from skdv_core.superspace import SuperExpr, superfield

from tests.polys import TABLE

u = DiffPoly.jet("u")
u_x = DiffPoly.jet("u", 1)
psi = DiffPoly.jet("psi", 0, odd=True)


class TestTokenizer:
    """Test tokenization."""

    def test_kinds(self):
        tokens = tokenize("2*u_x**3")
        assert [t.kind for t in tokens] == ["number", "op", "name", "op", "number", "end"]
        assert [t.text for t in tokens[:-1]] == ["2", "*", "u_x", "**", "3"]

    def test_positions(self):
        tokens = tokenize("u +\n  psi")
        assert (tokens[2].line, tokens[2].column) == (2, 3)

    def test_bad_character(self):
        with pytest.raises(DSLSyntaxError) as exc_info:
            tokenize("u +\n  $")
        assert (exc_info.value.line, exc_info.value.column) == (2, 3)


class TestComponentExpressions:
    """Test parsing component densities."""

    def test_jets(self):
        assert parse_component("u_x", TABLE) == u_x
        assert parse_component("u_3x", TABLE) == DiffPoly.jet("u", 3)
        assert parse_component("Dx(u, 2)", TABLE) == DiffPoly.jet("u", 2)

    def test_fermion_square_vanishes(self):
        assert parse_component("psi*psi", TABLE).is_zero

    def test_arithmetic(self):
        assert parse_component("u**2", TABLE) == parse_component("u^2", TABLE)
        assert parse_component("2/4*u", TABLE) == u * sympy.Rational(1, 2)
        assert parse_component("-(u - u_x)", TABLE) == u_x - u

    def test_velocity(self):
        value = parse_component("Tdot(u)", TABLE)
        assert value == DiffPoly.atom(JetAtom("u", 0, False, True))

    def test_lagrangian(self):
        value = parse_component(SKDV2_LAGRANGIAN, TABLE)
        assert len(value) == 7
        assert value.require_parity().is_odd is False

    def test_nonlocal(self):
        value = parse_component("Dinv(u_x*psi_x)", TABLE)
        assert value.has_nonlocal
        assert value.dx() == parse_component("u_x*psi_x", TABLE)

    def test_parameters(self):
        symbolic = parse_component("a*u", TABLE, {"a": "a"})
        assert symbolic == u * sympy.Symbol("a")
        assert parse_component("a*u", TABLE, {"a": "3/2"}) == u * sympy.Rational(3, 2)

    def test_theta_rejected(self):
        with pytest.raises(ParityError):
            parse_component("theta*u", TABLE)


class TestSuperExpressions:
    """Test parsing superspace expressions."""

    def test_double_derivative(self):
        assert parse("D(D(Phi))", TABLE) == SuperExpr.lift(superfield(2))
        assert SuperExpr.lift(parse("Dx(Phi)", TABLE)) == SuperExpr.lift(superfield(2))

    def test_dk(self):
        assert parse_super("Dk(Phi, 3)", TABLE) == SuperExpr.lift(superfield(3))

    def test_timed_superfield(self):
        assert parse_super("Tdot(Dk(Phi,2))", TABLE) == SuperExpr.lift(superfield(2, timed=True))

    def test_registered_expressions(self):
        assert not parse_super(SUPER_HAMILTONIAN, TABLE).is_zero
        assert not parse_super(SKDV_SUPER_EQUATION, TABLE, {"a": "a"}).is_zero

    def test_dinv_of_superspace_rejected(self):
        with pytest.raises(ParityError):
            parse("Dinv(D(Phi))", TABLE)

    def test_render_components(self):
        assert render_components(parse("D(Phi)", TABLE)) == "theta0: u, theta1: xi_x"


class TestErrors:
    """Test syntax and name errors."""

    def test_missing_operand(self):
        with pytest.raises(DSLSyntaxError) as exc_info:
            parse("u_x +* 2", TABLE)
        assert exc_info.value.line == 1
        assert exc_info.value.column == 6

    def test_unclosed_parenthesis(self):
        with pytest.raises(DSLSyntaxError) as exc_info:
            parse("(u + psi*psi_x", TABLE)
        assert "')'" in str(exc_info.value)

    def test_empty(self):
        with pytest.raises(DSLSyntaxError):
            parse("   ", TABLE)

    def test_unknown_identifier(self):
        with pytest.raises(UnknownFieldError) as exc_info:
            parse("u + v_x", TABLE)
        assert "v_x" in str(exc_info.value)

    def test_negative_exponent(self):
        with pytest.raises(DSLSyntaxError):
            parse("u^-1", TABLE)

    def test_division(self):
        with pytest.raises(DSLSyntaxError):
            parse("u/0", TABLE)
        with pytest.raises(DSLSyntaxError):
            parse("u/u", TABLE)

    def test_tdot_of_sum(self):
        with pytest.raises(UnsupportedOperationError):
            parse("Tdot(u + u_x)", TABLE)


class TestRoundTrip:
    """Rendered expressions parse back to equal values."""

    @pytest.mark.parametrize(
        "text",
        [
            SKDV2_LAGRANGIAN,
            "u_x^3 + 2*u*psi*psi_2x - 1/2*u_2x^2 + xi_2x*psi_2x - 1/2*xi_2x*xi_3x",
            "-2*Dinv(u_x*psi_x) - 2*psi*u_x - psi_2x",
            "psi_3x - xi_4x",
            "-3/7*u^2*xi*xi_x + 5",
        ],
    )
    def test_component(self, text):
        value = parse_component(text, TABLE)
        assert parse_component(render(value), TABLE) == value

    def test_symbolic_coefficient(self):
        value = parse_component("(6 - 2*a)*u*xi_x + a*u_x", TABLE, {"a": "a"})
        assert parse_component(render(value), TABLE, {"a": "a"}) == value

    def test_superspace(self):
        value = parse_super("theta*u + Phi*D(Phi)", TABLE)
        assert parse_super(render(value), TABLE) == value
