"""Tests for superspace calculus and component expansion."""

import random

import pytest

from skdv_core.algebra.poly import DiffPoly
from skdv_core.dsl import parse_component
from skdv_core.exceptions import ParityError
from skdv_core.superspace import (
    SuperExpr,
    berezin,
    component_name,
    reduce_fermions,
    shift_identification,
    super_d,
    superfield,
    to_components,
)

from tests.polys import TABLE, random_super_poly

CASES = 1000

PHI = superfield(0)


def p(text: str) -> DiffPoly:
    return parse_component(text, TABLE)


class TestComponents:
    """Test the expansion ``Phi = xi + theta*u``."""

    def test_superfield(self):
        assert to_components(PHI) == (p("xi"), p("u"))

    def test_first_derivative(self):
        assert to_components(super_d(PHI)) == (p("u"), p("xi_x"))

    def test_higher_atoms(self):
        assert to_components(superfield(4)) == (p("xi_2x"), p("u_2x"))
        assert to_components(superfield(5)) == (p("u_2x"), p("xi_3x"))

    def test_product(self):
        low, high = to_components(PHI * superfield(1))
        assert low == p("xi*u")
        assert high == p("u^2 - xi*xi_x")

    def test_component_names(self):
        assert [component_name(k) for k in range(4)] == ["xi", "u", "xi_x", "u_x"]

    def test_product_maps_to_component_product(self):
        rng = random.Random(61)
        for _ in range(CASES):
            a = random_super_poly(rng, terms=2)
            b = random_super_poly(rng, terms=2)
            expected = SuperExpr(*to_components(a)) * SuperExpr(*to_components(b))
            assert to_components(a * b) == (expected.body, expected.theta_part)


class TestSuperDerivative:
    """Test ``D = d/dtheta + theta*d/dx``."""

    def test_theta(self):
        assert super_d(SuperExpr.theta()) == SuperExpr.lift(1)

    def test_component_field(self):
        """A component jet ``X`` has ``D X = theta * X_x``."""
        assert super_d(p("u")) == SuperExpr(DiffPoly(), p("u_x"))

    def test_square_is_dx(self):
        rng = random.Random(37)
        for _ in range(CASES):
            e = SuperExpr(random_super_poly(rng), random_super_poly(rng))
            assert super_d(e, 2) == e.dx()

    def test_graded_leibniz(self):
        rng = random.Random(41)
        for _ in range(CASES):
            a_odd = rng.random() < 0.5
            a = random_super_poly(rng, odd=a_odd, terms=2)
            b = random_super_poly(rng, terms=2)
            sign = -1 if a_odd else 1
            expected = super_d(a) * b + SuperExpr.lift(a) * super_d(b) * sign
            assert super_d(a * b) == expected

    def test_components_commute_with_dx(self):
        rng = random.Random(43)
        for _ in range(CASES):
            e = random_super_poly(rng)
            low, high = to_components(e)
            assert to_components(e.dx()) == (low.dx(), high.dx())


class TestBerezin:
    """Test integration over theta."""

    def test_picks_theta_coefficient(self):
        assert berezin(PHI) == p("u")
        assert berezin(SuperExpr.theta() * p("u_x")) == p("u_x")

    def test_constant_integrates_to_zero(self):
        assert berezin(SuperExpr.lift(3)).is_zero

    def test_total_superderivative_is_total_x_derivative(self):
        rng = random.Random(47)
        for _ in range(200):
            e = random_super_poly(rng, odd=True, terms=2)
            density = berezin(super_d(e))
            assert density == to_components(e)[0].dx()


class TestIdentification:
    """Test the shift ``Phi -> D^2 Phi`` and fermion reduction."""

    def test_shift(self):
        assert shift_identification(PHI * superfield(1)) == SuperExpr.lift(
            superfield(2) * superfield(3)
        )

    def test_odd_shift_rejected(self):
        with pytest.raises(ParityError):
            shift_identification(PHI, by=1)

    def test_reduce_fermions(self):
        assert reduce_fermions(p("u*xi*xi_x + u^2 + xi_2x*u_x")) == p("u^2")
        assert reduce_fermions(p("u*psi*psi_x + u^2"), ("psi",)) == p("u^2")
