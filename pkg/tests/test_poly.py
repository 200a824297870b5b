"""Tests for graded differential polynomials."""

import random

import pytest
import sympy

from skdv_core.algebra.integrate import dinv
from skdv_core.algebra.poly import DiffPoly, JetAtom, Monomial, normalize
from skdv_core.exceptions import ParityError

from tests.polys import random_poly

CASES = 1000

u = DiffPoly.jet("u")
u_x = DiffPoly.jet("u", 1)
psi = DiffPoly.jet("psi", 0, odd=True)
psi_x = DiffPoly.jet("psi", 1, odd=True)
xi = DiffPoly.jet("xi", 0, odd=True)


class TestNormalize:
    """Test canonical ordering of monomials."""

    def test_odd_swap_changes_sign(self):
        """Swapping two fermions flips the sign."""
        first, second = JetAtom("psi", 0, True), JetAtom("psi", 1, True)
        m = normalize(Monomial(sympy.Integer(1), (second, first)))
        assert m == Monomial(sympy.Integer(-1), (first, second))

    def test_repeated_fermion_vanishes(self):
        """A repeated odd atom makes the monomial zero."""
        assert normalize(Monomial(sympy.Integer(2), (JetAtom("xi", 0, True),) * 2)) is None

    def test_zero_coefficient_vanishes(self):
        """A zero coefficient is the zero monomial."""
        assert normalize(Monomial(sympy.Integer(0), (JetAtom("u", 0, False),))) is None

    def test_bosons_commute(self):
        """Even atoms are sorted without a sign."""
        u_2x, u_0 = JetAtom("u", 2, False), JetAtom("u", 0, False)
        m = normalize(Monomial(sympy.Integer(3), (u_2x, u_0)))
        assert m.coeff == 3
        assert m.atoms == (u_0, u_2x)

    def test_idempotent(self):
        """Normalizing a normalized monomial changes nothing."""
        rng = random.Random(7)
        for _ in range(CASES):
            p = random_poly(rng, terms=1)
            for m in p:
                assert normalize(m) == m


class TestArithmetic:
    """Test ring operations on examples."""

    def test_psi_squared_is_zero(self):
        assert (psi * psi).is_zero

    def test_anticommuting_product(self):
        assert psi_x * psi == -(psi * psi_x)

    def test_cancellation(self):
        assert (u * u_x - u_x * u).is_zero

    def test_expand_square(self):
        assert (u + u_x) ** 2 == u * u + 2 * u * u_x + u_x * u_x

    def test_rational_coefficients(self):
        half = u * sympy.Rational(1, 2)
        assert (half + half) == u

    def test_scalar_comparison(self):
        assert DiffPoly.constant(3) == 3
        assert DiffPoly() == 0

    def test_parity(self):
        assert (psi * u).require_parity().is_odd
        assert not (psi * xi).require_parity().is_odd
        with pytest.raises(ParityError):
            (psi + u).require_parity()

    def test_render(self):
        assert str(u_x**3 - u * psi * psi_x / 2) == "-1/2*psi*psi_x*u + u_x^3"


class TestDerivative:
    """Test the total x-derivative."""

    def test_dx_of_product(self):
        assert (u * u_x).dx() == u_x * u_x + u * DiffPoly.jet("u", 2)

    def test_dx_of_fermion_pair(self):
        psi_2x = DiffPoly.jet("psi", 2, odd=True)
        assert (psi * psi_x).dx() == psi * psi_2x

    def test_higher_order(self):
        assert u.dx(4) == DiffPoly.jet("u", 4)

    def test_constant(self):
        assert DiffPoly.constant(5).dx().is_zero


class TestAlgebraicProperties:
    """Seeded property checks over random polynomials."""

    def test_graded_commutativity(self):
        """``a*b = (-1)^{|a||b|} b*a`` for homogeneous ``a`` and ``b``."""
        rng = random.Random(11)
        for _ in range(CASES):
            a_odd, b_odd = rng.random() < 0.5, rng.random() < 0.5
            a = random_poly(rng, odd=a_odd)
            b = random_poly(rng, odd=b_odd)
            sign = -1 if a_odd and b_odd else 1
            assert a * b == b * a * sign

    def test_associativity(self):
        rng = random.Random(13)
        for _ in range(CASES):
            a, b, c = (random_poly(rng, terms=2) for _ in range(3))
            assert (a * b) * c == a * (b * c)

    def test_distributivity(self):
        rng = random.Random(17)
        for _ in range(CASES):
            a, b, c = (random_poly(rng, terms=2) for _ in range(3))
            assert a * (b + c) == a * b + a * c

    def test_leibniz(self):
        """The x-derivative is an even derivation."""
        rng = random.Random(19)
        for _ in range(CASES):
            a, b = random_poly(rng), random_poly(rng)
            assert (a * b).dx() == a.dx() * b + a * b.dx()

    def test_dx_inverts_dinv(self):
        rng = random.Random(23)
        for _ in range(CASES):
            p = random_poly(rng, odd=rng.random() < 0.5)
            assert dinv(p).dx() == p
