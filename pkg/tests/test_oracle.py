"""Lattice cross-checks of variational derivatives and brackets."""

import numpy as np
import pytest

from skdv_core.algebra.brackets import (
    DeltaKernel,
    bracket_constraint_constraint,
    functional_bracket,
)
from skdv_core.algebra.fields import FieldKind, FieldSpec, Parity, make_table
from skdv_core.algebra.poly import DiffPoly
from skdv_core.algebra.variational import LocalFunctional, equivalent, euler_lagrange
from skdv_core.dsl import parse_component
from skdv_core.exceptions import UnknownFieldError, UnsupportedOperationError
from skdv_core.numerics.grassmann import GrassmannValue, algebra
from skdv_core.numerics.oracle import (
    ORACLE_GENERATORS,
    centered_weights,
    lattice_bracket,
    lattice_functional,
    lattice_gradient,
    lattice_grid,
    sampled_density,
)

TABLE = make_table(("u", False)).with_momenta()
GRID = lattice_grid()
X = GRID.x
VALUES = {
    "u": 0.3 * np.sin(X) + 0.1 * np.cos(2 * X),
    "Pi_u": 0.2 * np.cos(X) - 0.1 * np.sin(2 * X),
}

SMEARING = [
    FieldSpec("f", Parity.EVEN, FieldKind.MULTIPLIER),
    FieldSpec("g", Parity.EVEN, FieldKind.MULTIPLIER),
]
FERMI_TABLE = make_table(("u", False), ("psi", True)).with_momenta().extend(SMEARING)
FERMI_GRID = lattice_grid(generators=ORACLE_GENERATORS)


def odd_profile(first: np.ndarray, second: np.ndarray) -> GrassmannValue:
    """``first * g1 + second * g2``."""
    alg = algebra(ORACLE_GENERATORS)
    return GrassmannValue.monomial(alg, 1, first) + GrassmannValue.monomial(alg, 2, second)


FERMI_VALUES = {
    **VALUES,
    "psi": odd_profile(0.2 * np.sin(X), 0.1 * np.cos(X) + 0.05 * np.sin(2 * X)),
    "Pi_psi": odd_profile(0.1 * np.cos(2 * X), 0.15 * np.sin(X)),
    "f": 1.0 + 0.5 * np.cos(X),
    "g": 0.6 + 0.3 * np.sin(X) + 0.2 * np.cos(2 * X),
}


def functional(text: str, table=TABLE) -> LocalFunctional:
    return LocalFunctional(parse_component(text, table), table)


def fermi(text: str) -> LocalFunctional:
    return functional(text, FERMI_TABLE)


def integrated(density: DiffPoly) -> GrassmannValue:
    return FERMI_GRID.integrate(sampled_density(density, FERMI_GRID, FERMI_VALUES))


class TestStencil:
    """Test the centered-difference weights."""

    def test_known_weights(self):
        assert centered_weights(2) == pytest.approx((1 / 2,))
        assert centered_weights(4) == pytest.approx((2 / 3, -1 / 12))
        assert centered_weights(8) == pytest.approx((4 / 5, -1 / 5, 4 / 105, -1 / 280))

    def test_consistency(self):
        weights = centered_weights(24)
        assert 2 * sum(k * c for k, c in enumerate(weights, start=1)) == pytest.approx(1.0)

    def test_odd_accuracy_rejected(self):
        with pytest.raises(ValueError):
            centered_weights(3)

    def test_stencil_wider_than_lattice(self):
        with pytest.raises(ValueError):
            lattice_grid(points=16, accuracy=24)

    def test_derivative_of_smooth_data(self):
        value = GrassmannValue.scalar(GRID.algebra, np.sin(X))
        assert np.allclose(GRID.differentiate(value, 2).body, -np.sin(X), atol=1e-8)


class TestLatticeGradient:
    """Finite differences agree with symbolic variational derivatives."""

    @pytest.mark.parametrize(
        "text", ["1/2*u_x^2 + u^3", "u_x^3", "1/2*u_2x^2 - u*u_x^2", "Pi_u*u_x + u^2*Pi_u"]
    )
    def test_gradient_matches_euler_lagrange(self, text):
        f = functional(text)
        for name in ("u", "Pi_u"):
            numeric = lattice_gradient(f.density, GRID, VALUES, name)
            symbolic = sampled_density(euler_lagrange(f, name), GRID, VALUES)
            assert numeric.allclose(symbolic, atol=1e-6)

    def test_functional_value(self):
        value = lattice_functional(parse_component("u^2", TABLE), GRID, VALUES)
        assert float(value.body) == pytest.approx(np.pi * (0.3**2 + 0.1**2))

    def test_absent_field_has_zero_gradient(self):
        density = parse_component("u_x^2", TABLE)
        assert lattice_gradient(density, GRID, VALUES, "Pi_u").norm() == 0.0

    def test_unsampled_field(self):
        density = parse_component("u_x^2", TABLE)
        with pytest.raises(UnknownFieldError):
            lattice_gradient(density, GRID, {"Pi_u": VALUES["Pi_u"]}, "u")

    def test_nonlocal_rejected(self):
        density = parse_component("u*Dinv(u_x^2 - Pi_u^2)", TABLE)
        with pytest.raises(UnsupportedOperationError):
            lattice_functional(density, GRID, VALUES)


class TestFermionGradient:
    """Graded gradients with two-generator lattice coefficients."""

    def test_free_fermion(self):
        """``delta / delta psi`` of ``integral 1/2 psi psi_x`` is ``psi_x``."""
        density = parse_component("1/2*psi*psi_x", FERMI_TABLE)
        numeric = lattice_gradient(density, FERMI_GRID, FERMI_VALUES, "psi")
        expected = sampled_density(parse_component("psi_x", FERMI_TABLE), FERMI_GRID, FERMI_VALUES)
        assert numeric.is_homogeneous(odd=True)
        assert numeric.allclose(expected, atol=1e-8)

    def test_fermion_bilinear_has_soul(self):
        """Products of two fermions only survive in the ``g1 g2`` component."""
        value = lattice_functional(
            parse_component("psi*psi_x", FERMI_TABLE), FERMI_GRID, FERMI_VALUES
        )
        assert float(value.body) == 0.0
        assert abs(float(value.component(3))) > 1e-3

    @pytest.mark.parametrize(
        "text",
        [
            "1/2*psi_x*psi_2x",
            "u*psi*psi_x",
            "Pi_psi*psi_2x + u_x*psi*Pi_psi",
            "1/2*Pi_u^2 + u*Pi_psi*psi_x",
        ],
    )
    def test_gradient_matches_euler_lagrange(self, text):
        f = fermi(text)
        for name in ("u", "Pi_u", "psi", "Pi_psi"):
            numeric = lattice_gradient(f.density, FERMI_GRID, FERMI_VALUES, name)
            symbolic = sampled_density(euler_lagrange(f, name), FERMI_GRID, FERMI_VALUES)
            assert numeric.allclose(symbolic, atol=1e-6)


class TestLatticeBracket:
    """Lattice brackets agree with the symbolic functional bracket."""

    PAIRS = [
        ("1/2*Pi_u^2 + u^3", "u_x*Pi_u"),
        ("u*Pi_u", "1/2*u_x^2"),
        ("Pi_u^2*u", "u^2 + Pi_u*u_x"),
    ]

    @pytest.mark.parametrize("first,second", PAIRS)
    def test_matches_symbolic(self, first, second):
        f, g = functional(first), functional(second)
        density = functional_bracket(f, g)
        symbolic = float(np.sum(sampled_density(density, GRID, VALUES).body) * GRID.dx)
        numeric = lattice_bracket(f, g, GRID, VALUES)
        assert float(numeric.body) == pytest.approx(symbolic, abs=1e-6)

    @pytest.mark.parametrize("first,second", PAIRS)
    def test_antisymmetry(self, first, second):
        f, g = functional(first), functional(second)
        assert equivalent(functional_bracket(f, g), -functional_bracket(g, f))
        forward = lattice_bracket(f, g, GRID, VALUES)
        backward = lattice_bracket(g, f, GRID, VALUES)
        assert float(forward.body) == pytest.approx(-float(backward.body), abs=1e-6)

    def test_canonical_pair(self):
        """``{integral u, integral Pi_u} = L``."""
        value = lattice_bracket(functional("u"), functional("Pi_u"), GRID, VALUES)
        assert float(value.body) == pytest.approx(2 * np.pi)


class TestFermionBracket:
    """Graded lattice brackets against the symbolic ones."""

    PAIRS = [
        ("f*psi", "1/2*psi_x*psi_2x"),
        ("f*Pi_psi", "1/2*psi_x*psi_2x"),
        ("f*Pi_psi", "u*psi*psi_x"),
        ("Pi_psi*psi_x", "1/2*Pi_u^2 + u*psi*psi_x"),
        ("f*psi", "g*Pi_psi"),
        ("u*psi*Pi_psi", "Pi_u*psi*psi_x"),
    ]

    @pytest.mark.parametrize("first,second", PAIRS)
    def test_matches_symbolic(self, first, second):
        f, g = fermi(first), fermi(second)
        symbolic = integrated(functional_bracket(f, g))
        numeric = lattice_bracket(f, g, FERMI_GRID, FERMI_VALUES)
        assert numeric.allclose(symbolic, atol=1e-6)

    @pytest.mark.parametrize("first,second", PAIRS)
    def test_graded_antisymmetry(self, first, second):
        f, g = fermi(first), fermi(second)
        both_odd = f.density.require_parity().is_odd and g.density.require_parity().is_odd
        forward = lattice_bracket(f, g, FERMI_GRID, FERMI_VALUES)
        backward = lattice_bracket(g, f, FERMI_GRID, FERMI_VALUES)
        assert forward.allclose(backward if both_odd else -backward, atol=1e-6)

    def test_fermion_commutes_with_its_hamiltonian(self):
        """``{psi, integral 1/2 psi_x psi_2x}`` vanishes without ``Pi_psi``."""
        value = lattice_bracket(fermi("f*psi"), fermi("1/2*psi_x*psi_2x"), FERMI_GRID, FERMI_VALUES)
        assert value.norm() < 1e-10

    def test_momentum_flow_is_nonzero(self):
        value = lattice_bracket(
            fermi("f*Pi_psi"), fermi("1/2*psi_x*psi_2x"), FERMI_GRID, FERMI_VALUES
        )
        assert value.is_homogeneous(odd=True)
        assert value.norm() > 1e-3

    def test_symmetric_odd_pair(self):
        """``{integral f psi, integral g Pi_psi} = -integral f g``."""
        value = lattice_bracket(fermi("f*psi"), fermi("g*Pi_psi"), FERMI_GRID, FERMI_VALUES)
        expected = -float(np.sum(FERMI_VALUES["f"] * FERMI_VALUES["g"]) * FERMI_GRID.dx)
        assert float(value.body) == pytest.approx(expected, abs=1e-10)


class TestConstraintKernels:
    """Smeared constraint brackets ``{integral f c, integral g c}`` on the lattice."""

    def smeared(self, constraint: str) -> tuple[DeltaKernel, GrassmannValue, GrassmannValue]:
        density = parse_component(constraint, FERMI_TABLE)
        kernel = bracket_constraint_constraint(density, density, FERMI_TABLE)
        f = LocalFunctional(DiffPoly.jet("f") * density, FERMI_TABLE)
        g = LocalFunctional(DiffPoly.jet("g") * density, FERMI_TABLE)
        numeric = lattice_bracket(f, g, FERMI_GRID, FERMI_VALUES)
        expected = integrated(DiffPoly.jet("f") * kernel.apply(DiffPoly.jet("g")))
        return kernel, numeric, expected

    def test_fermion_momentum_constraint(self):
        kernel, numeric, expected = self.smeared("Pi_psi + 1/2*psi")
        assert kernel == DeltaKernel({0: DiffPoly.constant(-1)})
        assert numeric.allclose(expected, atol=1e-8)
        assert abs(float(numeric.body)) > 1e-2

    def test_boson_momentum_constraint(self):
        kernel, numeric, expected = self.smeared("Pi_u + 1/2*u_x")
        assert kernel == DeltaKernel({1: DiffPoly.constant(1)})
        assert numeric.allclose(expected, atol=1e-8)
        assert abs(float(numeric.body)) > 1e-2
