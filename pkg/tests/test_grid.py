"""Tests for the periodic spectral grid."""

import numpy as np
import pytest
import sympy

from skdv_core.algebra.poly import DiffPoly
from skdv_core.dsl import parse_component
from skdv_core.exceptions import NonlocalError, UnknownFieldError, UnsupportedOperationError
from skdv_core.numerics.grassmann import GrassmannValue, algebra
from skdv_core.numerics.grid import FieldGrid, eval_density

from tests.polys import TABLE


def body(grid: FieldGrid, values: np.ndarray) -> GrassmannValue:
    return GrassmannValue.scalar(grid.algebra, values)


class TestGrid:
    """Test grid geometry and validation."""

    def test_nodes(self):
        grid = FieldGrid(40.0, 8)
        assert grid.dx == 5.0
        assert np.allclose(grid.x, -20.0 + 5.0 * np.arange(8))

    def test_power_of_two(self):
        with pytest.raises(ValueError):
            FieldGrid(1.0, 24)

    def test_positive_length(self):
        with pytest.raises(ValueError):
            FieldGrid(0.0, 16)

    def test_unknown_field(self):
        with pytest.raises(UnknownFieldError):
            FieldGrid(1.0, 16).derivative("u")


class TestSpectralOperators:
    """Test derivatives, antiderivatives and filtering."""

    def test_derivative_of_sine(self):
        grid = FieldGrid(2 * np.pi, 32)
        u = body(grid, np.sin(grid.x))
        grid.set_field("u", u)
        assert np.allclose(grid.derivative("u", 1).body, np.cos(grid.x), atol=1e-12)
        assert np.allclose(grid.derivative("u", 3).body, -np.cos(grid.x), atol=1e-11)

    def test_cache_invalidated(self):
        grid = FieldGrid(2 * np.pi, 32)
        grid.set_field("u", body(grid, np.sin(grid.x)))
        grid.derivative("u", 1)
        grid.set_field("u", body(grid, np.sin(2 * grid.x)))
        assert np.allclose(grid.derivative("u", 1).body, 2 * np.cos(2 * grid.x), atol=1e-12)

    def test_antiderivative(self):
        grid = FieldGrid(2 * np.pi, 32)
        result = grid.antiderivative(body(grid, np.cos(grid.x)))
        assert np.allclose(result.body, np.sin(grid.x), atol=1e-12)

    def test_antiderivative_needs_zero_mean(self):
        grid = FieldGrid(2 * np.pi, 32)
        with pytest.raises(NonlocalError):
            grid.antiderivative(body(grid, 1.0 + np.cos(grid.x)))

    def test_dealias(self):
        grid = FieldGrid(2 * np.pi, 32)
        low, high = np.cos(3 * grid.x), np.cos(15 * grid.x)
        filtered = grid.dealias(body(grid, low + high))
        assert np.allclose(filtered.body, low, atol=1e-12)

    def test_integrate(self):
        grid = FieldGrid(2 * np.pi, 32)
        total = grid.integrate(body(grid, np.sin(grid.x) ** 2))
        assert float(total.body) == pytest.approx(np.pi)


class TestEvalDensity:
    """Test pointwise evaluation of densities."""

    def test_polynomial(self):
        grid = FieldGrid(2 * np.pi, 32)
        grid.set_field("u", body(grid, np.sin(grid.x)))
        value = eval_density(parse_component("3*u*u_x + 1", TABLE), grid)
        assert np.allclose(value.body, 3 * np.sin(grid.x) * np.cos(grid.x) + 1, atol=1e-12)

    def test_fermion_pair(self):
        """``psi*psi_x`` lands in ``g1 g2`` as ``f h' - h f'``."""
        grid = FieldGrid(2 * np.pi, 32, algebra(2))
        f, h = np.sin(grid.x), np.cos(2 * grid.x)
        psi = GrassmannValue.monomial(grid.algebra, 1, f) + GrassmannValue.monomial(
            grid.algebra, 2, h
        )
        grid.set_field("psi", psi)
        value = eval_density(parse_component("psi*psi_x", TABLE), grid)
        expected = f * (-2 * np.sin(2 * grid.x)) - h * np.cos(grid.x)
        assert np.allclose(value.component(3), expected, atol=1e-12)
        assert value.active() == [3]

    def test_single_generator_square_vanishes(self):
        grid = FieldGrid(2 * np.pi, 32, algebra(1))
        grid.set_field("psi", GrassmannValue.monomial(grid.algebra, 1, np.sin(grid.x)))
        value = eval_density(parse_component("psi*psi_x", TABLE), grid)
        assert np.allclose(value.data, 0.0)

    def test_nonlocal(self):
        grid = FieldGrid(2 * np.pi, 32)
        grid.set_field("u", body(grid, np.cos(grid.x)))
        value = eval_density(parse_component("Dinv(u)", TABLE), grid)
        assert np.allclose(value.body, np.sin(grid.x), atol=1e-12)

    def test_unbound_parameter(self):
        grid = FieldGrid(2 * np.pi, 32)
        grid.set_field("u", body(grid, np.cos(grid.x)))
        with pytest.raises(UnsupportedOperationError):
            eval_density(DiffPoly.jet("u") * sympy.Symbol("a"), grid)

    def test_complex_coefficient(self):
        grid = FieldGrid(2 * np.pi, 32)
        grid.set_field("u", body(grid, np.cos(grid.x)))
        with pytest.raises(UnsupportedOperationError):
            eval_density(DiffPoly.jet("u") * sympy.I, grid)

    def test_velocity_rejected(self):
        grid = FieldGrid(2 * np.pi, 32)
        grid.set_field("u", body(grid, np.cos(grid.x)))
        with pytest.raises(UnsupportedOperationError):
            eval_density(parse_component("Tdot(u)", TABLE), grid)
