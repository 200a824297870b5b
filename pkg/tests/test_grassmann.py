"""Tests for Grassmann-valued arrays."""

import itertools
import random

import numpy as np
import pytest

from skdv_core.exceptions import ParityError
from skdv_core.numerics.grassmann import GrassmannValue, algebra


def basis(generators: int, mask: int, value: float = 1.0) -> GrassmannValue:
    return GrassmannValue.monomial(algebra(generators), mask, value)


def random_value(rng: random.Random, generators: int) -> GrassmannValue:
    alg = algebra(generators)
    return GrassmannValue(alg, np.array([rng.uniform(-1, 1) for _ in range(alg.size)]))


class TestAlgebra:
    """Test the multiplication table."""

    def test_size_and_labels(self):
        alg = algebra(2)
        assert alg.size == 4
        assert [alg.label(m) for m in range(4)] == ["1", "g1", "g2", "g12"]
        assert alg.masks(odd=False) == [0, 3]
        assert alg.masks(odd=True) == [1, 2]

    def test_cached(self):
        assert algebra(3) is algebra(3)

    def test_too_many_generators(self):
        with pytest.raises(ValueError):
            algebra(5)

    def test_generators_anticommute(self):
        g1, g2 = basis(2, 1), basis(2, 2)
        assert (g1 * g2).allclose(basis(2, 3))
        assert (g2 * g1).allclose(basis(2, 3, -1.0))
        assert (g1 * g1).allclose(GrassmannValue.zeros(algebra(2)))

    def test_three_generator_sign(self):
        """``g3 * g12 = g123`` and ``g2 * g13 = -g123``."""
        assert (basis(3, 4) * basis(3, 3)).allclose(basis(3, 7))
        assert (basis(3, 2) * basis(3, 5)).allclose(basis(3, 7, -1.0))


class TestProperties:
    """Exhaustive and random checks for small algebras."""

    @pytest.mark.parametrize("generators", [0, 1, 2, 3])
    def test_graded_commutativity(self, generators):
        alg = algebra(generators)
        for a, b in itertools.product(range(alg.size), repeat=2):
            sign = -1.0 if alg.degree(a) % 2 and alg.degree(b) % 2 else 1.0
            left = basis(generators, a) * basis(generators, b)
            right = basis(generators, b) * basis(generators, a) * sign
            assert left.allclose(right)

    @pytest.mark.parametrize("generators", [0, 1, 2, 3])
    def test_associativity_on_basis(self, generators):
        alg = algebra(generators)
        for a, b, c in itertools.product(range(alg.size), repeat=3):
            x, y, z = (basis(generators, m) for m in (a, b, c))
            assert ((x * y) * z).allclose(x * (y * z))

    def test_associativity_random(self):
        rng = random.Random(53)
        for _ in range(1000):
            x, y, z = (random_value(rng, 3) for _ in range(3))
            assert ((x * y) * z).allclose(x * (y * z), atol=1e-12)

    def test_distributivity_random(self):
        rng = random.Random(59)
        for _ in range(1000):
            x, y, z = (random_value(rng, 2) for _ in range(3))
            assert (x * (y + z)).allclose(x * y + x * z, atol=1e-12)


class TestValues:
    """Test array-valued elements."""

    def test_scalar_broadcast(self):
        alg = algebra(1)
        value = GrassmannValue.monomial(alg, 1, np.ones(4)) + 2.0
        assert np.allclose(value.body, 2.0)
        assert np.allclose(value.component(1), 1.0)
        assert value.shape == (4,)

    def test_pointwise_product(self):
        alg = algebra(2)
        f, h = np.linspace(0, 1, 5), np.linspace(1, 2, 5)
        product = GrassmannValue.monomial(alg, 1, f) * GrassmannValue.monomial(alg, 2, h)
        assert np.allclose(product.component(3), f * h)
        assert product.active() == [3]

    def test_parity(self):
        alg = algebra(2)
        odd = GrassmannValue.monomial(alg, 1, 1.0)
        assert odd.is_homogeneous(odd=True)
        with pytest.raises(ParityError):
            (odd + 1.0).require_parity(odd=True)

    def test_mixed_algebras_rejected(self):
        with pytest.raises(ValueError):
            basis(1, 1) * basis(2, 1)

    def test_wrong_component_count(self):
        with pytest.raises(ValueError):
            GrassmannValue(algebra(2), np.zeros(3))

    def test_finite_and_norm(self):
        value = basis(1, 1, 3.0) + 4.0
        assert value.isfinite()
        assert value.norm() == pytest.approx(5.0)
        assert not (value * np.inf).isfinite()
