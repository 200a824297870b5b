"""
Finite-dimensional cross-checks for the variational and bracket layers.

A density becomes a function of the lattice variables ``v_j = v(x_j)`` on a
small periodic lattice, with x-derivatives replaced by wide centered-difference
stencils. Bosonic lattice variables are real. Fermionic ones carry
coefficients in a two-generator Grassmann algebra, so products of fermions
leave a ``g12`` part instead of vanishing.

Gradients in bosonic directions are central differences in the value.
Gradients in fermionic directions are read off exactly by shifting the
variable with a spare generator ``eta``:
``F(v + eta e_j) - F(v) = eta * dL F / dv_j``.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from math import factorial
from typing import Mapping, Union

import numpy as np

from skdv_core.algebra.brackets import BracketTable
from skdv_core.algebra.poly import DiffPoly
from skdv_core.algebra.variational import LocalFunctional
from skdv_core.exceptions import UnknownFieldError, UnsupportedOperationError
from skdv_core.numerics.grassmann import GrassmannAlgebra, GrassmannValue, algebra
from skdv_core.numerics.grid import FieldGrid, eval_density

DEFAULT_STEP = 1e-5
ORACLE_POINTS = 32
ORACLE_GENERATORS = 2
STENCIL_ACCURACY = 24

Values = Mapping[str, Union[np.ndarray, GrassmannValue]]


@lru_cache(maxsize=None)
def centered_weights(accuracy: int) -> tuple[float, ...]:
    """
    Weights ``c_k`` of ``f'(x) ~ sum_k c_k (f(x + k h) - f(x - k h)) / h``.

    The truncation error is ``O(h^accuracy)``.
    """
    if accuracy < 2 or accuracy % 2:
        raise ValueError(f"Stencil accuracy must be a positive even number, got {accuracy}")
    half = accuracy // 2
    return tuple(
        (-1) ** (k + 1) * factorial(half) ** 2 / (k * factorial(half - k) * factorial(half + k))
        for k in range(1, half + 1)
    )


@dataclass
class LatticeGrid(FieldGrid):
    """A periodic lattice whose x-derivatives are centered-difference stencils."""

    accuracy: int = STENCIL_ACCURACY

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.accuracy >= self.points:
            raise ValueError(
                f"A stencil of accuracy {self.accuracy} does not fit on {self.points} points"
            )

    def with_fields(self, fields: Mapping[str, GrassmannValue]) -> "LatticeGrid":
        return LatticeGrid(
            self.length, self.points, self.algebra, dict(fields), self.start, self.accuracy
        )

    def differentiate(self, value: GrassmannValue, order: int = 1) -> GrassmannValue:
        data = value.data
        for _ in range(order):
            stepped = np.zeros_like(data)
            for k, weight in enumerate(centered_weights(self.accuracy), start=1):
                stepped += weight * (np.roll(data, -k, axis=-1) - np.roll(data, k, axis=-1))
            data = stepped / self.dx
        return GrassmannValue(self.algebra, data)

    def antiderivative(self, value: GrassmannValue) -> GrassmannValue:
        raise UnsupportedOperationError("The lattice oracle handles local densities only")


def lattice_grid(
    length: float = 2 * np.pi,
    points: int = ORACLE_POINTS,
    generators: int = 0,
    accuracy: int = STENCIL_ACCURACY,
) -> LatticeGrid:
    return LatticeGrid(length, points, algebra(generators), accuracy=accuracy)


def _embed(value: GrassmannValue, target: GrassmannAlgebra) -> GrassmannValue:
    if value.algebra == target:
        return value
    if value.algebra.generators > target.generators:
        raise ValueError("Lattice value uses more generators than the lattice")
    data = np.zeros((target.size, *value.shape))
    data[: value.algebra.size] = value.data
    return GrassmannValue(target, data)


def _lattice_value(grid: FieldGrid, value: Union[np.ndarray, GrassmannValue]) -> GrassmannValue:
    if isinstance(value, GrassmannValue):
        return _embed(value, grid.algebra)
    return GrassmannValue.scalar(grid.algebra, np.asarray(value, dtype=float))


def _sampled(grid: FieldGrid, values: Values) -> FieldGrid:
    return grid.with_fields({name: _lattice_value(grid, v) for name, v in values.items()})


def _shifted(value: GrassmannValue, site: int, amount: float, mask: int = 0) -> GrassmannValue:
    data = value.data.copy()
    data[mask, site] += amount
    return GrassmannValue(value.algebra, data)


def lattice_functional(density: DiffPoly, grid: FieldGrid, values: Values) -> GrassmannValue:
    """``sum_j density(x_j) dx``."""
    return grid.integrate(eval_density(density, _sampled(grid, values)))


def lattice_gradient(
    density: DiffPoly,
    grid: LatticeGrid,
    values: Values,
    name: str,
    step: float = DEFAULT_STEP,
) -> GrassmannValue:
    """Left gradient of the lattice functional in ``name`` at every site, divided by ``dx``."""
    parities = {atom.field: atom.odd for atom in density.jets()}
    if name not in parities:
        return grid.zeros()
    if name not in values:
        raise UnknownFieldError(f"Field '{name}' is not sampled on the lattice")
    base = {key: _lattice_value(grid, v) for key, v in values.items()}
    gradient = np.zeros((grid.algebra.size, grid.points))

    if not parities[name]:
        for j in range(grid.points):
            plus = {**base, name: _shifted(base[name], j, step)}
            minus = {**base, name: _shifted(base[name], j, -step)}
            delta = lattice_functional(density, grid, plus) - lattice_functional(
                density, grid, minus
            )
            gradient[:, j] = delta.data / (2 * step)
        return GrassmannValue(grid.algebra, gradient / grid.dx)

    spare_algebra = algebra(grid.algebra.generators + 1)
    spare = 1 << grid.algebra.generators
    spare_grid = replace(grid, algebra=spare_algebra, fields={})
    lifted = {key: _embed(v, spare_algebra) for key, v in base.items()}
    reference = lattice_functional(density, spare_grid, lifted)
    for j in range(grid.points):
        shifted = {**lifted, name: _shifted(lifted[name], j, 1.0, spare)}
        delta = lattice_functional(density, spare_grid, shifted) - reference
        for mask in range(grid.algebra.size):
            # eta * g_m = (-1)^|m| g_m * eta
            sign = -1.0 if GrassmannAlgebra.degree(mask) % 2 else 1.0
            gradient[mask, j] = sign * delta.data[mask | spare]
    return GrassmannValue(grid.algebra, gradient / grid.dx)


def lattice_bracket(
    first: LocalFunctional,
    second: LocalFunctional,
    grid: LatticeGrid,
    values: Values,
    step: float = DEFAULT_STEP,
) -> GrassmannValue:
    """
    ``sum_j sum_ab dR F / dz_a(j) * omega_ab * dL G / dz_b(j) / dx``.

    The right gradient of ``F`` in an odd direction is the left one times
    ``(-1)^(|F| + 1)``.
    """
    brackets = BracketTable.from_fields(first.fields)
    first_odd = first.density.require_parity().is_odd
    right: dict[str, GrassmannValue] = {}
    left: dict[str, GrassmannValue] = {}
    total = GrassmannValue.zeros(grid.algebra)
    for (a, b), weight in brackets.omega.items():
        if a not in right:
            gradient = lattice_gradient(first.density, grid, values, a, step)
            right[a] = -gradient if brackets.parities[a].is_odd and not first_odd else gradient
        if b not in left:
            left[b] = lattice_gradient(second.density, grid, values, b, step)
        total = total + grid.integrate(right[a] * left[b]) * weight
    return total


def sampled_density(density: DiffPoly, grid: FieldGrid, values: Values) -> GrassmannValue:
    """``density`` sampled on the lattice."""
    return eval_density(density, _sampled(grid, values))
