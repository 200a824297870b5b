"""Periodic pseudospectral grid and pointwise evaluation of densities."""

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
import sympy

from skdv_core.algebra.poly import Atom, DiffPoly, JetAtom, NonlocalAtom
from skdv_core.exceptions import NonlocalError, UnknownFieldError, UnsupportedOperationError
from skdv_core.numerics.grassmann import GrassmannAlgebra, GrassmannValue, algebra
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

MEAN_TOLERANCE = 1e-12
DEALIAS_FRACTION = 2.0 / 3.0


@dataclass
class FieldGrid:
    """
    Fields sampled on ``points`` equispaced nodes of ``[start, start + length)``.

    Derivatives are spectral with the Nyquist mode zeroed; they are cached per
    ``(field, order)`` for the lifetime of the grid.
    """

    length: float
    points: int
    algebra: GrassmannAlgebra = field(default_factory=lambda: algebra(0))
    fields: dict[str, GrassmannValue] = field(default_factory=dict)
    start: Optional[float] = None
    _cache: dict[tuple[str, int], GrassmannValue] = field(
        default_factory=dict, init=False, repr=False
    )

    def __post_init__(self) -> None:
        if self.points < 4 or self.points & (self.points - 1):
            raise ValueError(f"Grid size must be a power of two, got {self.points}")
        if self.length <= 0:
            raise ValueError("Domain length must be positive")
        if self.start is None:
            self.start = -self.length / 2
        for name, value in self.fields.items():
            self._check(name, value)

    def _check(self, name: str, value: GrassmannValue) -> None:
        if value.algebra != self.algebra or value.shape != (self.points,):
            raise ValueError(f"Field '{name}' does not live on this grid")

    @property
    def dx(self) -> float:
        return self.length / self.points

    @property
    def x(self) -> np.ndarray:
        return self.start + self.dx * np.arange(self.points)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Nonnegative wavenumbers of the real FFT, Nyquist included."""
        return 2.0 * np.pi / self.length * np.arange(self.points // 2 + 1)

    @property
    def max_wavenumber(self) -> float:
        return np.pi * self.points / self.length

    def with_fields(self, fields: Mapping[str, GrassmannValue]) -> "FieldGrid":
        return FieldGrid(self.length, self.points, self.algebra, dict(fields), self.start)

    def set_field(self, name: str, value: GrassmannValue) -> None:
        self._check(name, value)
        self.fields[name] = value
        self._cache = {key: v for key, v in self._cache.items() if key[0] != name}

    def zeros(self) -> GrassmannValue:
        return GrassmannValue.zeros(self.algebra, (self.points,))

    # Spectral operators

    def _multiplier(self, order: int) -> np.ndarray:
        factor = (1j * self.wavenumbers) ** order
        factor[-1] = 0.0
        return factor

    def differentiate(self, value: GrassmannValue, order: int = 1) -> GrassmannValue:
        if order == 0:
            return value
        spectrum = np.fft.rfft(value.data, axis=-1) * self._multiplier(order)
        return GrassmannValue(self.algebra, np.fft.irfft(spectrum, n=self.points, axis=-1))

    def antiderivative(self, value: GrassmannValue) -> GrassmannValue:
        """
        Zero-mean antiderivative.

        Raises:
            NonlocalError: some component of ``value`` has a nonzero mean
        """
        means = np.mean(value.data, axis=-1)
        scale = float(np.max(np.abs(value.data))) if value.data.size else 0.0
        if scale > 0 and np.any(np.abs(means) > MEAN_TOLERANCE * scale):
            raise NonlocalError(
                "nonlocal term ill-defined on this state",
                f"mean {float(np.max(np.abs(means))):.3e}",
            )
        spectrum = np.fft.rfft(value.data, axis=-1)
        factor = np.zeros_like(self.wavenumbers, dtype=complex)
        factor[1:-1] = 1.0 / (1j * self.wavenumbers[1:-1])
        return GrassmannValue(
            self.algebra, np.fft.irfft(spectrum * factor, n=self.points, axis=-1)
        )

    def dealias(self, value: GrassmannValue) -> GrassmannValue:
        """Zero the modes above two thirds of the Nyquist wavenumber."""
        spectrum = np.fft.rfft(value.data, axis=-1)
        cutoff = DEALIAS_FRACTION * self.max_wavenumber
        spectrum[..., self.wavenumbers > cutoff] = 0.0
        return GrassmannValue(self.algebra, np.fft.irfft(spectrum, n=self.points, axis=-1))

    def integrate(self, value: GrassmannValue) -> GrassmannValue:
        """``integral value dx`` over one period (rectangle rule, spectrally exact)."""
        return GrassmannValue(self.algebra, np.sum(value.data, axis=-1) * self.dx)

    def derivative(self, name: str, order: int = 0) -> GrassmannValue:
        if name not in self.fields:
            raise UnknownFieldError(f"Field '{name}' is not sampled on the grid")
        key = (name, order)
        if key not in self._cache:
            self._cache[key] = self.differentiate(self.fields[name], order)
        return self._cache[key]


def _numeric(coeff: sympy.Expr) -> float:
    if coeff.free_symbols:
        raise UnsupportedOperationError(
            f"Coefficient {coeff} has unbound parameters; fix them before simulating"
        )
    value = complex(coeff)
    if value.imag:
        raise UnsupportedOperationError(f"Complex coefficient {coeff} is not supported on the grid")
    return value.real


def _atom_value(atom: Atom, grid: FieldGrid) -> GrassmannValue:
    if isinstance(atom, JetAtom):
        if atom.timed:
            raise UnsupportedOperationError(f"Cannot sample the velocity {atom.render()}")
        return grid.derivative(atom.field, atom.order)
    if isinstance(atom, NonlocalAtom):
        return grid.antiderivative(eval_density(atom.arg, grid))
    raise UnsupportedOperationError(f"Cannot sample {atom.render()} on a grid")


def eval_density(p: DiffPoly, grid: FieldGrid) -> GrassmannValue:
    """
    Evaluate a density pointwise.

    Monomials are multiplied left to right in their canonical order, so the
    sign bookkeeping of the symbolic side carries over unchanged.
    """
    result = grid.zeros()
    for atoms, coeff in p.terms.items():
        weight = _numeric(coeff)
        if not atoms:
            result = result + weight
            continue
        term = _atom_value(atoms[0], grid)
        for atom in atoms[1:]:
            term = term * _atom_value(atom, grid)
        result = result + term * weight
    return result
