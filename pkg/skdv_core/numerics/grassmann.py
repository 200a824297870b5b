"""
Arrays valued in a finite Grassmann algebra.

A value over ``n`` generators ``g_1 .. g_n`` is stored as an array of shape
``(2**n, *shape)``: row ``m`` holds the coefficient of the monomial whose
generators are the set bits of ``m`` in increasing order. Row 0 is the body.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from skdv_core.exceptions import ParityError

MAX_GENERATORS = 4


def _swap_count(left: int, right: int) -> int:
    """Transpositions needed to sort the generators of ``left * right``."""
    count = 0
    for i in range(MAX_GENERATORS):
        if (left >> i) & 1:
            count += sum(1 for j in range(i) if (right >> j) & 1)
    return count


@dataclass(frozen=True)
class GrassmannAlgebra:
    """Multiplication table of the Grassmann algebra on ``generators`` generators."""

    generators: int
    products: tuple[tuple[int, int, int, int], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 0 <= self.generators <= MAX_GENERATORS:
            raise ValueError(f"Between 0 and {MAX_GENERATORS} Grassmann generators are supported")
        table = []
        for left in range(self.size):
            for right in range(self.size):
                if left & right:
                    continue  # g_i^2 = 0
                sign = -1 if _swap_count(left, right) % 2 else 1
                table.append((left, right, left | right, sign))
        object.__setattr__(self, "products", tuple(table))

    @property
    def size(self) -> int:
        return 1 << self.generators

    @staticmethod
    def degree(mask: int) -> int:
        return bin(mask).count("1")

    def masks(self, odd: bool) -> list[int]:
        return [m for m in range(self.size) if self.degree(m) % 2 == int(odd)]

    def label(self, mask: int) -> str:
        """``g12`` for ``g_1 g_2``; the body is ``1``."""
        if mask == 0:
            return "1"
        return "g" + "".join(str(i + 1) for i in range(self.generators) if (mask >> i) & 1)


@lru_cache(maxsize=None)
def algebra(generators: int) -> GrassmannAlgebra:
    return GrassmannAlgebra(generators)


Operand = Union["GrassmannValue", float, int, np.ndarray]


@dataclass(frozen=True, eq=False)
class GrassmannValue:
    """A (possibly array-shaped) element of a Grassmann algebra."""

    algebra: GrassmannAlgebra
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.shape[0] != self.algebra.size:
            raise ValueError(
                f"Expected {self.algebra.size} components, got {self.data.shape[0]}"
            )

    @classmethod
    def zeros(cls, alg: GrassmannAlgebra, shape: Sequence[int] = ()) -> "GrassmannValue":
        return cls(alg, np.zeros((alg.size, *shape)))

    @classmethod
    def scalar(cls, alg: GrassmannAlgebra, values: Union[float, np.ndarray]) -> "GrassmannValue":
        """A value with only a body."""
        body = np.asarray(values, dtype=float)
        data = np.zeros((alg.size, *body.shape))
        data[0] = body
        return cls(alg, data)

    @classmethod
    def monomial(
        cls, alg: GrassmannAlgebra, mask: int, values: Union[float, np.ndarray]
    ) -> "GrassmannValue":
        if not 0 <= mask < alg.size:
            raise ValueError(f"Mask {mask} outside the algebra on {alg.generators} generators")
        profile = np.asarray(values, dtype=float)
        data = np.zeros((alg.size, *profile.shape))
        data[mask] = profile
        return cls(alg, data)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape[1:])

    @property
    def body(self) -> np.ndarray:
        return self.data[0]

    def component(self, mask: int) -> np.ndarray:
        return self.data[mask]

    def active(self) -> list[int]:
        """Masks with a nonzero coefficient somewhere."""
        flat = self.data.reshape(self.algebra.size, -1)
        return [m for m in range(self.algebra.size) if np.any(flat[m])]

    def is_homogeneous(self, odd: bool) -> bool:
        return all(self.algebra.degree(m) % 2 == int(odd) for m in self.active())

    def require_parity(self, odd: bool) -> "GrassmannValue":
        if not self.is_homogeneous(odd):
            kind = "odd" if odd else "even"
            raise ParityError(f"Grassmann value is not {kind}")
        return self

    def map(self, func) -> "GrassmannValue":
        """Apply a linear map acting on the trailing axes of every component."""
        return GrassmannValue(self.algebra, np.asarray(func(self.data)))

    def _lift(self, other: Operand) -> "GrassmannValue":
        if isinstance(other, GrassmannValue):
            if other.algebra != self.algebra:
                raise ValueError("Grassmann values over different algebras")
            return other
        return GrassmannValue.scalar(self.algebra, np.broadcast_to(other, self.shape))

    def __add__(self, other: Operand) -> "GrassmannValue":
        return GrassmannValue(self.algebra, self.data + self._lift(other).data)

    __radd__ = __add__

    def __neg__(self) -> "GrassmannValue":
        return GrassmannValue(self.algebra, -self.data)

    def __sub__(self, other: Operand) -> "GrassmannValue":
        return GrassmannValue(self.algebra, self.data - self._lift(other).data)

    def __rsub__(self, other: Operand) -> "GrassmannValue":
        return self._lift(other) - self

    def __mul__(self, other: Operand) -> "GrassmannValue":
        if not isinstance(other, GrassmannValue):
            return GrassmannValue(self.algebra, self.data * other)
        other = self._lift(other)
        left_active = set(self.active())
        right_active = set(other.active())
        shape = np.broadcast_shapes(self.shape, other.shape)
        result = np.zeros((self.algebra.size, *shape))
        for left, right, target, sign in self.algebra.products:
            if left in left_active and right in right_active:
                term = self.data[left] * other.data[right]
                result[target] += term if sign > 0 else -term
        return GrassmannValue(self.algebra, result)

    def __rmul__(self, other: Operand) -> "GrassmannValue":
        if isinstance(other, GrassmannValue):
            return other * self
        return GrassmannValue(self.algebra, self.data * other)

    def isfinite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.data**2)))

    def allclose(self, other: "GrassmannValue", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.data, self._lift(other).data, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        parts = [self.algebra.label(m) for m in self.active()]
        return f"GrassmannValue(generators={self.algebra.generators}, support={parts})"
