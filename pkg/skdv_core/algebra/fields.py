"""Field declarations: parity, kind and conjugation links."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional

from skdv_core.exceptions import ParityError, UnknownFieldError


class Parity(Enum):
    """Grassmann parity of a field or expression."""

    EVEN = 0
    ODD = 1

    def __mul__(self, other: "Parity") -> "Parity":
        return Parity((self.value + other.value) % 2)

    @property
    def is_odd(self) -> bool:
        return self is Parity.ODD

    @classmethod
    def of(cls, odd: bool) -> "Parity":
        return cls.ODD if odd else cls.EVEN


class FieldKind(Enum):
    """Role of a field in the canonical analysis."""

    DYNAMICAL = "dynamical"
    MOMENTUM = "momentum"
    MULTIPLIER = "multiplier"


@dataclass(frozen=True)
class FieldSpec:
    """A declared field. ``conjugate`` links a dynamical field to its momentum and back."""

    name: str
    parity: Parity = Parity.EVEN
    kind: FieldKind = FieldKind.DYNAMICAL
    conjugate: Optional[str] = None

    @property
    def odd(self) -> bool:
        return self.parity.is_odd


@dataclass(frozen=True)
class FieldTable:
    """
    Ordered, immutable collection of field declarations.

    The table is closed under conjugation: if ``u`` names ``Pi_u`` as its
    conjugate, ``Pi_u`` must exist, point back to ``u`` and share its parity.
    """

    specs: tuple[FieldSpec, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        names = [spec.name for spec in self.specs]
        if len(names) != len(set(names)):
            raise ValueError(f"Duplicate field names in table: {names}")
        by_name = {spec.name: spec for spec in self.specs}
        for spec in self.specs:
            if spec.conjugate is None:
                continue
            partner = by_name.get(spec.conjugate)
            if partner is None:
                raise UnknownFieldError(
                    f"Conjugate '{spec.conjugate}' of '{spec.name}' is not declared"
                )
            if partner.conjugate != spec.name:
                raise ValueError(
                    f"Conjugation link {spec.name} <-> {partner.name} is not symmetric"
                )
            if partner.parity is not spec.parity:
                raise ParityError(f"Conjugate pair {spec.name}/{partner.name} differs in parity")

    def __iter__(self) -> Iterator[FieldSpec]:
        return iter(self.specs)

    def __contains__(self, name: object) -> bool:
        return any(spec.name == name for spec in self.specs)

    def __getitem__(self, name: str) -> FieldSpec:
        for spec in self.specs:
            if spec.name == name:
                return spec
        raise UnknownFieldError(f"Unknown field '{name}'")

    def names(self, kind: Optional[FieldKind] = None) -> list[str]:
        return [s.name for s in self.specs if kind is None or s.kind is kind]

    def dynamical(self) -> list[FieldSpec]:
        return [s for s in self.specs if s.kind is FieldKind.DYNAMICAL]

    def momenta(self) -> list[FieldSpec]:
        return [s for s in self.specs if s.kind is FieldKind.MOMENTUM]

    def canonical_pairs(self) -> list[tuple[str, str]]:
        """(field, momentum) pairs in declaration order."""
        return [(s.name, s.conjugate) for s in self.dynamical() if s.conjugate is not None]

    def extend(self, specs: Iterable[FieldSpec]) -> "FieldTable":
        return FieldTable(self.specs + tuple(specs))

    def with_momenta(self, prefix: str = "Pi_") -> "FieldTable":
        """Return a table where every dynamical field gains a conjugate momentum."""
        specs: list[FieldSpec] = []
        extra: list[FieldSpec] = []
        for spec in self.specs:
            if spec.kind is FieldKind.DYNAMICAL and spec.conjugate is None:
                momentum = f"{prefix}{spec.name}"
                specs.append(FieldSpec(spec.name, spec.parity, spec.kind, momentum))
                extra.append(FieldSpec(momentum, spec.parity, FieldKind.MOMENTUM, spec.name))
            else:
                specs.append(spec)
        return FieldTable(tuple(specs + extra))

    def without(self, names: Iterable[str]) -> "FieldTable":
        dropped = set(names)
        return FieldTable(tuple(s for s in self.specs if s.name not in dropped))


def make_table(*declarations: tuple[str, bool]) -> FieldTable:
    """Build a table of dynamical fields from ``(name, odd)`` pairs."""
    return FieldTable(tuple(FieldSpec(name, Parity.of(odd)) for name, odd in declarations))
