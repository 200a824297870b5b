"""
Graded differential polynomials.

A ``DiffPoly`` is a finite sum of monomials ``coeff * a1 * a2 * ...`` whose
atoms are jets of bosonic or fermionic fields (``u_2x``, ``psi_x``), time
derivative atoms (``Tdot(u)``), superfield atoms, or formal inverse
derivatives ``Dinv(F)``. Odd atoms anticommute; every stored monomial keeps
its atoms in canonical order with the permutation sign folded into the
coefficient. Coefficients are exact sympy expressions.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Union

import sympy

from skdv_core.algebra.fields import Parity
from skdv_core.exceptions import NonlocalError, ParityError, UnsupportedOperationError

Coeff = sympy.Expr
Scalar = Union[int, Fraction, sympy.Expr]


def as_coeff(value: Scalar) -> Coeff:
    """Convert a scalar to an exact sympy coefficient; floats are rejected."""
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        raise UnsupportedOperationError(f"Floating-point coefficient {value!r} is not exact")
    coeff = sympy.sympify(value)
    if coeff.is_Rational:
        return coeff
    if coeff.has(sympy.Float):
        raise UnsupportedOperationError(f"Floating-point coefficient {coeff} is not exact")
    return sympy.expand(coeff)


def _clean(coeff: Coeff) -> Coeff:
    return coeff if coeff.is_Rational else sympy.expand(coeff)


class Atom:
    """Base class of everything that can appear as a factor of a monomial."""

    odd: bool

    @property
    def sort_key(self) -> tuple:
        raise NotImplementedError

    def derivative(self) -> "DiffPoly":
        """Total x-derivative of the atom."""
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError

    @property
    def depth(self) -> int:
        return 0

    def __lt__(self, other: "Atom") -> bool:
        return self.sort_key < other.sort_key


@dataclass(frozen=True, eq=True)
class JetAtom(Atom):
    """``d^order/dx^order`` of a field; ``timed`` marks the time derivative of that jet."""

    field: str
    order: int = 0
    odd: bool = False
    timed: bool = False

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ValueError(f"Negative derivative order for {self.field}")

    @property
    def sort_key(self) -> tuple:
        return (0, self.field, int(self.timed), self.order)

    def derivative(self) -> "DiffPoly":
        return DiffPoly.atom(JetAtom(self.field, self.order + 1, self.odd, self.timed))

    def shifted(self, k: int) -> "JetAtom":
        return JetAtom(self.field, self.order + k, self.odd, self.timed)

    def render(self) -> str:
        name = jet_name(self.field, self.order)
        return f"Tdot({name})" if self.timed else name


def jet_name(field: str, order: int) -> str:
    if order == 0:
        return field
    if order == 1:
        return f"{field}_x"
    return f"{field}_{order}x"


@dataclass(frozen=True, eq=True)
class NonlocalAtom(Atom):
    """Formal inverse derivative ``Dinv(arg)``; build instances with ``integrate.dinv``."""

    arg: "DiffPoly"

    @property
    def odd(self) -> bool:  # type: ignore[override]
        return self.arg.require_parity().is_odd

    @cached_property
    def sort_key(self) -> tuple:  # type: ignore[override]
        return (2, self.arg.sort_key)

    def derivative(self) -> "DiffPoly":
        return self.arg

    @property
    def depth(self) -> int:
        return 1 + self.arg.nonlocal_depth

    def render(self) -> str:
        return f"Dinv({self.arg})"


Atoms = tuple[Atom, ...]


@dataclass(frozen=True)
class Monomial:
    """A coefficient times an ordered list of atoms."""

    coeff: Coeff
    atoms: Atoms


def canonical_order(atoms: Iterable[Atom]) -> Optional[tuple[int, Atoms]]:
    """
    Sort atoms canonically.

    Returns:
        ``(sign, sorted_atoms)`` where ``sign`` is the parity of the permutation
        restricted to odd atoms, or None when an odd atom repeats (zero monomial).
    """
    items = list(atoms)
    order = sorted(range(len(items)), key=lambda i: items[i].sort_key)
    odd_positions = [i for i in order if items[i].odd]
    inversions = 0
    for a in range(len(odd_positions)):
        for b in range(a + 1, len(odd_positions)):
            if odd_positions[a] > odd_positions[b]:
                inversions += 1
    result = tuple(items[i] for i in order)
    for left, right in zip(result, result[1:]):
        if left.odd and left == right:
            return None
    return (-1 if inversions % 2 else 1), result


def normalize(m: Monomial) -> Optional[Monomial]:
    """Canonical form of a monomial, or None for the zero monomial."""
    coeff = _clean(as_coeff(m.coeff))
    if coeff == 0:
        return None
    ordered = canonical_order(m.atoms)
    if ordered is None:
        return None
    sign, atoms = ordered
    return Monomial(coeff * sign, atoms)


class DiffPoly:
    """
    Immutable graded differential polynomial.

    Terms are kept in a mapping from canonical atom tuples to nonzero
    coefficients. Instances are hashable and compare structurally, so zero
    tests are ``p.is_zero`` and equality is exact symbolic equality.
    """

    __slots__ = ("_terms", "_key")

    def __init__(self, terms: Optional[Mapping[Atoms, Coeff]] = None):
        self._terms: dict[Atoms, Coeff] = {}
        self._key: Optional[tuple] = None
        if terms:
            for atoms, coeff in terms.items():
                if coeff != 0:
                    self._terms[atoms] = coeff

    # Construction

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Scalar, Iterable[Atom]]]) -> "DiffPoly":
        """Build a polynomial from unnormalized ``(coeff, atoms)`` pairs."""
        acc: dict[Atoms, Coeff] = {}
        for coeff, atoms in terms:
            ordered = canonical_order(atoms)
            if ordered is None:
                continue
            sign, key = ordered
            value = as_coeff(coeff) * sign
            if key in acc:
                acc[key] = _clean(acc[key] + value)
            else:
                acc[key] = value
        return cls(acc)

    @classmethod
    def constant(cls, value: Scalar) -> "DiffPoly":
        coeff = as_coeff(value)
        return cls({(): coeff}) if coeff != 0 else cls()

    @classmethod
    def zero(cls) -> "DiffPoly":
        return cls()

    @classmethod
    def atom(cls, atom: Atom, coeff: Scalar = 1) -> "DiffPoly":
        return cls({(atom,): as_coeff(coeff)})

    @classmethod
    def jet(cls, field: str, order: int = 0, odd: bool = False, timed: bool = False) -> "DiffPoly":
        return cls.atom(JetAtom(field, order, odd, timed))

    # Inspection

    def __iter__(self) -> Iterator[Monomial]:
        for atoms in sorted(self._terms, key=_atoms_key):
            yield Monomial(self._terms[atoms], atoms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def terms(self) -> dict[Atoms, Coeff]:
        return dict(self._terms)

    def coefficient(self, atoms: Atoms) -> Coeff:
        return self._terms.get(atoms, sympy.Integer(0))

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(not atoms for atoms in self._terms)

    def constant_term(self) -> Coeff:
        return self._terms.get((), sympy.Integer(0))

    def parity(self) -> Optional[Parity]:
        """Common parity of all terms; EVEN for zero, None for mixed sums."""
        parities = {_term_parity(atoms) for atoms in self._terms}
        if not parities:
            return Parity.EVEN
        if len(parities) > 1:
            return None
        return parities.pop()

    def require_parity(self) -> Parity:
        parity = self.parity()
        if parity is None:
            raise ParityError(f"Expression has mixed parity: {self}")
        return parity

    def atoms(self) -> set[Atom]:
        return {a for atoms in self._terms for a in atoms}

    def jets(self) -> set[JetAtom]:
        return {a for a in self.atoms() if isinstance(a, JetAtom)}

    def fields(self) -> set[str]:
        """Field names of jet atoms, including those inside nonlocal arguments."""
        names = {a.field for a in self.jets()}
        for a in self.atoms():
            if isinstance(a, NonlocalAtom):
                names |= a.arg.fields()
        return names

    @property
    def has_nonlocal(self) -> bool:
        return any(isinstance(a, NonlocalAtom) for a in self.atoms())

    @property
    def nonlocal_depth(self) -> int:
        return max((a.depth for a in self.atoms()), default=0)

    def degrees(self) -> set[int]:
        return {len(atoms) for atoms in self._terms}

    def homogeneous_part(self, degree: int) -> "DiffPoly":
        return DiffPoly({a: c for a, c in self._terms.items() if len(a) == degree})

    def leading(self) -> Monomial:
        """First term in canonical order."""
        return next(iter(self))

    # Arithmetic

    def __add__(self, other: Union["DiffPoly", Scalar]) -> "DiffPoly":
        other = _lift(other)
        acc = dict(self._terms)
        for atoms, coeff in other._terms.items():
            if atoms in acc:
                acc[atoms] = _clean(acc[atoms] + coeff)
            else:
                acc[atoms] = coeff
        return DiffPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly({a: -c for a, c in self._terms.items()})

    def __sub__(self, other: Union["DiffPoly", Scalar]) -> "DiffPoly":
        return self + (-_lift(other))

    def __rsub__(self, other: Scalar) -> "DiffPoly":
        return _lift(other) - self

    def __mul__(self, other: Union["DiffPoly", Scalar]) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            factor = as_coeff(other)
            return DiffPoly({a: _clean(c * factor) for a, c in self._terms.items()})
        acc: dict[Atoms, Coeff] = {}
        for left, lc in self._terms.items():
            for right, rc in other._terms.items():
                ordered = canonical_order(left + right)
                if ordered is None:
                    continue
                sign, key = ordered
                value = lc * rc * sign
                acc[key] = _clean(acc[key] + value) if key in acc else _clean(value)
        return DiffPoly(acc)

    def __rmul__(self, other: Scalar) -> "DiffPoly":
        return self * other

    def __truediv__(self, other: Scalar) -> "DiffPoly":
        return self * (sympy.Integer(1) / as_coeff(other))

    def __pow__(self, exponent: int) -> "DiffPoly":
        if exponent < 0:
            raise UnsupportedOperationError("Negative powers are not polynomial")
        result = DiffPoly.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def dx(self, times: int = 1) -> "DiffPoly":
        """Total x-derivative (an even derivation, so no graded signs)."""
        result = self
        for _ in range(times):
            result = _dx_once(result)
        return result

    # Comparison and rendering

    @property
    def sort_key(self) -> tuple:
        if self._key is None:
            self._key = tuple(
                (_atoms_key(m.atoms), str(m.coeff)) for m in self
            )
        return self._key

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, sympy.Expr)):
            other = DiffPoly.constant(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self.sort_key)

    def __str__(self) -> str:
        return render_poly(self)

    def __repr__(self) -> str:
        return f"DiffPoly({render_poly(self)!r})"


def _lift(value: Union[DiffPoly, Scalar]) -> DiffPoly:
    return value if isinstance(value, DiffPoly) else DiffPoly.constant(value)


def _atoms_key(atoms: Atoms) -> tuple:
    return tuple(a.sort_key for a in atoms)


def _term_parity(atoms: Atoms) -> Parity:
    return Parity.of(sum(1 for a in atoms if a.odd) % 2 == 1)


def product(atoms: Iterable[Atom]) -> DiffPoly:
    return DiffPoly.from_terms([(1, tuple(atoms))])


def _dx_once(p: DiffPoly) -> DiffPoly:
    pieces: list[tuple[Coeff, Atoms]] = []
    composite = DiffPoly()
    for atoms, coeff in p.terms.items():
        for i, atom in enumerate(atoms):
            d = atom.derivative()
            single = d.terms
            if len(single) == 1:
                (datoms, dcoeff), = single.items()
                if len(datoms) == 1:
                    pieces.append((coeff * dcoeff, atoms[:i] + datoms + atoms[i + 1:]))
                    continue
            composite = composite + (product(atoms[:i]) * d * product(atoms[i + 1:])) * coeff
    return DiffPoly.from_terms(pieces) + composite


def partial_left(p: DiffPoly, atom: Atom) -> DiffPoly:
    """
    Graded left partial derivative with respect to a jet-like atom.

    Each occurrence of ``atom`` is anticommuted to the front (collecting a
    sign for every odd atom it passes when it is itself odd) and struck out.
    """
    return _partial(p, atom, left=True)


def partial_right(p: DiffPoly, atom: Atom) -> DiffPoly:
    """Graded right partial derivative: the atom is moved to the back before striking."""
    return _partial(p, atom, left=False)


def _partial(p: DiffPoly, atom: Atom, left: bool) -> DiffPoly:
    if isinstance(atom, NonlocalAtom):
        raise NonlocalError("Cannot differentiate with respect to a nonlocal atom")
    acc: dict[Atoms, Coeff] = {}
    for atoms, coeff in p.terms.items():
        for i, candidate in enumerate(atoms):
            if candidate != atom:
                continue
            passed = atoms[:i] if left else atoms[i + 1:]
            sign = -1 if atom.odd and sum(1 for a in passed if a.odd) % 2 else 1
            rest = atoms[:i] + atoms[i + 1:]
            acc[rest] = _clean(acc.get(rest, 0) + coeff * sign)
    return DiffPoly(acc)


def render_coeff(coeff: Coeff) -> str:
    if coeff.is_Integer:
        return str(coeff)
    if coeff.is_Rational:
        return f"{coeff.p}/{coeff.q}"
    return f"({sympy.sstr(coeff).replace('**', '^')})"


def render_atoms(atoms: Atoms) -> str:
    parts: list[str] = []
    i = 0
    while i < len(atoms):
        j = i
        while j + 1 < len(atoms) and atoms[j + 1] == atoms[i]:
            j += 1
        text = atoms[i].render()
        power = j - i + 1
        parts.append(f"{text}^{power}" if power > 1 else text)
        i = j + 1
    return "*".join(parts)


def render_poly(p: DiffPoly) -> str:
    """Canonical text: terms in canonical order, ``u_2x`` jets, ``p/q`` coefficients."""
    if p.is_zero:
        return "0"
    chunks: list[str] = []
    for index, m in enumerate(p):
        coeff = m.coeff
        negative = bool(coeff.is_Rational and coeff < 0)
        magnitude = -coeff if negative else coeff
        if not m.atoms:
            body = render_coeff(magnitude)
        elif magnitude == 1:
            body = render_atoms(m.atoms)
        else:
            body = f"{render_coeff(magnitude)}*{render_atoms(m.atoms)}"
        if index == 0:
            chunks.append(f"-{body}" if negative else body)
        else:
            chunks.append(f" - {body}" if negative else f" + {body}")
    return "".join(chunks)
