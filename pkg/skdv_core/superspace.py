"""
N=1 superspace calculus for a single fermionic superfield ``Phi = xi + theta*u``.

A ``SuperExpr`` is ``body + theta * theta_part`` where both parts are
polynomials in the superfield atoms ``D^k Phi`` (and possibly component jets).
The supercovariant derivative ``D = d/dtheta + theta * d/dx`` is an odd
derivation with ``D^2 = d/dx``.
"""

from dataclasses import dataclass, field
from typing import Iterable, Union

from skdv_core.algebra.brackets import weak_reduce
from skdv_core.algebra.fields import FieldTable
from skdv_core.algebra.integrate import split_exact, substitute
from skdv_core.algebra.poly import (
    Atom,
    DiffPoly,
    JetAtom,
    NonlocalAtom,
    Scalar,
    jet_name,
    product,
)
from skdv_core.exceptions import ParityError, UnsupportedOperationError
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

BOSON = "u"
FERMION = "xi"

# berezin(H_super) equals this sign times the component Hamiltonian on the
# constraint surface, modulo total derivatives.
SUPERSPACE_ORIENTATION = -1


@dataclass(frozen=True, eq=True)
class SuperAtom(Atom):
    """``D^order Phi``; with ``timed`` it is ``D^order`` of ``Phi_t``."""

    order: int = 0
    timed: bool = False

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ValueError("Negative supercovariant derivative order")

    @property
    def odd(self) -> bool:  # type: ignore[override]
        return self.order % 2 == 0

    @property
    def sort_key(self) -> tuple:
        return (1, int(self.timed), self.order)

    def derivative(self) -> DiffPoly:
        return DiffPoly.atom(SuperAtom(self.order + 2, self.timed))

    def render(self) -> str:
        if self.order == 0:
            text = "Phi"
        elif self.order == 1:
            text = "D(Phi)"
        else:
            text = f"Dk(Phi,{self.order})"
        return f"Tdot({text})" if self.timed else text

    def components(self) -> tuple[DiffPoly, DiffPoly]:
        """
        ``(theta^0, theta^1)`` parts.

        ``D^2m Phi = (xi_m, u_m)`` and ``D^(2m+1) Phi = (u_m, xi_(m+1))``.
        """
        half, rest = divmod(self.order, 2)
        if rest == 0:
            return (
                DiffPoly.jet(FERMION, half, odd=True, timed=self.timed),
                DiffPoly.jet(BOSON, half, timed=self.timed),
            )
        return (
            DiffPoly.jet(BOSON, half, timed=self.timed),
            DiffPoly.jet(FERMION, half + 1, odd=True, timed=self.timed),
        )


def superfield(order: int = 0, timed: bool = False) -> DiffPoly:
    return DiffPoly.atom(SuperAtom(order, timed))


def _graded(left: DiffPoly, right: DiffPoly) -> DiffPoly:
    """``sum_t (-1)^|t| t * right`` over the terms ``t`` of ``left``."""
    result = DiffPoly()
    for atoms, coeff in left.terms.items():
        odd = sum(1 for a in atoms if a.odd) % 2 == 1
        term = product(atoms) * right * coeff
        result = result + (-term if odd else term)
    return result


@dataclass(frozen=True)
class SuperExpr:
    """``body + theta * theta_part``."""

    body: DiffPoly = field(default_factory=DiffPoly)
    theta_part: DiffPoly = field(default_factory=DiffPoly)

    @classmethod
    def lift(cls, value: Union["SuperExpr", DiffPoly, Scalar]) -> "SuperExpr":
        if isinstance(value, SuperExpr):
            return value
        if isinstance(value, DiffPoly):
            return cls(value, DiffPoly())
        return cls(DiffPoly.constant(value), DiffPoly())

    @classmethod
    def theta(cls) -> "SuperExpr":
        return cls(DiffPoly(), DiffPoly.constant(1))

    @property
    def is_zero(self) -> bool:
        return self.body.is_zero and self.theta_part.is_zero

    def __add__(self, other) -> "SuperExpr":
        other = SuperExpr.lift(other)
        return SuperExpr(self.body + other.body, self.theta_part + other.theta_part)

    __radd__ = __add__

    def __neg__(self) -> "SuperExpr":
        return SuperExpr(-self.body, -self.theta_part)

    def __sub__(self, other) -> "SuperExpr":
        return self + (-SuperExpr.lift(other))

    def __rsub__(self, other) -> "SuperExpr":
        return SuperExpr.lift(other) - self

    def __mul__(self, other) -> "SuperExpr":
        if not isinstance(other, (SuperExpr, DiffPoly)):
            return SuperExpr(self.body * other, self.theta_part * other)
        other = SuperExpr.lift(other)
        body = self.body * other.body
        theta_part = _graded(self.body, other.theta_part) + self.theta_part * other.body
        return SuperExpr(body, theta_part)

    def __rmul__(self, other) -> "SuperExpr":
        return SuperExpr.lift(other) * self

    def __pow__(self, exponent: int) -> "SuperExpr":
        result = SuperExpr.lift(1)
        for _ in range(exponent):
            result = result * self
        return result

    def dx(self, times: int = 1) -> "SuperExpr":
        return SuperExpr(self.body.dx(times), self.theta_part.dx(times))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DiffPoly):
            other = SuperExpr.lift(other)
        if not isinstance(other, SuperExpr):
            return NotImplemented
        return self.body == other.body and self.theta_part == other.theta_part

    def __hash__(self) -> int:
        return hash((self.body, self.theta_part))

    def __str__(self) -> str:
        if self.theta_part.is_zero:
            return str(self.body)
        theta = f"theta*({self.theta_part})"
        return theta if self.body.is_zero else f"{self.body} + {theta}"


SuperLike = Union[SuperExpr, DiffPoly]


def _d_atom(atom: Atom) -> SuperExpr:
    if isinstance(atom, SuperAtom):
        return SuperExpr(superfield(atom.order + 1, atom.timed), DiffPoly())
    if isinstance(atom, (JetAtom, NonlocalAtom)):
        # Component quantities do not depend on theta: D X = theta * X_x.
        return SuperExpr(DiffPoly(), atom.derivative())
    raise UnsupportedOperationError(f"No supercovariant derivative for {atom.render()}")


def _d_product(atoms: tuple[Atom, ...]) -> SuperExpr:
    result = SuperExpr()
    sign = 1
    for i, atom in enumerate(atoms):
        left = product(atoms[:i]) * sign
        right = product(atoms[i + 1:])
        result = result + SuperExpr.lift(left) * _d_atom(atom) * right
        if atom.odd:
            sign = -sign
    return result


def _d_poly(p: DiffPoly) -> SuperExpr:
    result = SuperExpr()
    for atoms, coeff in p.terms.items():
        if not atoms:
            continue
        result = result + _d_product(atoms) * coeff
    return result


def super_d(e: SuperLike, times: int = 1) -> SuperExpr:
    """
    Apply ``D`` with the graded Leibniz rule.

    ``D(body + theta*t) = D(body) + t - theta*D(t)``.
    """
    current = SuperExpr.lift(e)
    for _ in range(times):
        d_body = _d_poly(current.body)
        d_theta = _d_poly(current.theta_part)
        current = SuperExpr(
            d_body.body + current.theta_part,
            d_body.theta_part - d_theta.body,
        )
    return current


def _atom_pair(atom: Atom) -> tuple[DiffPoly, DiffPoly]:
    if isinstance(atom, SuperAtom):
        return atom.components()
    return DiffPoly.atom(atom), DiffPoly()


def _poly_components(p: DiffPoly) -> tuple[DiffPoly, DiffPoly]:
    zeroth = DiffPoly()
    first = DiffPoly()
    for atoms, coeff in p.terms.items():
        low, high = DiffPoly.constant(coeff), DiffPoly()
        for atom in atoms:
            a_low, a_high = _atom_pair(atom)
            low, high = low * a_low, _graded(low, a_high) + high * a_low
        zeroth = zeroth + low
        first = first + high
    return zeroth, first


def to_components(e: SuperLike) -> tuple[DiffPoly, DiffPoly]:
    """Expand ``Phi = xi + theta*u`` and return the ``theta^0`` and ``theta^1`` parts."""
    e = SuperExpr.lift(e)
    body_low, body_high = _poly_components(e.body)
    theta_low, _ = _poly_components(e.theta_part)
    return body_low, body_high + theta_low


def berezin(e: SuperLike) -> DiffPoly:
    """``integral dtheta (a + theta*b) = b``."""
    return to_components(e)[1]


def shift_identification(e: SuperLike, by: int = 2) -> SuperExpr:
    """Rename ``D^k Phi`` to ``D^(k+by) Phi``; ``by=2`` is the identification ``Phi = D^2 Phi``."""
    if by % 2:
        raise ParityError("An odd shift changes the parity of every superfield atom")
    e = SuperExpr.lift(e)
    return SuperExpr(_shift(e.body, by), _shift(e.theta_part, by))


def _shift(p: DiffPoly, by: int) -> DiffPoly:
    return DiffPoly.from_terms(
        (coeff, tuple(_shift_atom(a, by) for a in atoms)) for atoms, coeff in p.terms.items()
    )


def _shift_atom(atom: Atom, by: int) -> Atom:
    if isinstance(atom, SuperAtom):
        return SuperAtom(atom.order + by, atom.timed)
    return atom


def component_name(order: int) -> str:
    """Component of ``D^order Phi`` in the ``theta^0`` slot, e.g. ``xi_x`` for order 2."""
    half, rest = divmod(order, 2)
    return jet_name(FERMION if rest == 0 else BOSON, half)


@dataclass(frozen=True)
class SuperMatch:
    matches: bool
    super_density: DiffPoly
    component_density: DiffPoly
    witness: DiffPoly | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.matches


def check_super_component_match(
    super_hamiltonian: SuperLike,
    component_hamiltonian: DiffPoly,
    constraints: Iterable[DiffPoly],
    table: FieldTable,
    orientation: int = SUPERSPACE_ORIENTATION,
) -> SuperMatch:
    """
    Compare a superspace Hamiltonian with a component one on the constraint surface.

    The component density is reduced weakly (which sets ``psi = xi_x`` and
    removes the momenta) and the difference to ``orientation * berezin`` must
    be a total x-derivative.
    """
    super_density = berezin(super_hamiltonian) * orientation
    reduced = weak_reduce(component_hamiltonian, list(constraints), table)
    if reduced.has_nonlocal:
        logger.warning("Nonlocal terms survive the reduction", density=str(reduced))
        return SuperMatch(False, super_density, reduced, reason="nonlocal terms remain")
    witness, remainder = split_exact(super_density - reduced)
    if not remainder.is_zero:
        logger.info("Superspace mismatch", remainder=str(remainder))
        return SuperMatch(False, super_density, reduced, reason=f"remainder {remainder}")
    return SuperMatch(True, super_density, reduced, witness=witness)


def reduce_fermions(p: DiffPoly, fields: Iterable[str] = (FERMION,)) -> DiffPoly:
    """Set the listed fermionic fields to zero."""
    return substitute(p, {name: DiffPoly() for name in fields})
