"""
Graded variational calculus on the jet space.

All derivatives use the left convention: a variation is written
``delta L = sum_k delta(f_k) * dL L / d f_k`` and the Euler operator is
``E_f(L) = sum_k (-D)^k dL L / d f_k``. Time-derivative atoms ``Tdot(f)`` are
inert jet variables of their own.
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional

import sympy

from skdv_core.algebra.fields import FieldTable, Parity
from skdv_core.algebra.integrate import (
    dinv,
    euler_operator,
    jet_variables,
    split_exact,
    substitute,
)
from skdv_core.algebra.poly import (
    Atom,
    DiffPoly,
    JetAtom,
    NonlocalAtom,
    partial_left,
    partial_right,
    product,
)
from skdv_core.exceptions import (
    NonlocalError,
    ParityError,
    UnknownFieldError,
    UnsupportedOperationError,
)
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

__all__ = [
    "FirstOrderLagrangian",
    "HessianResult",
    "LocalFunctional",
    "equivalent",
    "euler_lagrange",
    "flow_derivative",
    "hessian",
    "is_conserved",
    "is_total_derivative",
    "legendre",
    "partial_left",
    "partial_right",
    "regular_legendre",
    "tdot",
    "variational_derivative",
]


def tdot(name: str, odd: bool = False) -> JetAtom:
    """The time-derivative atom of a field."""
    return JetAtom(name, 0, odd, timed=True)


@dataclass(frozen=True)
class LocalFunctional:
    """``integral density dx`` over the fields of ``fields``."""

    density: DiffPoly
    fields: FieldTable

    def __post_init__(self) -> None:
        unknown = sorted(self.density.fields() - set(self.fields.names()))
        if unknown:
            raise UnknownFieldError(f"Density uses undeclared fields: {unknown}")

    def variational_derivative(self, name: str) -> DiffPoly:
        return variational_derivative(self, name)

    def __str__(self) -> str:
        return str(self.density)


@dataclass(frozen=True)
class FirstOrderLagrangian(LocalFunctional):
    """
    A Lagrangian at most linear in the velocities.

    Velocities are ``Tdot(f)`` atoms of untimed order zero; a kinetic term
    such as ``u_x * u_t`` must be written as ``u_x * Tdot(u)``.
    """

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.density.require_parity() is not Parity.EVEN:
            raise ParityError(f"Lagrangian density must be even: {self.density}")
        for atom in self.density.jets():
            if atom.timed and atom.order > 0:
                raise UnsupportedOperationError(
                    f"x-derivative of a velocity ({atom.render()}); integrate by parts first"
                )

    def velocities(self) -> list[JetAtom]:
        """Velocity atoms of the dynamical fields in declaration order."""
        return [tdot(spec.name, spec.odd) for spec in self.fields.dynamical()]

    @property
    def kinetic(self) -> DiffPoly:
        return DiffPoly({a: c for a, c in self.density.terms.items() if _timed_count(a)})

    @property
    def potential(self) -> DiffPoly:
        return DiffPoly({a: c for a, c in self.density.terms.items() if not _timed_count(a)})

    def is_linear_in_velocities(self) -> bool:
        return all(_timed_count(atoms) <= 1 for atoms in self.density.terms)


def _timed_count(atoms: tuple[Atom, ...]) -> int:
    return sum(1 for a in atoms if isinstance(a, JetAtom) and a.timed)


def euler_lagrange(functional: LocalFunctional, name: str) -> DiffPoly:
    """
    Variational derivative of ``functional`` with respect to the field ``name``.

    Terms carrying one ``Dinv(F)`` factor are varied with the adjoint rule
    ``integral G * Dinv(F) = -integral Dinv(G) * F``.
    """
    spec = functional.fields[name]
    return _euler(functional.density, name, spec.odd)


def variational_derivative(functional: LocalFunctional, name: str) -> DiffPoly:
    """``delta H / delta f`` for a Hamiltonian density; velocities are not allowed."""
    if any(a.timed for a in functional.density.jets()):
        raise UnsupportedOperationError(
            "Hamiltonian density contains time derivatives", str(functional.density)
        )
    return euler_lagrange(functional, name)


def _euler(p: DiffPoly, name: str, odd: bool) -> DiffPoly:
    var = (name, odd, False)
    top = jet_variables(p).get(var)
    result = euler_operator(p, var, top) if top is not None else DiffPoly()
    for atoms, coeff in p.terms.items():
        nonlocal_positions = [i for i, a in enumerate(atoms) if isinstance(a, NonlocalAtom)]
        if not nonlocal_positions:
            continue
        if len(nonlocal_positions) > 1:
            raise UnsupportedOperationError(
                "Variation of a product of several nonlocal factors",
                str(product(atoms)),
            )
        result = result + _nonlocal_variation(atoms, coeff, nonlocal_positions[0], name, odd)
    return result


def _nonlocal_variation(
    atoms: tuple[Atom, ...], coeff, index: int, name: str, odd: bool
) -> DiffPoly:
    atom = atoms[index]
    assert isinstance(atom, NonlocalAtom)
    inner = atom.arg
    if inner.has_nonlocal and name in inner.fields():
        raise UnsupportedOperationError(
            f"Variation through nested nonlocal atoms in {atom.render()}"
        )
    var = (name, odd, False)
    top = jet_variables(inner).get(var)
    if top is None:
        return DiffPoly()
    rest = atoms[:index] + atoms[index + 1:]
    passed = sum(1 for a in atoms[index + 1:] if a.odd)
    move_sign = -1 if atom.odd and passed % 2 else 1
    rest_odd = sum(1 for a in rest if a.odd) % 2 == 1
    swap_sign = -1 if rest_odd and odd else 1
    outer = dinv(product(rest))
    result = DiffPoly()
    for k in range(top + 1):
        part = partial_left(inner, JetAtom(name, k, odd))
        if part.is_zero:
            continue
        term = (outer * part).dx(k)
        result = result + (term if k % 2 == 0 else -term)
    return result * (-move_sign * swap_sign * coeff)


def is_total_derivative(p: DiffPoly) -> tuple[bool, Optional[DiffPoly]]:
    """
    Decide whether a local density is an exact x-derivative.

    Returns:
        ``(True, G)`` with ``dx(G) == p`` or ``(False, None)``.
    """
    if p.has_nonlocal:
        raise NonlocalError("Exactness of a nonlocal density is undecidable here", str(p))
    g, r = split_exact(p)
    if r.is_zero:
        return True, g
    return False, None


def equivalent(a: DiffPoly, b: DiffPoly) -> bool:
    """
    ``a`` and ``b`` define the same functional (zero boundary data).

    Local differences must be exact; a difference carrying nonlocal factors
    must have every variational derivative vanish.
    """
    difference = a - b
    local = DiffPoly({k: c for k, c in difference.terms.items() if not _has_nonlocal(k)})
    rest = difference - local
    if not is_total_derivative(local)[0]:
        return False
    if rest.is_zero:
        return True
    variables = {(j.field, j.odd) for j in rest.jets() if not j.timed} | _nested_jets(rest)
    for name, odd in sorted(variables):
        if not _euler(rest, name, odd).is_zero:
            return False
    return True


def _has_nonlocal(atoms: tuple[Atom, ...]) -> bool:
    return any(isinstance(a, NonlocalAtom) for a in atoms)


def _nested_jets(p: DiffPoly) -> set[tuple[str, bool]]:
    found: set[tuple[str, bool]] = set()
    for atom in p.atoms():
        if isinstance(atom, NonlocalAtom):
            found |= {(a.field, a.odd) for a in atom.arg.jets() if not a.timed}
            found |= _nested_jets(atom.arg)
    return found


def flow_derivative(p: DiffPoly, flows: Mapping[str, DiffPoly]) -> DiffPoly:
    """
    Time derivative of a density along ``f_t = flows[f]``.

    The time derivative is an even derivation commuting with ``D``; fields
    without a flow are treated as constant in time.
    """
    result = DiffPoly()
    for atoms, coeff in p.terms.items():
        for i, atom in enumerate(atoms):
            rate = _atom_rate(atom, flows)
            if rate is None or rate.is_zero:
                continue
            result = result + product(atoms[:i]) * rate * product(atoms[i + 1:]) * coeff
    return result


def _atom_rate(atom: Atom, flows: Mapping[str, DiffPoly]) -> Optional[DiffPoly]:
    if isinstance(atom, JetAtom):
        if atom.timed or atom.field not in flows:
            return None
        return flows[atom.field].dx(atom.order)
    if isinstance(atom, NonlocalAtom):
        return dinv(flow_derivative(atom.arg, flows))
    raise UnsupportedOperationError(f"No time derivative defined for {atom.render()}")


def is_conserved(density: DiffPoly, flows: Mapping[str, DiffPoly]) -> bool:
    """``integral density dx`` is constant along the flow."""
    return equivalent(flow_derivative(density, flows), DiffPoly())


def legendre(
    lagrangian: FirstOrderLagrangian, momentum_prefix: str = "Pi_"
) -> tuple[dict[str, DiffPoly], LocalFunctional]:
    """
    Legendre transform with left derivatives.

    Returns:
        ``momenta[f] = dL L / d Tdot(f)`` and ``H_L = sum_f Tdot(f) * momenta[f] - L``
        over the table extended with momentum fields.
    """
    if not lagrangian.is_linear_in_velocities():
        raise UnsupportedOperationError(
            "Legendre transform needs a Lagrangian linear in the velocities"
        )
    momenta: dict[str, DiffPoly] = {}
    sum_term = DiffPoly()
    for velocity in lagrangian.velocities():
        momentum = partial_left(lagrangian.density, velocity)
        momenta[velocity.field] = momentum
        sum_term = sum_term + DiffPoly.atom(velocity) * momentum
    density = sum_term - lagrangian.density
    survivors = [a.render() for a in density.jets() if a.timed]
    if survivors:
        raise UnsupportedOperationError(
            "Velocities survive the Legendre transform", ", ".join(sorted(survivors))
        )
    table = lagrangian.fields.with_momenta(momentum_prefix)
    logger.debug(
        "Legendre transform",
        H_L=str(density),
        momenta={k: str(v) for k, v in momenta.items()},
    )
    return momenta, LocalFunctional(density, table)


@dataclass(frozen=True)
class HessianResult:
    matrix: list[list[DiffPoly]] = field(default_factory=list)
    determinant: DiffPoly = field(default_factory=DiffPoly)
    fields: list[str] = field(default_factory=list)

    @property
    def is_degenerate(self) -> bool:
        return self.determinant.is_zero


def hessian(lagrangian: LocalFunctional) -> HessianResult:
    """
    Second left derivatives in the velocities and their determinant.

    The determinant is expanded along rows in a fixed order. A nonzero entry
    pairing two odd velocities would need a Berezinian and is rejected.
    """
    specs = lagrangian.fields.dynamical()
    velocities = [tdot(s.name, s.odd) for s in specs]
    matrix: list[list[DiffPoly]] = []
    for vi in velocities:
        first = partial_left(lagrangian.density, vi)
        matrix.append([partial_left(first, vj) for vj in velocities])
    for i, si in enumerate(specs):
        for j, sj in enumerate(specs):
            if si.odd and sj.odd and not matrix[i][j].is_zero:
                raise UnsupportedOperationError(
                    "Nonzero odd-odd Hessian block needs a Berezinian",
                    f"{si.name},{sj.name}: {matrix[i][j]}",
                )
    return HessianResult(matrix, _determinant(matrix), [s.name for s in specs])


def _determinant(matrix: list[list[DiffPoly]]) -> DiffPoly:
    n = len(matrix)
    if n == 0:
        return DiffPoly.constant(1)
    if n == 1:
        return matrix[0][0]
    total = DiffPoly()
    for col in range(n):
        entry = matrix[0][col]
        if entry.is_zero:
            continue
        minor = [row[:col] + row[col + 1:] for row in matrix[1:]]
        cofactor = entry * _determinant(minor)
        total = total + (cofactor if col % 2 == 0 else -cofactor)
    return total


def regular_legendre(
    lagrangian: LocalFunctional, momentum_prefix: str = "Pi_"
) -> tuple[dict[str, DiffPoly], LocalFunctional]:
    """
    Legendre transform of a non-degenerate Lagrangian quadratic in even velocities.

    The velocities are solved from ``Pi = M * v + b`` with the constant Hessian ``M``.
    """
    result = hessian(lagrangian)
    if result.is_degenerate:
        raise UnsupportedOperationError("Degenerate Lagrangian needs the constraint algorithm")
    specs = lagrangian.fields.dynamical()
    if any(spec.odd for spec in specs):
        raise UnsupportedOperationError("Regular Legendre transform of odd velocities")
    if not all(entry.is_constant for row in result.matrix for entry in row):
        raise UnsupportedOperationError("Field-dependent Hessian cannot be inverted")
    matrix = sympy.Matrix([[entry.constant_term() for entry in row] for row in result.matrix])
    inverse = matrix.inv()
    at_rest = {spec.name: DiffPoly() for spec in specs}
    momenta: dict[str, DiffPoly] = {}
    offsets: list[DiffPoly] = []
    for spec in specs:
        momentum = partial_left(lagrangian.density, tdot(spec.name))
        momenta[spec.name] = momentum
        offsets.append(substitute(momentum, at_rest, timed=True))
    table = lagrangian.fields.with_momenta(momentum_prefix)
    conjugates = [DiffPoly.jet(table[spec.name].conjugate or "") for spec in specs]
    velocities: dict[str, DiffPoly] = {}
    for i, spec in enumerate(specs):
        value = DiffPoly()
        for j in range(len(specs)):
            value = value + (conjugates[j] - offsets[j]) * inverse[i, j]
        velocities[spec.name] = value
    density = -substitute(lagrangian.density, velocities, timed=True)
    for spec, conjugate in zip(specs, conjugates):
        density = density + velocities[spec.name] * conjugate
    return momenta, LocalFunctional(density, table)
