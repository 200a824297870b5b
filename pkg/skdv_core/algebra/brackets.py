"""
Equal-time graded Poisson brackets.

The fundamental relations are

    {u(x), Pi_u(y)} = -{Pi_u(x), u(y)} = delta(x - y)        (even pairs)
    {psi(x), Pi_psi(y)} = {Pi_psi(x), psi(y)} = -delta(x - y) (odd pairs)

and the bracket of a density with a functional is

    {F(x), H} = sum_{a,k} dR F / d z_{a,k} * D^k( sum_b omega_ab * E_b(h) )

with ``E_b`` the left Euler operator. Multipliers and other non-canonical
fields are parameters: they have no partner and no flow.
"""

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from skdv_core.algebra.fields import FieldKind, FieldSpec, FieldTable, Parity
from skdv_core.algebra.integrate import dinv, substitute
from skdv_core.algebra.poly import Atom, DiffPoly, JetAtom, NonlocalAtom, product
from skdv_core.algebra.variational import LocalFunctional, euler_lagrange
from skdv_core.exceptions import ConstraintError
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

PROBE_FIELD = "lambda_probe"


@dataclass(frozen=True)
class DeltaKernel:
    """``sum_k coeffs[k](x) * d^k/dx^k delta(x - y)``."""

    coeffs: Mapping[int, DiffPoly] = field(default_factory=dict)

    def __post_init__(self) -> None:
        cleaned = {k: c for k, c in sorted(self.coeffs.items()) if not c.is_zero}
        if any(k < 0 for k in cleaned):
            raise ValueError("Delta kernel orders must be nonnegative")
        object.__setattr__(self, "coeffs", cleaned)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def orders(self) -> list[int]:
        return list(self.coeffs)

    def single_term(self) -> Optional[tuple[DiffPoly, int]]:
        """``(c, k)`` when the kernel is one term ``c * d^k delta``."""
        if len(self.coeffs) != 1:
            return None
        ((order, coeff),) = self.coeffs.items()
        return coeff, order

    def apply(self, p: DiffPoly) -> DiffPoly:
        """Act on a test density: ``sum_k c_k * D^k p``."""
        result = DiffPoly()
        for order, coeff in self.coeffs.items():
            result = result + coeff * p.dx(order)
        return result

    def __add__(self, other: "DeltaKernel") -> "DeltaKernel":
        merged = dict(self.coeffs)
        for order, coeff in other.coeffs.items():
            merged[order] = merged.get(order, DiffPoly()) + coeff
        return DeltaKernel(merged)

    def __neg__(self) -> "DeltaKernel":
        return DeltaKernel({k: -c for k, c in self.coeffs.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DeltaKernel):
            return NotImplemented
        return dict(self.coeffs) == dict(other.coeffs)

    def __hash__(self) -> int:
        return hash(tuple(self.coeffs.items()))

    def render(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for order, coeff in self.coeffs.items():
            delta = "delta" if order == 0 else ("d delta" if order == 1 else f"d^{order} delta")
            parts.append(f"({coeff})*{delta}")
        return " + ".join(parts)

    __str__ = render


@dataclass(frozen=True)
class BracketTable:
    """
    Symplectic weights ``omega[(a, b)]`` between canonical variables.

    ``omega[(a, b)]`` is the coefficient of ``delta`` in ``{a(x), b(y)}``.
    """

    omega: Mapping[tuple[str, str], int]
    parities: Mapping[str, Parity]

    @classmethod
    def from_fields(cls, table: FieldTable) -> "BracketTable":
        omega: dict[tuple[str, str], int] = {}
        parities: dict[str, Parity] = {}
        for name, momentum in table.canonical_pairs():
            spec = table[name]
            parities[name] = spec.parity
            parities[momentum] = spec.parity
            if spec.odd:
                omega[(name, momentum)] = -1
                omega[(momentum, name)] = -1
            else:
                omega[(name, momentum)] = 1
                omega[(momentum, name)] = -1
        return cls(omega, parities)

    @property
    def variables(self) -> list[str]:
        return list(self.parities)

    def partners(self, name: str) -> list[tuple[str, int]]:
        return [(b, w) for (a, b), w in self.omega.items() if a == name]

    def fundamental(self, a: str, b: str) -> DeltaKernel:
        weight = self.omega.get((a, b), 0)
        return DeltaKernel({0: DiffPoly.constant(weight)}) if weight else DeltaKernel()

    def is_symmetric(self, a: str, b: str) -> bool:
        return self.omega.get((a, b), 0) == self.omega.get((b, a), 0)


def hamilton_flow(
    hamiltonian: LocalFunctional, brackets: Optional[BracketTable] = None
) -> dict[str, DiffPoly]:
    """``z_a,t = sum_b omega_ab * delta H / delta z_b`` for every canonical variable."""
    brackets = brackets or BracketTable.from_fields(hamiltonian.fields)
    gradients: dict[str, DiffPoly] = {}
    flows: dict[str, DiffPoly] = {}
    for a in brackets.variables:
        flow = DiffPoly()
        for b, weight in brackets.partners(a):
            if b not in gradients:
                gradients[b] = euler_lagrange(hamiltonian, b)
            flow = flow + gradients[b] * weight
        flows[a] = flow
    return flows


def bracket_density_functional(
    density: DiffPoly,
    hamiltonian: LocalFunctional,
    brackets: Optional[BracketTable] = None,
) -> DiffPoly:
    """
    ``{F(x), integral h dy}`` for a parity-homogeneous density ``F``.

    Nonlocal factors of ``F`` are handled through ``{Dinv(G), H} = Dinv({G, H})``.
    """
    density.require_parity()
    brackets = brackets or BracketTable.from_fields(hamiltonian.fields)
    _check_partners(density, hamiltonian.fields, brackets)
    flows = hamilton_flow(hamiltonian, brackets)
    return _apply_flow(density, flows)


def _check_partners(density: DiffPoly, table: FieldTable, brackets: BracketTable) -> None:
    for name in density.fields():
        if name == PROBE_FIELD:
            continue
        spec = table[name]
        if spec.kind is not FieldKind.MULTIPLIER and name not in brackets.parities:
            raise ConstraintError(f"Field '{name}' has no conjugate partner")


def _apply_flow(density: DiffPoly, flows: Mapping[str, DiffPoly]) -> DiffPoly:
    result = DiffPoly()
    for atoms, coeff in density.terms.items():
        for i, atom in enumerate(atoms):
            rate = _rate(atom, flows)
            if rate is None or rate.is_zero:
                continue
            after = sum(1 for a in atoms[i + 1:] if a.odd)
            sign = -1 if atom.odd and after % 2 else 1
            rest = product(atoms[:i] + atoms[i + 1:])
            result = result + rest * rate * (coeff * sign)
    return result


def _rate(atom: Atom, flows: Mapping[str, DiffPoly]) -> Optional[DiffPoly]:
    if isinstance(atom, JetAtom):
        if atom.timed or atom.field not in flows:
            return None
        return flows[atom.field].dx(atom.order)
    if isinstance(atom, NonlocalAtom):
        return dinv(_apply_flow(atom.arg, flows))
    return None


def functional_bracket(
    first: LocalFunctional, second: LocalFunctional, brackets: Optional[BracketTable] = None
) -> DiffPoly:
    """A density of ``{integral F, integral G}``, defined modulo total derivatives."""
    return bracket_density_functional(first.density, second, brackets)


def _probe_table(table: FieldTable) -> FieldTable:
    if PROBE_FIELD in table:
        return table
    return table.extend([FieldSpec(PROBE_FIELD, Parity.EVEN, FieldKind.MULTIPLIER)])


def bracket_constraint_constraint(
    first: DiffPoly, second: DiffPoly, table: FieldTable
) -> DeltaKernel:
    """
    Kernel of ``{c_i(x), c_j(y)}`` in derivatives of ``delta(x - y)``.

    Evaluated as the operator ``lambda -> {c_i(x), integral c_j * lambda dy}``
    on an even test field.
    """
    probed = _probe_table(table)
    probe = DiffPoly.jet(PROBE_FIELD)
    value = bracket_density_functional(
        first, LocalFunctional(second * probe, probed), BracketTable.from_fields(table)
    )
    return kernel_in(value, PROBE_FIELD)


def kernel_in(value: DiffPoly, name: str) -> DeltaKernel:
    """Read ``sum_k c_k * D^k f`` off an expression linear in the field ``name``."""
    coeffs: dict[int, DiffPoly] = {}
    seen = DiffPoly()
    for atom in sorted(j for j in value.jets() if j.field == name and not j.timed):
        coefficient = _linear_coefficient(value, atom)
        coeffs[atom.order] = coefficient
        seen = seen + coefficient * DiffPoly.atom(atom)
    if seen != value:
        raise ConstraintError(f"Expression is not linear in '{name}'", str(value))
    return DeltaKernel(coeffs)


def _linear_coefficient(value: DiffPoly, atom: JetAtom) -> DiffPoly:
    acc: dict = {}
    for atoms, coeff in value.terms.items():
        if atom not in atoms:
            continue
        i = atoms.index(atom)
        after = sum(1 for a in atoms[i + 1:] if a.odd)
        sign = -1 if atom.odd and after % 2 else 1
        rest = atoms[:i] + atoms[i + 1:]
        acc[rest] = acc.get(rest, 0) + coeff * sign
    return DiffPoly(acc)


def constraint_matrix(
    constraints: Sequence[DiffPoly], table: FieldTable
) -> list[list[DeltaKernel]]:
    """Matrix of constraint brackets, row ``i`` holding ``{c_i(x), c_j(y)}``."""
    return [
        [bracket_constraint_constraint(ci, cj, table) for cj in constraints]
        for ci in constraints
    ]


@dataclass(frozen=True)
class SolvedConstraint:
    """A constraint written as ``field = rule`` on the constraint surface."""

    field: str
    rule: DiffPoly
    constraint: DiffPoly


def solve_constraint(constraint: DiffPoly, table: FieldTable) -> SolvedConstraint:
    """
    Solve a constraint for its leading atom.

    A momentum appearing linearly, undifferentiated and with a constant
    coefficient is preferred; otherwise such a dynamical field is used.
    """
    candidates: list[tuple[int, JetAtom]] = []
    for atom in sorted(constraint.jets()):
        if atom.order != 0 or atom.timed or atom.field not in table:
            continue
        kind = table[atom.field].kind
        if kind is FieldKind.MULTIPLIER:
            continue
        rank = 0 if kind is FieldKind.MOMENTUM else 1
        candidates.append((rank, atom))
    for _, atom in sorted(candidates, key=lambda c: (c[0], c[1].sort_key)):
        coefficient = constraint.coefficient((atom,))
        if coefficient == 0 or not coefficient.is_Rational:
            continue
        rest = constraint - DiffPoly.atom(atom, coefficient)
        if atom.field in rest.fields():
            continue
        return SolvedConstraint(atom.field, -rest / coefficient, constraint)
    raise ConstraintError("Constraint has no linear leading atom", str(constraint))


def weak_reduce(
    p: DiffPoly,
    constraints: Iterable[DiffPoly],
    table: FieldTable,
) -> DiffPoly:
    """
    Canonical representative of ``p`` on the constraint surface.

    Solved forms are substituted until nothing changes.
    """
    rules = {}
    for constraint in constraints:
        solved = solve_constraint(constraint, table)
        rules[solved.field] = solved.rule
    return reduce_with(p, rules)


def reduce_with(p: DiffPoly, rules: Mapping[str, DiffPoly]) -> DiffPoly:
    """Substitute ``rules`` repeatedly up to a fixed point."""
    current = p
    for _ in range(len(rules) + 1):
        reduced = substitute(current, rules)
        if reduced == current:
            return current
        current = reduced
    raise ConstraintError("Constraint substitution does not settle", str(p))
