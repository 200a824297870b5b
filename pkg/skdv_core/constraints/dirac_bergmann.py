"""
Dirac-Bergmann constraint algorithm.

Starting from the primary constraints ``Pi_f - dL L / d Tdot(f)`` of a
degenerate first-order Lagrangian, every generation brackets all constraints
with the current total Hamiltonian ``H_L + sum_i lam_i * c_i``. Expressions
that vanish on the constraint surface are conserved, multiplier-free ones
become new (secondary) constraints, and the rest are equations for the
multipliers. Once a generation adds nothing new the multiplier equations are
solved by formal inversion of ``c * D^k``.
"""

import json
from enum import Enum
from typing import Any, Mapping, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, InstanceOf, field_serializer

from skdv_core.algebra.brackets import (
    BracketTable,
    DeltaKernel,
    bracket_density_functional,
    constraint_matrix,
    kernel_in,
    weak_reduce,
)
from skdv_core.algebra.fields import FieldKind, FieldSpec, FieldTable, Parity
from skdv_core.algebra.integrate import antiderivative, dinv, substitute
from skdv_core.algebra.poly import DiffPoly, JetAtom
from skdv_core.algebra.variational import (
    FirstOrderLagrangian,
    LocalFunctional,
    hessian,
    legendre,
    regular_legendre,
)
from skdv_core.exceptions import (
    ConstraintError,
    IterationLimitError,
    MultiplierSolveError,
    ParityError,
    UnsupportedOperationError,
)
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_MAX_GENERATIONS = 10


class ConstraintStatus(str, Enum):
    """Outcome of the consistency check of one constraint."""

    UNCHECKED = "unchecked"
    PRODUCED_SECONDARY = "produced_secondary"
    MULTIPLIER_FIXED = "multiplier_fixed"
    IDENTICALLY_CONSERVED = "identically_conserved"


class ConstraintRecord(BaseModel):
    """A constraint, its multiplier and where the algorithm left it."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    id: str
    density: DiffPoly
    generation: int = 0
    parity: Parity = Parity.EVEN
    multiplier: str
    status: ConstraintStatus = ConstraintStatus.UNCHECKED
    link: Optional[str] = None  # secondary produced or multiplier fixed
    constraint_class: Optional[str] = None  # "first" or "second"

    @field_serializer("density")
    def _render_density(self, density: DiffPoly) -> str:
        return str(density)

    @field_serializer("parity")
    def _render_parity(self, parity: Parity) -> str:
        return parity.name.lower()

    @property
    def is_primary(self) -> bool:
        return self.generation == 0


class StepRecord(BaseModel):
    """One line of the transcript."""

    generation: int
    action: str
    constraint: Optional[str] = None
    expression: str = ""
    note: str = ""


class MultiplierEquation(BaseModel):
    """``expression = 0``, linear in the multipliers it mentions."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    constraint: str
    expression: DiffPoly
    unknowns: tuple[str, ...]


class DBAReport(BaseModel):
    """State and transcript of one run of the constraint algorithm."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    canonical_hamiltonian: InstanceOf[LocalFunctional]
    momenta: dict[str, DiffPoly] = Field(default_factory=dict)
    constraints: list[ConstraintRecord] = Field(default_factory=list)
    multipliers: dict[str, DiffPoly] = Field(default_factory=dict)
    equations: list[MultiplierEquation] = Field(default_factory=list)
    steps: list[StepRecord] = Field(default_factory=list)
    generation: int = 0
    closed: bool = False
    undetermined: list[str] = Field(default_factory=list)  # multipliers left free
    unsatisfied: list[str] = Field(default_factory=list)  # constraints with a residual
    finished: bool = False

    def constraint(self, constraint_id: str) -> ConstraintRecord:
        for record in self.constraints:
            if record.id == constraint_id:
                return record
        raise ConstraintError(f"Unknown constraint '{constraint_id}'")

    def densities(self) -> list[DiffPoly]:
        return [record.density for record in self.constraints]

    def primary(self) -> list[ConstraintRecord]:
        return [record for record in self.constraints if record.is_primary]

    def secondary(self) -> list[ConstraintRecord]:
        return [record for record in self.constraints if not record.is_primary]

    @property
    def total_hamiltonian(self) -> LocalFunctional:
        """``H_L + sum lam_i * c_i`` with the multipliers left symbolic."""
        return total_hamiltonian(self.canonical_hamiltonian, self.constraints)

    def solved_hamiltonian(self) -> LocalFunctional:
        """Total Hamiltonian with the solved multipliers substituted."""
        density = substitute(self.total_hamiltonian.density, self.multipliers)
        return LocalFunctional(density, self.total_hamiltonian.fields)

    def to_dict(self) -> dict[str, Any]:
        return {
            "constraints": [record.model_dump(mode="json") for record in self.constraints],
            "multipliers": {name: str(value) for name, value in self.multipliers.items()},
            "momenta": {name: str(value) for name, value in self.momenta.items()},
            "H_L": str(self.canonical_hamiltonian.density),
            "H_total": str(self.solved_hamiltonian().density),
            "H_total_symbolic": str(self.total_hamiltonian.density),
            "closed": self.closed,
            "undetermined_multipliers": self.undetermined,
            "unsatisfied": self.unsatisfied,
            "generations": self.generation,
            "steps": [step.model_dump(mode="json") for step in self.steps],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _multiplier_table(table: FieldTable, constraints: Sequence[ConstraintRecord]) -> FieldTable:
    extra: list[FieldSpec] = []
    for record in constraints:
        if record.multiplier in table:
            if table[record.multiplier].parity is not record.parity:
                raise ParityError(
                    f"Multiplier '{record.multiplier}' does not match the parity of {record.id}"
                )
            continue
        extra.append(FieldSpec(record.multiplier, record.parity, FieldKind.MULTIPLIER))
    return table.extend(extra)


def total_hamiltonian(
    canonical: LocalFunctional, constraints: Sequence[ConstraintRecord]
) -> LocalFunctional:
    """``H_L + sum_i lam_i * c_i``; each multiplier carries its constraint's parity."""
    table = _multiplier_table(canonical.fields, constraints)
    density = canonical.density
    for record in constraints:
        if record.density.require_parity() is not record.parity:
            raise ParityError(f"Constraint {record.id} changed parity", str(record.density))
        multiplier = DiffPoly.jet(record.multiplier, 0, record.parity.is_odd)
        density = density + multiplier * record.density
    return LocalFunctional(density, table)


def primary_constraints(
    lagrangian: FirstOrderLagrangian, momentum_prefix: str = "Pi_"
) -> list[ConstraintRecord]:
    """One constraint ``Pi_f - dL L / d Tdot(f)`` per dynamical field of a degenerate Lagrangian."""
    if not hessian(lagrangian).is_degenerate:
        logger.info("Lagrangian is regular, no primary constraints")
        return []
    momenta, hamiltonian = legendre(lagrangian, momentum_prefix)
    return _primary_records(momenta, hamiltonian.fields)


def _primary_records(momenta: Mapping[str, DiffPoly], table: FieldTable) -> list[ConstraintRecord]:
    records: list[ConstraintRecord] = []
    for index, (name, momentum) in enumerate(momenta.items(), start=1):
        spec = table[name]
        conjugate = DiffPoly.jet(spec.conjugate or "", 0, spec.odd)
        records.append(
            ConstraintRecord(
                id=f"c{index}",
                density=conjugate - momentum,
                generation=0,
                parity=spec.parity,
                multiplier=f"lam{index}",
            )
        )
    return records


def _multiplier_names(value: DiffPoly, table: FieldTable) -> set[str]:
    return {
        name
        for name in value.fields()
        if name in table and table[name].kind is FieldKind.MULTIPLIER
    }


def strip_derivatives(expression: DiffPoly) -> tuple[DiffPoly, int]:
    """
    Remove an overall ``D^k`` from an expression and scale it monic.

    Integration constants are zero. Returns the stripped expression and ``k``.
    """
    current = expression
    order = 0
    while True:
        witness = antiderivative(current)
        if witness is None or witness.is_zero:
            break
        current = witness
        order += 1
    lead = current.leading().coeff
    if lead.is_Rational and lead != 1:
        current = current / lead
    return current, order


def consistency_step(report: DBAReport) -> DBAReport:
    """
    Run one generation of the algorithm.

    Either appends new secondary constraints or, when none appear, solves the
    multiplier equations and decides closure.
    """
    if report.finished:
        return report
    generation = report.generation
    hamiltonian = total_hamiltonian(report.canonical_hamiltonian, report.constraints)
    table = hamiltonian.fields
    brackets = BracketTable.from_fields(table)
    everything = report.densities()
    primaries = [record.density for record in report.primary()]

    records: list[ConstraintRecord] = []
    created: list[ConstraintRecord] = []
    equations: list[MultiplierEquation] = []
    steps = list(report.steps)
    secondary_count = len(report.secondary())

    for record in report.constraints:
        expression = bracket_density_functional(record.density, hamiltonian, brackets)
        weak = weak_reduce(expression, everything, table)
        unknowns = _multiplier_names(weak, table)
        logger.debug(
            "Consistency expression",
            generation=generation,
            constraint=record.id,
            expression=str(weak),
        )
        if weak.is_zero:
            records.append(
                record.model_copy(update={"status": ConstraintStatus.IDENTICALLY_CONSERVED})
            )
            steps.append(
                StepRecord(generation=generation, action="conserved", constraint=record.id)
            )
            continue
        if not unknowns:
            stripped, order = strip_derivatives(weak)
            secondary_count += 1
            new_id = f"ct{secondary_count}"
            parity = stripped.require_parity()
            created.append(
                ConstraintRecord(
                    id=new_id,
                    density=stripped,
                    generation=generation + 1,
                    parity=parity,
                    multiplier=f"lamt{secondary_count}",
                )
            )
            records.append(
                record.model_copy(
                    update={"status": ConstraintStatus.PRODUCED_SECONDARY, "link": new_id}
                )
            )
            steps.append(
                StepRecord(
                    generation=generation,
                    action="secondary",
                    constraint=record.id,
                    expression=str(weak),
                    note=(
                        f"{new_id} = {stripped}; stripped D^{order}, "
                        "integration constants set to zero"
                    ),
                )
            )
            continue
        _check_linear(weak, unknowns, record.id)
        reduced = weak_reduce(expression, primaries, table)
        equations.append(
            MultiplierEquation(
                constraint=record.id, expression=reduced, unknowns=tuple(sorted(unknowns))
            )
        )
        records.append(record)
        steps.append(
            StepRecord(
                generation=generation,
                action="multiplier_equation",
                constraint=record.id,
                expression=str(reduced),
            )
        )

    if created:
        logger.info(
            "Secondary constraints found",
            generation=generation,
            constraints=[str(c.density) for c in created],
        )
        return report.model_copy(
            update={
                "constraints": records + created,
                "steps": steps,
                "generation": generation + 1,
                "equations": [],
            }
        )

    solved, assignments = _solve_triangular(equations, table)
    records = [
        r.model_copy(
            update={"status": ConstraintStatus.MULTIPLIER_FIXED, "link": assignments[r.id]}
        )
        if r.id in assignments
        else r
        for r in records
    ]
    for name, value in solved.items():
        steps.append(
            StepRecord(generation=generation, action="multiplier", expression=f"{name} = {value}")
        )
    updated = report.model_copy(
        update={
            "constraints": records,
            "multipliers": solved,
            "equations": equations,
            "steps": steps,
            "finished": True,
        }
    )
    records = _classify(updated)
    undetermined = sorted({r.multiplier for r in records} - set(solved))
    residuals = _consistency_residuals(updated, solved)
    unsatisfied = [cid for cid, residual in residuals.items() if not residual.is_zero]
    closed = not undetermined and not unsatisfied
    note = "closed"
    if not closed:
        first_class = [r.id for r in records if r.constraint_class == "first"]
        logger.warning(
            "Constraint algorithm did not close",
            first_class=first_class,
            undetermined=undetermined,
            unsatisfied=unsatisfied,
        )
        note = _closure_note(first_class, undetermined, unsatisfied)
    steps.append(StepRecord(generation=generation, action="closure", note=note))
    return updated.model_copy(
        update={
            "constraints": records,
            "closed": closed,
            "steps": steps,
            "undetermined": undetermined,
            "unsatisfied": unsatisfied,
        }
    )


def _closure_note(
    first_class: Sequence[str], undetermined: Sequence[str], unsatisfied: Sequence[str]
) -> str:
    parts = []
    if undetermined:
        parts.append(f"undetermined multipliers: {', '.join(undetermined)}")
    if first_class:
        parts.append(f"first-class constraints: {', '.join(first_class)}")
    if unsatisfied:
        parts.append(f"consistency conditions not met: {', '.join(unsatisfied)}")
    return "; ".join(parts)


def _check_linear(expression: DiffPoly, unknowns: set[str], constraint_id: str) -> None:
    for atoms in expression.terms:
        count = sum(1 for a in atoms if isinstance(a, JetAtom) and a.field in unknowns)
        if count > 1:
            raise UnsupportedOperationError(
                f"Consistency condition of {constraint_id} is nonlinear in the multipliers",
                str(expression),
            )


def _split_in(expression: DiffPoly, name: str) -> tuple[DiffPoly, DiffPoly]:
    mentioning = DiffPoly(
        {
            atoms: coeff
            for atoms, coeff in expression.terms.items()
            if any(isinstance(a, JetAtom) and a.field == name for a in atoms)
        }
    )
    return mentioning, expression - mentioning


def _solve_one(expression: DiffPoly, name: str, odd: bool) -> DiffPoly:
    linear, rest = _split_in(expression, name)
    kernel = kernel_in(linear, name)
    single = kernel.single_term()
    if single is None or not single[0].is_constant:
        raise MultiplierSolveError(
            f"Cannot invert the operator acting on '{name}'; manual intervention required",
            kernel=kernel.render(),
        )
    coefficient, order = single
    value = -rest / coefficient.constant_term()
    for _ in range(order):
        value = dinv(value)
    parity = value.parity()
    if not value.is_zero and (parity is None or parity.is_odd != odd):
        raise ParityError(f"Solved multiplier '{name}' has the wrong parity", str(value))
    return value


def _solve_triangular(
    equations: Sequence[MultiplierEquation], table: FieldTable
) -> tuple[dict[str, DiffPoly], dict[str, str]]:
    solved: dict[str, DiffPoly] = {}
    assignments: dict[str, str] = {}
    pending = list(equations)
    while pending:
        progress = False
        for equation in list(pending):
            expression = substitute(equation.expression, solved)
            unknowns = sorted(_multiplier_names(expression, table) - set(solved))
            if not unknowns:
                pending.remove(equation)
                if not expression.is_zero:
                    logger.warning(
                        "Multiplier equation left with a residual",
                        constraint=equation.constraint,
                        residual=str(expression),
                    )
                continue
            if len(unknowns) > 1:
                continue
            name = unknowns[0]
            solved[name] = _solve_one(expression, name, table[name].odd)
            assignments[equation.constraint] = name
            pending.remove(equation)
            progress = True
            logger.debug("Multiplier fixed", multiplier=name, value=str(solved[name]))
        if not progress and pending:
            first = pending[0]
            name = sorted(set(first.unknowns) - set(solved))[0]
            linear, _ = _split_in(substitute(first.expression, solved), name)
            raise MultiplierSolveError(
                "Coupled multiplier equations; manual intervention required",
                kernel=str(linear),
            )
    return solved, assignments


def solve_multipliers(
    equations: Sequence[MultiplierEquation], table: Optional[FieldTable] = None
) -> dict[str, DiffPoly]:
    """
    Solve multiplier equations one unknown at a time.

    Each step needs an equation whose remaining operator is ``c * D^k`` with a
    constant ``c``; the solution is ``Dinv^k`` of the right-hand side over ``c``.
    """
    if table is None:
        names = sorted({name for eq in equations for name in eq.unknowns})
        odd = {
            atom.field: atom.odd
            for eq in equations
            for atom in eq.expression.jets()
            if atom.field in names
        }
        table = FieldTable(
            tuple(
                FieldSpec(name, Parity.of(odd.get(name, False)), FieldKind.MULTIPLIER)
                for name in names
            )
        )
    solved, _ = _solve_triangular(equations, table)
    return solved


def _consistency_residuals(
    report: DBAReport, multipliers: Mapping[str, DiffPoly]
) -> dict[str, DiffPoly]:
    hamiltonian = report.total_hamiltonian
    brackets = BracketTable.from_fields(hamiltonian.fields)
    everything = report.densities()
    residuals: dict[str, DiffPoly] = {}
    for record in report.constraints:
        expression = bracket_density_functional(record.density, hamiltonian, brackets)
        residuals[record.id] = weak_reduce(
            substitute(expression, multipliers), everything, hamiltonian.fields
        )
    return residuals


def verify_multipliers(report: DBAReport, candidates: Mapping[str, DiffPoly]) -> bool:
    """Every consistency condition holds weakly with the candidate multipliers."""
    missing = {record.multiplier for record in report.constraints} - set(candidates)
    if missing:
        raise ConstraintError(f"Candidate multipliers missing: {sorted(missing)}")
    residuals = _consistency_residuals(report, candidates)
    failing = [cid for cid, residual in residuals.items() if not residual.is_zero]
    if failing:
        logger.info("Candidate multipliers rejected", constraints=failing)
    return not failing


def _classify(report: DBAReport) -> list[ConstraintRecord]:
    table = report.canonical_hamiltonian.fields
    everything = report.densities()
    matrix = constraint_matrix(everything, table)
    records = []
    for record, row in zip(report.constraints, matrix):
        weakly_zero = all(
            weak_reduce(coeff, everything, table).is_zero
            for kernel in row
            for coeff in kernel.coeffs.values()
        )
        label = "first" if weakly_zero else "second"
        records.append(record.model_copy(update={"constraint_class": label}))
    return records


def classification_matrix(report: DBAReport) -> list[list[DeltaKernel]]:
    """Constraint brackets ``{c_i, c_j}`` in report order."""
    return constraint_matrix(report.densities(), report.canonical_hamiltonian.fields)


def run_dba(
    lagrangian: FirstOrderLagrangian,
    max_generations: int = DEFAULT_MAX_GENERATIONS,
    momentum_prefix: str = "Pi_",
) -> DBAReport:
    """
    Full constraint analysis of a first-order Lagrangian.

    Raises:
        IterationLimitError: no closure within ``max_generations``
        MultiplierSolveError: a multiplier equation cannot be inverted
    """
    if not hessian(lagrangian).is_degenerate:
        momenta, canonical = regular_legendre(lagrangian, momentum_prefix)
        logger.info("Regular Lagrangian, no constraints")
        return DBAReport(
            canonical_hamiltonian=canonical,
            momenta=momenta,
            closed=True,
            finished=True,
            steps=[StepRecord(generation=0, action="regular")],
        )

    momenta, canonical = legendre(lagrangian, momentum_prefix)
    primaries = _primary_records(momenta, canonical.fields)
    report = DBAReport(
        canonical_hamiltonian=canonical,
        momenta=momenta,
        constraints=primaries,
        steps=[
            StepRecord(
                generation=0,
                action="primary",
                constraint=record.id,
                expression=str(record.density),
            )
            for record in primaries
        ],
    )
    logger.info("Primary constraints", count=len(primaries))
    for _ in range(max_generations):
        report = consistency_step(report)
        if report.finished:
            logger.info(
                "Constraint algorithm finished",
                closed=report.closed,
                constraints=len(report.constraints),
                generations=report.generation,
            )
            return report
    raise IterationLimitError(
        f"Constraint chain not closed after {max_generations} generations",
        details=", ".join(str(d) for d in report.densities()),
    )
