"""
End-to-end checks between the Lagrangian, Hamiltonian and superspace pictures.

Every check returns a ``CheckResult`` so that callers (the golden suite, the
CLI) can print expected and actual forms side by side on a mismatch.
"""

from typing import Mapping, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field

from skdv_core.algebra.brackets import hamilton_flow, weak_reduce
from skdv_core.algebra.fields import FieldKind
from skdv_core.algebra.integrate import substitute
from skdv_core.algebra.poly import DiffPoly, Scalar
from skdv_core.algebra.variational import LocalFunctional, equivalent, flow_derivative
from skdv_core.constraints.dirac_bergmann import DBAReport, run_dba
from skdv_core.exceptions import ConstraintError, ModelError
from skdv_core.models.registry import (
    SKDV_PARAMETER,
    EvolutionEquation,
    ModelDef,
    get_model,
    parse_parameter,
    super_hamiltonian,
    xt_equations,
)
from skdv_core.superspace import (
    BOSON,
    FERMION,
    SUPERSPACE_ORIENTATION,
    berezin,
    check_super_component_match,
    reduce_fermions,
    to_components,
)
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)


class CheckResult(BaseModel):
    """Outcome of one comparison."""

    name: str
    passed: bool
    expected: str = ""
    actual: str = ""
    details: list[str] = Field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


class HamiltonianSystem(BaseModel):
    """A model run through the constraint algorithm, with its Hamilton equations."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    model: ModelDef
    report: DBAReport
    equations: list[EvolutionEquation]

    @property
    def flows(self) -> dict[str, DiffPoly]:
        return {equation.field: equation.rhs for equation in self.equations}


def hamilton_equations(
    hamiltonian: LocalFunctional, multipliers: Optional[Mapping[str, DiffPoly]] = None
) -> list[EvolutionEquation]:
    """
    ``phi_t = {phi, H}`` for every canonical variable of ``hamiltonian``.

    Multipliers stay parameters while the brackets are taken and are replaced
    by their solved values afterwards.
    """
    flows = hamilton_flow(hamiltonian)
    rules = dict(multipliers or {})
    return [
        EvolutionEquation(field=name, rhs=substitute(flow, rules))
        for name, flow in flows.items()
    ]


def report_equations(report: DBAReport) -> list[EvolutionEquation]:
    """Hamilton equations of a finished, closed constraint analysis."""
    if not report.finished or not report.closed:
        raise ConstraintError("Hamilton equations need a closed constraint analysis")
    return hamilton_equations(report.total_hamiltonian, report.multipliers)


_SYSTEMS: dict[tuple[str, tuple[tuple[str, str], ...]], HamiltonianSystem] = {}


def derive_hamiltonian_system(model: ModelDef) -> HamiltonianSystem:
    """Lagrangian -> constraint algorithm -> Hamilton equations, cached per model."""
    if model.lagrangian is None:
        raise ModelError(f"Model '{model.name}' has no Lagrangian")
    key = (model.name, tuple(sorted((k, str(v)) for k, v in model.params.items())))
    if key not in _SYSTEMS:
        logger.info("Deriving Hamiltonian system", model=model.name)
        report = run_dba(model.lagrangian)
        _SYSTEMS[key] = HamiltonianSystem(
            model=model, report=report, equations=report_equations(report)
        )
    return _SYSTEMS[key]


def psi_equations(system: HamiltonianSystem, field: str = "psi") -> tuple[DiffPoly, DiffPoly]:
    """
    The two evolution equations of an auxiliary field.

    One is its own Hamilton flow; the other comes from the flow of its momentum
    after the primary constraint ``Pi = p(field)`` is used to express the
    momentum rate through ``field_t``.
    """
    report = system.report
    table = report.total_hamiltonian.fields
    momentum = table[field].conjugate
    if momentum is None:
        raise ModelError(f"Field '{field}' has no conjugate momentum")
    flows = system.flows
    direct = flows[field]
    atom = DiffPoly.jet(field, 0, table[field].odd)
    relation = report.momenta[field]
    scale = relation.coefficient(atom.leading().atoms)
    if scale == 0 or relation != atom * scale:
        raise ModelError(f"Momentum of '{field}' is not proportional to the field")
    return direct, flows[momentum] / scale


def check_psi_equations(system: HamiltonianSystem, field: str = "psi") -> CheckResult:
    direct, via_momentum = psi_equations(system, field)
    report = system.report
    table = report.total_hamiltonian.fields
    residual = weak_reduce(via_momentum - direct, report.densities(), table)
    return CheckResult(
        name=f"{field}_t from both flows",
        passed=residual.is_zero,
        expected=str(direct),
        actual=str(via_momentum),
        details=[] if residual.is_zero else [f"weak residual {residual}"],
    )


def _weak(p: DiffPoly, report: DBAReport) -> DiffPoly:
    return weak_reduce(p, report.densities(), report.total_hamiltonian.fields)


def check_lagrangian_hamiltonian_equivalence(
    model: ModelDef,
    hamiltonian: Optional[LocalFunctional] = None,
    report: Optional[DBAReport] = None,
) -> CheckResult:
    """
    Hamilton equations of the constrained system reproduce the model's equations.

    Three conditions are checked on the constraint surface:

    - every constraint is preserved by the flow;
    - each registered equation ``phi_t = rhs`` equals the reduced flow of ``phi``;
    - the x-differentiated potential-form equations hold along the flow.

    ``hamiltonian`` replaces the total Hamiltonian of the analysis, which is
    how a tampered Hamiltonian can be checked against the same constraints.
    """
    if model.lagrangian is None:
        raise ModelError(f"Model '{model.name}' has no Lagrangian")
    report = report or derive_hamiltonian_system(model).report
    hamiltonian = hamiltonian or report.total_hamiltonian
    equations = hamilton_equations(hamiltonian, report.multipliers)
    flows = {equation.field: equation.rhs for equation in equations}
    details: list[str] = []

    for record in report.constraints:
        preserved = _weak(flow_derivative(record.density, flows), report)
        if not preserved.is_zero:
            details.append(f"{record.id} not preserved: {preserved}")

    for equation in model.equations:
        expected = _weak(equation.rhs, report)
        actual = _weak(flows.get(equation.field, DiffPoly()), report)
        if expected != actual:
            details.append(f"{equation.field}_t: expected {expected}, got {actual}")

    dynamical = {spec.name for spec in model.fields if spec.kind is FieldKind.DYNAMICAL}
    reduced_flows = {name: _weak(flows.get(name, DiffPoly()), report) for name in dynamical}
    for name, residual in xt_equations(model.params.get(SKDV_PARAMETER, 0)).items():
        if name not in dynamical:
            continue
        if FERMION not in dynamical:
            residual = reduce_fermions(residual)
        value = _weak(substitute(residual, reduced_flows, timed=True), report)
        if not value.is_zero:
            details.append(f"x-differentiated {name} equation leaves {value}")

    passed = not details
    if not passed:
        logger.info("Equivalence check failed", model=model.name, reasons=details)
    return CheckResult(
        name=f"{model.name}: Lagrangian and Hamiltonian equations agree",
        passed=passed,
        expected="; ".join(f"{e.field}_t = {e.rhs}" for e in model.equations),
        actual="; ".join(f"{e.field}_t = {e.rhs}" for e in equations if e.field in dynamical),
        details=details,
    )


def check_skdv_family_expansion(a: Union[Scalar, str, None] = None) -> CheckResult:
    """Components of the superspace equation are the x-differentiated sKdV-a equations."""
    value = parse_parameter(SKDV_PARAMETER, a)
    model = get_model("skdv_a_potential", {SKDV_PARAMETER: str(value)})
    assert model.superspace_equation is not None
    low, high = to_components(model.superspace_equation)
    expected = xt_equations(value)
    details: list[str] = []
    if low != expected[FERMION]:
        details.append(f"theta^0: expected {expected[FERMION]}, got {low}")
    if high != expected[BOSON]:
        details.append(f"theta^1: expected {expected[BOSON]}, got {high}")
    return CheckResult(
        name=f"superspace expansion at a={value}",
        passed=not details,
        expected=f"{expected[FERMION]} | {expected[BOSON]}",
        actual=f"{low} | {high}",
        details=details,
    )


def check_super_hamiltonian(system: HamiltonianSystem) -> CheckResult:
    """The superspace Hamiltonian matches the solved total Hamiltonian weakly."""
    report = system.report
    solved = report.solved_hamiltonian()
    match = check_super_component_match(
        super_hamiltonian(),
        solved.density,
        report.densities(),
        solved.fields,
        SUPERSPACE_ORIENTATION,
    )
    return CheckResult(
        name="superspace Hamiltonian",
        passed=match.matches,
        expected=str(match.super_density),
        actual=str(match.component_density),
        details=[match.reason] if match.reason else [],
    )


def check_fermion_free_limit(system: Optional[HamiltonianSystem] = None) -> CheckResult:
    """With the fermions removed the superspace Hamiltonian is the KdV potential one."""
    system = system or derive_hamiltonian_system(get_model("kdv_potential"))
    report = system.report
    bosonic = reduce_fermions(berezin(super_hamiltonian())) * SUPERSPACE_ORIENTATION
    kdv = _weak(report.solved_hamiltonian().density, report)
    passed = equivalent(bosonic, kdv)
    return CheckResult(
        name="fermion-free limit of the superspace Hamiltonian",
        passed=passed,
        expected=str(kdv),
        actual=str(bosonic),
        details=[] if passed else ["difference is not a total derivative"],
    )


def check_lagrangian_reduction(fermions: Sequence[str] = ("psi", "xi")) -> CheckResult:
    """Dropping the fermions from the sKdV-2 Lagrangian leaves the KdV potential Lagrangian."""
    skdv2 = get_model("skdv2_lagrangian").lagrangian
    kdv = get_model("kdv_potential").lagrangian
    assert skdv2 is not None and kdv is not None
    reduced = reduce_fermions(skdv2.density, fermions)
    return CheckResult(
        name="fermion-free limit of the Lagrangian",
        passed=reduced == kdv.density,
        expected=str(kdv.density),
        actual=str(reduced),
    )


def check_fixed_point(system: HamiltonianSystem) -> CheckResult:
    """Re-deriving from the registered model reproduces its equations exactly."""
    flows = system.flows
    details = [
        f"{e.field}_t: registered {e.rhs}, derived {flows.get(e.field)}"
        for e in system.model.equations
        if flows.get(e.field) != e.rhs
    ]
    return CheckResult(
        name=f"{system.model.name}: derived equations equal registered ones",
        passed=not details,
        details=details,
    )
