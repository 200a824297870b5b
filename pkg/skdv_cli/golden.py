"""
The golden suite behind ``verify-paper``.

Each entry re-derives one published result of the sKdV-2 analysis from the
Lagrangian and compares it with the expected closed form.
"""

from typing import Callable

from skdv_core.algebra.fields import FieldTable
from skdv_core.algebra.poly import DiffPoly
from skdv_core.algebra.variational import equivalent
from skdv_core.dsl.parser import parse_component
from skdv_core.models.checks import (
    CheckResult,
    HamiltonianSystem,
    check_fermion_free_limit,
    check_fixed_point,
    check_lagrangian_hamiltonian_equivalence,
    check_psi_equations,
    check_skdv_family_expansion,
    check_super_hamiltonian,
    derive_hamiltonian_system,
)
from skdv_core.models.registry import get_model
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

EXPECTED_MOMENTA = {"u": "-1/2*u_x", "psi": "-1/2*psi", "xi": "0"}

EXPECTED_CANONICAL_HAMILTONIAN = (
    "u_x^3 + 2*u*psi*psi_2x - 1/2*u_2x^2 + xi_2x*psi_2x - 1/2*xi_2x*xi_3x"
)

EXPECTED_CONSTRAINTS = {
    "c1": "Pi_u + 1/2*u_x",
    "c2": "Pi_psi + 1/2*psi",
    "c3": "Pi_xi",
    "ct1": "psi - xi_x",
}

# {c3, H} before the overall derivative is stripped
EXPECTED_SECONDARY_SOURCE = ("c3", "-Dx(psi - xi_x, 4)")

EXPECTED_MULTIPLIERS = {
    "lam1": "2*psi*psi_x - 3*u_x^2 - u_3x",
    "lam2": "-4*u_x*psi_x - 2*psi*u_2x - psi_3x",
    "lam3": "-2*Dinv(u_x*psi_x) - 2*psi*u_x - psi_2x",
    "lamt1": "psi_3x - xi_4x",
}


def _table(system: HamiltonianSystem) -> FieldTable:
    return system.report.total_hamiltonian.fields


def _expected(text: str, table: FieldTable) -> DiffPoly:
    return parse_component(text, table)


def _compare_map(
    name: str, actual: dict[str, DiffPoly], expected: dict[str, str], table: FieldTable
) -> CheckResult:
    details: list[str] = []
    for key, text in expected.items():
        target = _expected(text, table)
        value = actual.get(key)
        if value != target:
            details.append(f"{key}: expected {target}, got {value}")
    extra = sorted(set(actual) - set(expected))
    if extra:
        details.append(f"unexpected entries {extra}")
    return CheckResult(
        name=name,
        passed=not details,
        expected="; ".join(f"{k} = {v}" for k, v in expected.items()),
        actual="; ".join(f"{k} = {v}" for k, v in actual.items()),
        details=details,
    )


def check_momenta(system: HamiltonianSystem) -> CheckResult:
    return _compare_map(
        "canonical momenta", system.report.momenta, EXPECTED_MOMENTA, _table(system)
    )


def check_canonical_hamiltonian(system: HamiltonianSystem) -> CheckResult:
    actual = system.report.canonical_hamiltonian.density
    expected = _expected(EXPECTED_CANONICAL_HAMILTONIAN, _table(system))
    passed = equivalent(actual, expected)
    return CheckResult(
        name="canonical Hamiltonian H_L (up to a total derivative)",
        passed=passed,
        expected=str(expected),
        actual=str(actual),
        details=[] if passed else ["difference is not a total derivative"],
    )


def check_constraint_chain(system: HamiltonianSystem) -> CheckResult:
    report = system.report
    table = _table(system)
    actual = {record.id: record.density for record in report.constraints}
    result = _compare_map("constraint chain", actual, EXPECTED_CONSTRAINTS, table)
    source_id, source_text = EXPECTED_SECONDARY_SOURCE
    sources = [step for step in report.steps if step.action == "secondary"]
    if len(sources) != 1 or sources[0].constraint != source_id:
        result.details.append(f"expected a single secondary constraint from {source_id}")
    else:
        expression = _expected(sources[0].expression, table)
        expected = _expected(source_text, table)
        if expression != expected:
            result.details.append(f"{{{source_id}, H}}: expected {expected}, got {expression}")
    if not report.closed:
        result.details.append("constraint algorithm did not close")
    result.passed = not result.details
    return result


def check_multipliers(system: HamiltonianSystem) -> CheckResult:
    return _compare_map(
        "Lagrange multipliers", system.report.multipliers, EXPECTED_MULTIPLIERS, _table(system)
    )


def check_hamilton_equations(system: HamiltonianSystem) -> CheckResult:
    """Registered equations, both psi_t forms and the x-differentiated sKdV-2 system."""
    parts = [
        check_lagrangian_hamiltonian_equivalence(system.model, report=system.report),
        check_fixed_point(system),
        check_psi_equations(system),
    ]
    return CheckResult(
        name="Hamilton equations reproduce sKdV-2",
        passed=all(parts),
        expected=parts[0].expected,
        actual=parts[0].actual,
        details=[detail for part in parts for detail in part.details],
    )


GoldenCheck = Callable[[HamiltonianSystem], CheckResult]

GOLDEN_CHECKS: list[GoldenCheck] = [
    check_momenta,
    check_canonical_hamiltonian,
    check_constraint_chain,
    check_multipliers,
    check_hamilton_equations,
    check_super_hamiltonian,
    lambda system: check_skdv_family_expansion(None),
    lambda system: check_fermion_free_limit(),
]


def run_golden_suite() -> list[CheckResult]:
    """Derive the sKdV-2 system once and run every golden check against it."""
    system = derive_hamiltonian_system(get_model("skdv2_lagrangian"))
    results = []
    for check in GOLDEN_CHECKS:
        result = check(system)
        logger.debug("Golden check", name=result.name, passed=result.passed)
        results.append(result)
    return results


def format_results(results: list[CheckResult]) -> str:
    lines: list[str] = []
    for result in results:
        lines.append(f"{'PASS' if result.passed else 'FAIL'}  {result.name}")
        if not result.passed:
            lines.append(f"      expected: {result.expected}")
            lines.append(f"      actual:   {result.actual}")
            lines.extend(f"      - {detail}" for detail in result.details)
    passed = sum(1 for r in results if r.passed)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
