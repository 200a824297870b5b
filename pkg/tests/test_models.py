"""Tests for the model registry and the cross-formulation checks."""

import pytest
import sympy

from skdv_core.algebra.variational import LocalFunctional
from skdv_core.constraints.dirac_bergmann import DBAReport
from skdv_core.dsl import parse_component
from skdv_core.exceptions import ConstraintError, ModelError
from skdv_core.models import MODEL_NAMES, get_model
from skdv_core.models.checks import (
    check_fermion_free_limit,
    check_fixed_point,
    check_lagrangian_hamiltonian_equivalence,
    check_lagrangian_reduction,
    check_psi_equations,
    check_skdv_family_expansion,
    check_super_hamiltonian,
    derive_hamiltonian_system,
    psi_equations,
    report_equations,
)
from skdv_core.models.registry import parse_parameter, xt_equations


@pytest.fixture(scope="module")
def system():
    return derive_hamiltonian_system(get_model("skdv2_lagrangian"))


class TestRegistry:
    """Test model lookup and parameters."""

    def test_all_models_build(self):
        for name in MODEL_NAMES:
            params = {"k": "1"} if name == "snlse_stub" else None
            assert get_model(name, params).name == name

    def test_unknown_model(self):
        with pytest.raises(ModelError):
            get_model("burgers")

    def test_unknown_parameter(self):
        with pytest.raises(ModelError):
            get_model("kdv", {"a": "2"})

    def test_lagrangian_only_at_a_two(self):
        with pytest.raises(ModelError):
            get_model("skdv2_lagrangian", {"a": "3"})

    def test_cached(self):
        assert get_model("skdv_a", {"a": "2"}) is get_model("skdv_a", {"a": 2})

    def test_parameter_parsing(self):
        assert parse_parameter("a", None) == sympy.Symbol("a")
        assert parse_parameter("a", "1/2") == sympy.Rational(1, 2)
        with pytest.raises(ModelError):
            parse_parameter("a", 0.5)
        with pytest.raises(ModelError):
            parse_parameter("a", "two")

    def test_symbolic_family(self):
        model = get_model("skdv_a")
        assert model.parameter("a") == sympy.Symbol("a")
        assert model.has_fermions
        assert "hamiltonian" not in model.conserved

    def test_equation_lookup(self):
        model = get_model("kdv")
        assert model.equation("u") == parse_component("-6*u*u_x - u_3x", model.fields)
        with pytest.raises(ModelError):
            model.equation("xi")

    def test_xt_equations_at_zero(self):
        equations = xt_equations(0)
        assert equations["u"] == parse_component(
            "Tdot(u_x) + 6*u_x*u_2x + u_4x", get_model("skdv_a_potential").fields
        )


class TestSkdv2System:
    """Test the Hamiltonian system derived from the sKdV-2 Lagrangian."""

    def test_equivalence(self, system):
        result = check_lagrangian_hamiltonian_equivalence(system.model, report=system.report)
        assert result.passed, result.details

    def test_fixed_point(self, system):
        assert check_fixed_point(system).passed

    def test_psi_flows_agree_weakly(self, system):
        direct, via_momentum = psi_equations(system)
        assert check_psi_equations(system).passed
        assert not direct.is_zero
        assert not via_momentum.is_zero

    def test_superspace_hamiltonian(self, system):
        assert check_super_hamiltonian(system).passed

    def test_tampered_hamiltonian_fails(self, system):
        report = system.report
        table = report.total_hamiltonian.fields
        dropped = parse_component("lam1*(Pi_u + 1/2*u_x)", table)
        tampered = LocalFunctional(report.total_hamiltonian.density - dropped, table)
        result = check_lagrangian_hamiltonian_equivalence(
            system.model, hamiltonian=tampered, report=report
        )
        assert not result.passed
        assert result.details

    def test_cached(self, system):
        assert derive_hamiltonian_system(get_model("skdv2_lagrangian")) is system

    def test_open_report_has_no_equations(self, system):
        report = DBAReport(canonical_hamiltonian=system.report.canonical_hamiltonian)
        with pytest.raises(ConstraintError):
            report_equations(report)


class TestLimits:
    """Test the bosonic limits and the superspace family."""

    def test_kdv_potential_equivalence(self):
        model = get_model("kdv_potential")
        assert check_lagrangian_hamiltonian_equivalence(model).passed

    def test_fermion_free_hamiltonian(self):
        assert check_fermion_free_limit().passed

    def test_fermion_free_lagrangian(self):
        assert check_lagrangian_reduction().passed

    @pytest.mark.parametrize("a", [None, "0", "2", "4", "1/2"])
    def test_family_expansion(self, a):
        result = check_skdv_family_expansion(a)
        assert result.passed, result.details

    def test_no_lagrangian(self):
        with pytest.raises(ModelError):
            derive_hamiltonian_system(get_model("kdv"))
