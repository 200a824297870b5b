"""Registry of the supported evolution systems."""

from functools import lru_cache
from typing import Any, Mapping, Optional, Union

import sympy
from pydantic import BaseModel, ConfigDict, Field, InstanceOf, field_serializer, model_validator

from skdv_core.algebra.fields import FieldTable, make_table
from skdv_core.algebra.poly import DiffPoly, JetAtom, Scalar
from skdv_core.algebra.variational import FirstOrderLagrangian
from skdv_core.dsl.parser import parse_component, parse_super
from skdv_core.exceptions import ModelError, ParityError
from skdv_core.superspace import SuperExpr
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

SKDV_PARAMETER = "a"

KDV_LAGRANGIAN = "-1/2*u_x*Tdot(u) - u_x^3 + 1/2*u_2x^2"

SKDV2_LAGRANGIAN = (
    "-1/2*u_x*Tdot(u) + 1/2*psi*Tdot(psi) - u_x^3 - 2*u*psi*psi_2x"
    " + 1/2*u_2x^2 - xi_2x*psi_2x + 1/2*xi_2x*xi_3x"
)

# (D^2 Phi)_t + a D^2(D^2 Phi D^3 Phi) + (6 - 2a) D^3 Phi D^4 Phi + D^8 Phi
SKDV_SUPER_EQUATION = (
    "Tdot(Dk(Phi,2)) + a*Dk(Dk(Phi,2)*Dk(Phi,3),2)"
    " + (6 - 2*a)*Dk(Phi,3)*Dk(Phi,4) + Dk(Phi,8)"
)

SUPER_HAMILTONIAN = "1/2*(-2*Dk(Phi,2)*Dk(Phi,3)^2 + Dk(Phi,4)*Dk(Phi,5))"

# x-differentiated potential-form equations, written as ``expression = 0``
SKDV_XT_EQUATIONS = {
    "xi": "Tdot(xi_x) + (6 - a)*u_x*xi_2x + a*xi_x*u_2x + xi_4x",
    "u": "Tdot(u_x) + 6*u_x*u_2x - a*xi_x*xi_3x + u_4x",
}

KDV_HAMILTONIAN = "-u^3 + 1/2*u_x^2"
SKDV2_HAMILTONIAN = "-u^3 + 1/2*u_x^2 + 2*u*xi*xi_x - 1/2*xi_x*xi_2x"

MODEL_NAMES = (
    "kdv",
    "kdv_potential",
    "skdv_a",
    "skdv_a_potential",
    "skdv2_lagrangian",
    "snlse_stub",
)


class EvolutionEquation(BaseModel):
    """``field_t = rhs``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    field: str
    rhs: DiffPoly

    @field_serializer("rhs")
    def _render_rhs(self, rhs: DiffPoly) -> str:
        return str(rhs)

    def residual(self, odd: bool = False) -> DiffPoly:
        """``Tdot(field) - rhs``, the equation moved to one side."""
        return DiffPoly.atom(JetAtom(self.field, 0, odd, True)) - self.rhs


class ModelDef(BaseModel):
    """A registered system with its fields, equations and optional Lagrangian."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    description: str = ""
    fields: InstanceOf[FieldTable]
    params: dict[str, Any] = Field(default_factory=dict)
    lagrangian: Optional[InstanceOf[FirstOrderLagrangian]] = None
    equations: list[EvolutionEquation] = Field(default_factory=list)
    superspace_equation: Optional[InstanceOf[SuperExpr]] = None
    conserved: dict[str, DiffPoly] = Field(default_factory=dict)
    potential_form: bool = False

    @model_validator(mode="after")
    def _check_parities(self) -> "ModelDef":
        for equation in self.equations:
            spec = self.fields[equation.field]
            parity = equation.rhs.parity()
            if not equation.rhs.is_zero and parity is not spec.parity:
                raise ParityError(
                    f"Equation for '{equation.field}' in model '{self.name}' has the wrong parity",
                    str(equation.rhs),
                )
        return self

    @field_serializer("params")
    def _render_params(self, params: dict[str, Any]) -> dict[str, str]:
        return {name: str(value) for name, value in params.items()}

    @property
    def flows(self) -> dict[str, DiffPoly]:
        return {equation.field: equation.rhs for equation in self.equations}

    def equation(self, name: str) -> DiffPoly:
        for equation in self.equations:
            if equation.field == name:
                return equation.rhs
        raise ModelError(f"Model '{self.name}' has no equation for '{name}'")

    def parameter(self, name: str) -> sympy.Expr:
        if name not in self.params:
            raise ModelError(f"Model '{self.name}' has no parameter '{name}'")
        return self.params[name]

    @property
    def has_fermions(self) -> bool:
        return any(spec.odd for spec in self.fields)


def parse_parameter(name: str, value: Union[Scalar, str, None]) -> sympy.Expr:
    """
    Convert a parameter value to an exact coefficient.

    ``None`` or the parameter's own name keeps it symbolic; strings such as
    ``"2"`` or ``"1/2"`` become rationals.
    """
    if value is None:
        return sympy.Symbol(name)
    if isinstance(value, str):
        text = value.strip()
        if text == name:
            return sympy.Symbol(name)
        try:
            return sympy.Rational(text)
        except (TypeError, ValueError) as exc:
            raise ModelError(f"Parameter {name}={value!r} is not an exact rational") from exc
    if isinstance(value, float):
        raise ModelError(f"Parameter {name}={value!r} must be exact, not floating point")
    return sympy.sympify(value)


def _component(text: str, table: FieldTable, params: Mapping[str, Any]) -> DiffPoly:
    return parse_component(text, table, dict(params))


def _kdv(params: Mapping[str, Any]) -> ModelDef:
    table = make_table(("u", False))
    return ModelDef(
        name="kdv",
        description="u_t + 6*u*u_x + u_3x = 0",
        fields=table,
        equations=[EvolutionEquation(field="u", rhs=_component("-6*u*u_x - u_3x", table, {}))],
        conserved={
            "mass": DiffPoly.jet("u"),
            "momentum": DiffPoly.jet("u") ** 2,
            "hamiltonian": _component(KDV_HAMILTONIAN, table, {}),
        },
    )


def _kdv_potential(params: Mapping[str, Any]) -> ModelDef:
    table = make_table(("u", False))
    return ModelDef(
        name="kdv_potential",
        description="u_xt + 6*u_x*u_2x + u_4x = 0 integrated once, u the velocity potential",
        fields=table,
        lagrangian=FirstOrderLagrangian(_component(KDV_LAGRANGIAN, table, {}), table),
        equations=[
            EvolutionEquation(field="u", rhs=_component("-3*u_x^2 - u_3x", table, {}))
        ],
        conserved={
            "momentum": _component("u_x^2", table, {}),
            "hamiltonian": _component("-u_x^3 + 1/2*u_2x^2", table, {}),
        },
        potential_form=True,
    )


def _skdv_a(params: Mapping[str, Any]) -> ModelDef:
    a = params[SKDV_PARAMETER]
    table = make_table(("u", False), ("xi", True))
    values = {SKDV_PARAMETER: a}
    conserved = {
        "mass": DiffPoly.jet("u"),
        "momentum": _component("u^2 - xi*xi_x", table, {}),
    }
    if a == 2:
        conserved["hamiltonian"] = _component(SKDV2_HAMILTONIAN, table, {})
    elif a == 0:
        conserved["hamiltonian"] = _component(KDV_HAMILTONIAN, table, {})
    return ModelDef(
        name="skdv_a",
        description="sKdV-a in physical component fields",
        fields=table,
        params=values,
        equations=[
            EvolutionEquation(
                field="u", rhs=_component("-6*u*u_x + a*xi*xi_2x - u_3x", table, values)
            ),
            EvolutionEquation(
                field="xi",
                rhs=_component("-(6 - a)*u*xi_x - a*xi*u_x - xi_3x", table, values),
            ),
        ],
        conserved=conserved,
    )


def _skdv_a_potential(params: Mapping[str, Any]) -> ModelDef:
    a = params[SKDV_PARAMETER]
    table = make_table(("u", False), ("xi", True))
    values = {SKDV_PARAMETER: a}
    xi_rhs = _component("-a*xi_x*u_x - xi_3x", table, values) - _component(
        "Dinv(u_x*xi_2x)", table, {}
    ) * (6 - 2 * a)
    return ModelDef(
        name="skdv_a_potential",
        description="sKdV-a in the velocity potential, integrated with zero constants",
        fields=table,
        params=values,
        equations=[
            EvolutionEquation(
                field="u", rhs=_component("-3*u_x^2 + a*xi_x*xi_2x - u_3x", table, values)
            ),
            EvolutionEquation(field="xi", rhs=xi_rhs),
        ],
        superspace_equation=parse_super(SKDV_SUPER_EQUATION, table, values),
        potential_form=True,
    )


def _skdv2_lagrangian(params: Mapping[str, Any]) -> ModelDef:
    a = params[SKDV_PARAMETER]
    if a != 2:
        raise ModelError(
            "A Lagrangian formulation is registered only for a=2",
            f"a={a}; use kdv_potential for the trivial case a=0",
        )
    table = make_table(("u", False), ("psi", True), ("xi", True))
    values = {SKDV_PARAMETER: a}
    return ModelDef(
        name="skdv2_lagrangian",
        description="sKdV-2 with the auxiliary fermion psi = xi_x",
        fields=table,
        params=values,
        lagrangian=FirstOrderLagrangian(_component(SKDV2_LAGRANGIAN, table, {}), table),
        equations=[
            EvolutionEquation(
                field="u", rhs=_component("2*psi*psi_x - 3*u_x^2 - u_3x", table, {})
            ),
            EvolutionEquation(
                field="psi",
                rhs=_component("-4*u_x*psi_x - 2*psi*u_2x - psi_3x", table, {}),
            ),
            EvolutionEquation(
                field="xi",
                rhs=_component("-2*Dinv(u_x*psi_x) - 2*psi*u_x - psi_2x", table, {}),
            ),
        ],
        superspace_equation=parse_super(SKDV_SUPER_EQUATION, make_table(), values),
        potential_form=True,
    )


def _snlse_stub(params: Mapping[str, Any]) -> ModelDef:
    k = params["k"]
    table = make_table(("q", False), ("qbar", False), ("phi", True), ("phibar", True))
    values = {"k": k, "I": sympy.I}
    return ModelDef(
        name="snlse_stub",
        description="Supersymmetric NLS system; equations only, no constraint analysis",
        fields=table,
        params={"k": k},
        equations=[
            EvolutionEquation(
                field="q",
                rhs=_component(
                    "I*(q_2x - 2*k*qbar*q^2 - 2*k*qbar*phi_x*phi + 2*k*q*phi*phibar_x)",
                    table,
                    values,
                ),
            ),
            EvolutionEquation(
                field="phi", rhs=_component("I*(phi_2x - 2*k*qbar*q*phi)", table, values)
            ),
        ],
    )


_BUILDERS = {
    "kdv": (_kdv, {}),
    "kdv_potential": (_kdv_potential, {}),
    "skdv_a": (_skdv_a, {SKDV_PARAMETER: None}),
    "skdv_a_potential": (_skdv_a_potential, {SKDV_PARAMETER: None}),
    "skdv2_lagrangian": (_skdv2_lagrangian, {SKDV_PARAMETER: "2"}),
    "snlse_stub": (_snlse_stub, {"k": None}),
}


def get_model(name: str, params: Optional[Mapping[str, Union[Scalar, str]]] = None) -> ModelDef:
    """
    Build a registered model.

    Args:
        name: one of ``MODEL_NAMES``
        params: parameter values; missing ones take the model default
            (symbolic ``a`` for the sKdV-a family, ``a=2`` for the Lagrangian model)

    Raises:
        ModelError: unknown model or parameter, or no Lagrangian for the given ``a``
    """
    if name not in _BUILDERS:
        raise ModelError(f"Unknown model '{name}'", f"known: {', '.join(MODEL_NAMES)}")
    _, defaults = _BUILDERS[name]
    given = dict(params or {})
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ModelError(f"Model '{name}' does not take parameters {unknown}")
    resolved = tuple(
        (key, str(parse_parameter(key, given.get(key, default))))
        for key, default in sorted(defaults.items())
    )
    return _build(name, resolved)


@lru_cache(maxsize=None)
def _build(name: str, resolved: tuple[tuple[str, str], ...]) -> ModelDef:
    builder, _ = _BUILDERS[name]
    values = {key: parse_parameter(key, value) for key, value in resolved}
    logger.debug("Building model", model=name, params=dict(resolved))
    return builder(values)


def xt_equations(a: Union[Scalar, str, None] = None) -> dict[str, DiffPoly]:
    """The x-differentiated potential-form equations of sKdV-a as ``expression = 0``."""
    value = parse_parameter(SKDV_PARAMETER, a)
    table = make_table(("u", False), ("xi", True))
    return {
        name: _component(text, table, {SKDV_PARAMETER: value})
        for name, text in SKDV_XT_EQUATIONS.items()
    }


def super_hamiltonian() -> SuperExpr:
    return parse_super(SUPER_HAMILTONIAN, make_table())
