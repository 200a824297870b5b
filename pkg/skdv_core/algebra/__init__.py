"""Differential polynomials, variational calculus and Poisson brackets."""

from skdv_core.algebra.fields import FieldKind, FieldSpec, FieldTable, Parity, make_table
from skdv_core.algebra.integrate import dinv, substitute
from skdv_core.algebra.poly import DiffPoly, JetAtom, NonlocalAtom, partial_left, partial_right
from skdv_core.algebra.variational import (
    FirstOrderLagrangian,
    LocalFunctional,
    euler_lagrange,
    is_total_derivative,
    legendre,
    variational_derivative,
)

__all__ = [
    "FieldKind",
    "FieldSpec",
    "FieldTable",
    "Parity",
    "make_table",
    "dinv",
    "substitute",
    "DiffPoly",
    "JetAtom",
    "NonlocalAtom",
    "partial_left",
    "partial_right",
    "FirstOrderLagrangian",
    "LocalFunctional",
    "euler_lagrange",
    "is_total_derivative",
    "legendre",
    "variational_derivative",
]
