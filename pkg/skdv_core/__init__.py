"""
skdv_core - graded differential-polynomial algebra for constrained Hamiltonian systems.

This package provides:
- Exact differential polynomials over bosonic and fermionic fields
- Variational calculus, Poisson brackets and the Dirac-Bergmann algorithm
- Superspace expressions and their component expansion
- A Grassmann-valued pseudospectral integrator for numerical checks
"""

from skdv_core.constraints.dirac_bergmann import DBAReport, run_dba
from skdv_core.dsl import parse, render
from skdv_core.models.registry import MODEL_NAMES, get_model
from skdv_core.utils.logging import get_logger, setup_logging

__version__ = "1.0.0"
__all__ = [
    "DBAReport",
    "run_dba",
    "parse",
    "render",
    "MODEL_NAMES",
    "get_model",
    "setup_logging",
    "get_logger",
]
