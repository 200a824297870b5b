"""Dirac-Bergmann constraint analysis."""

from skdv_core.constraints.dirac_bergmann import (
    ConstraintRecord,
    ConstraintStatus,
    DBAReport,
    run_dba,
    verify_multipliers,
)

__all__ = ["ConstraintRecord", "ConstraintStatus", "DBAReport", "run_dba", "verify_multipliers"]
