"""Text rendering; the output of ``render`` parses back to an equal value."""

from typing import Union

from skdv_core.algebra.poly import DiffPoly, render_poly
from skdv_core.superspace import SuperExpr, to_components


def render(value: Union[DiffPoly, SuperExpr]) -> str:
    if isinstance(value, DiffPoly):
        return render_poly(value)
    return str(value)


def render_components(value: Union[DiffPoly, SuperExpr]) -> str:
    """``theta0: <low>, theta1: <high>`` for a superspace expression."""
    low, high = to_components(value)
    return f"theta0: {render(low)}, theta1: {render(high)}"
