"""
Integration in x: exact antiderivatives, the formal inverse derivative and substitution.

Exactness of a local polynomial is decided with the homotopy operator.
For a degree-``d`` homogeneous part ``p_d`` the graded Euler identity gives

    p_d = D(G_d) + (1/d) * sum_v v * E_v(p_d)

so ``p_d`` is a total derivative iff every Euler derivative vanishes.
``dinv`` only uses the homotopy witness for exact arguments; a non-exact
argument is integrated by parts where that lowers derivative orders and the
rest is kept inside ``Dinv`` as written.
"""

from collections import defaultdict
from typing import Mapping

import sympy

from skdv_core.algebra.poly import (
    Atom,
    DiffPoly,
    JetAtom,
    NonlocalAtom,
    partial_left,
    product,
)
from skdv_core.exceptions import ParityError, UnsupportedOperationError
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

MAX_NONLOCAL_DEPTH = 2

Variable = tuple[str, bool, bool]  # (field, odd, timed)


def jet_variables(p: DiffPoly) -> dict[Variable, int]:
    """Map every jet variable of a local polynomial to the highest order present."""
    orders: dict[Variable, int] = defaultdict(int)
    for atom in p.atoms():
        if isinstance(atom, JetAtom):
            key = (atom.field, atom.odd, atom.timed)
            orders[key] = max(orders[key], atom.order)
        elif isinstance(atom, NonlocalAtom):
            continue
        else:
            raise UnsupportedOperationError(
                f"Integration by parts is only defined on component jets, got {atom.render()}"
            )
    return dict(orders)


def _variable_jet(var: Variable, order: int) -> JetAtom:
    field, odd, timed = var
    return JetAtom(field, order, odd, timed)


def euler_operator(p: DiffPoly, var: Variable, max_order: int) -> DiffPoly:
    """``sum_i (-D)^i dL p / d var_i`` with graded left derivatives."""
    result = DiffPoly()
    for i in range(max_order + 1):
        part = partial_left(p, _variable_jet(var, i))
        if part.is_zero:
            continue
        term = part.dx(i)
        result = result + (term if i % 2 == 0 else -term)
    return result


def _homotopy(p_d: DiffPoly, degree: int) -> tuple[DiffPoly, DiffPoly]:
    g = DiffPoly()
    r = DiffPoly()
    for var, top in sorted(jet_variables(p_d).items()):
        for i in range(1, top + 1):
            partial = partial_left(p_d, _variable_jet(var, i))
            if partial.is_zero:
                continue
            for j in range(i):
                shift = i - 1 - j
                piece = DiffPoly.atom(_variable_jet(var, j)) * partial.dx(shift)
                g = g + (piece if shift % 2 == 0 else -piece)
        r = r + DiffPoly.atom(_variable_jet(var, 0)) * euler_operator(p_d, var, top)
    scale = sympy.Rational(1, degree)
    return g * scale, r * scale


def split_exact(p: DiffPoly) -> tuple[DiffPoly, DiffPoly]:
    """
    Split ``p`` into ``D(G) + R``.

    ``R`` is the canonical remainder modulo total derivatives for the local
    terms; constant terms and terms carrying nonlocal atoms are not integrated
    and stay in ``R`` unchanged.
    """
    local_terms: dict = {}
    kept: dict = {}
    for atoms, coeff in p.terms.items():
        if not atoms or any(isinstance(a, NonlocalAtom) for a in atoms):
            kept[atoms] = coeff
        else:
            local_terms[atoms] = coeff
    local = DiffPoly(local_terms)
    g = DiffPoly()
    r = DiffPoly(kept)
    for degree in sorted(local.degrees()):
        g_d, r_d = _homotopy(local.homogeneous_part(degree), degree)
        g = g + g_d
        r = r + r_d
    return g, r


def antiderivative(p: DiffPoly) -> DiffPoly | None:
    """Local witness ``G`` with ``D(G) = p`` (zero integration constant), or None."""
    g, r = split_exact(p)
    return g if r.is_zero else None


def _reducible(atoms: tuple[Atom, ...]) -> int | None:
    """
    Index of a jet ``f_K`` that can be integrated by parts without raising orders.

    ``f_K`` must occur once and every other factor must be a jet of order at
    most ``K - 2``, so ``A f_K = D(A f_{K-1}) - D(A) f_{K-1}`` lowers the top order.
    """
    if not atoms or not all(isinstance(a, JetAtom) for a in atoms):
        return None
    top = max(range(len(atoms)), key=lambda i: atoms[i].order)
    atom = atoms[top]
    if atom.order == 0:
        return None
    others = atoms[:top] + atoms[top + 1:]
    if any(a.order > atom.order - 2 for a in others):
        return None
    return top


def reduce_by_parts(p: DiffPoly) -> tuple[DiffPoly, DiffPoly]:
    """
    Split ``p = D(G) + R`` by syntactic integration by parts.

    Terms whose top jet is linear and at least two orders above the rest are
    moved down; afterwards every term of ``R`` that is exact on its own is
    integrated. Terms already at minimal order stay exactly as written.
    """
    g = DiffPoly()
    r = p
    while True:
        found = None
        for atoms, coeff in r.terms.items():
            index = _reducible(atoms)
            if index is not None:
                found = (atoms, coeff, index)
                break
        if found is None:
            break
        atoms, coeff, index = found
        lowered = atoms[index].shifted(-1)
        piece = product(atoms[:index] + (lowered,) + atoms[index + 1:]) * coeff
        g = g + piece
        r = r - piece.dx()

    for atoms, coeff in list(r.terms.items()):
        term = DiffPoly({atoms: coeff})
        witness = antiderivative(term)
        if witness is not None:
            g = g + witness
            r = r - term
    return g, r


def _wrap_nonlocal(arg: DiffPoly) -> DiffPoly:
    """Wrap ``arg`` in a ``Dinv`` atom, pulling out its leading rational coefficient."""
    if arg.is_zero:
        return DiffPoly()
    arg.require_parity()
    lead = arg.leading().coeff
    scale = lead if lead.is_Rational else sympy.Integer(1)
    atom = NonlocalAtom(arg / scale)
    if atom.depth > MAX_NONLOCAL_DEPTH:
        logger.warning("Deep nonlocal nesting", depth=atom.depth, arg=str(arg))
    return DiffPoly.atom(atom, scale)


def dinv(p: DiffPoly) -> DiffPoly:
    """
    Formal inverse x-derivative with zero integration constants.

    An exact ``p`` gives its local antiderivative. Otherwise the parts that
    integrate syntactically are integrated and the rest is kept as written
    inside a ``Dinv`` atom, so ``dinv(u_x*psi_x)`` is ``Dinv(u_x*psi_x)``.
    """
    if p.parity() is None:
        raise ParityError(f"dinv needs a parity-homogeneous argument: {p}")
    witness = antiderivative(p)
    if witness is not None:
        return witness
    g, r = reduce_by_parts(p)
    if not g.is_zero:
        logger.debug("Partial integration before Dinv", remainder=str(r))
    return g + _wrap_nonlocal(r)


def substitute(p: DiffPoly, rules: Mapping[str, DiffPoly], timed: bool = False) -> DiffPoly:
    """
    Replace every untimed jet ``f_k`` with ``D^k(rules[f])``.

    Nonlocal arguments are substituted recursively and re-canonicalized.
    With ``timed=True`` the velocity jets ``Tdot(f_k)`` are replaced instead.
    """
    cache: dict[tuple[str, int], DiffPoly] = {}

    def replace(atom: Atom) -> DiffPoly | None:
        if isinstance(atom, JetAtom) and atom.timed == timed and atom.field in rules:
            key = (atom.field, atom.order)
            if key not in cache:
                rule = rules[atom.field]
                parity = rule.parity()
                if not rule.is_zero and (parity is None or parity.is_odd != atom.odd):
                    raise ParityError(
                        f"Substitution rule for '{atom.field}' changes parity", str(rule)
                    )
                cache[key] = rule.dx(atom.order)
            return cache[key]
        if isinstance(atom, NonlocalAtom):
            inner = substitute(atom.arg, rules, timed)
            if inner == atom.arg:
                return None
            return dinv(inner)
        return None

    result = DiffPoly()
    untouched: dict = {}
    for atoms, coeff in p.terms.items():
        replaced = [replace(a) for a in atoms]
        if all(r is None for r in replaced):
            untouched[atoms] = coeff
            continue
        term = DiffPoly.constant(coeff)
        for atom, rep in zip(atoms, replaced):
            term = term * (DiffPoly.atom(atom) if rep is None else rep)
            if term.is_zero:
                break
        result = result + term
    return result + DiffPoly(untouched)
