"""
Recursive-descent parser for the expression language.

Grammar (whitespace-insensitive)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary (("^" | "**") unary)?
    primary := NUMBER | NAME | NAME "(" args ")" | "(" expr ")"

Names are fields with an optional derivative suffix (``u``, ``u_x``,
``u_3x``, ``Pi_u_x``), parameters, ``theta``, ``Phi`` or one of the forms
``Dx(e)``, ``Dx(e, k)``, ``Dinv(e)``, ``D(e)``, ``Dk(e, k)`` and ``Tdot(e)``.
"""

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Union

import sympy

from skdv_core.algebra.fields import FieldTable
from skdv_core.algebra.integrate import dinv
from skdv_core.algebra.poly import DiffPoly, JetAtom, Scalar
from skdv_core.exceptions import (
    DSLSyntaxError,
    ParityError,
    UnknownFieldError,
    UnsupportedOperationError,
)
from skdv_core.superspace import SuperAtom, SuperExpr, super_d, superfield

Value = Union[DiffPoly, SuperExpr]

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^(),]))"
)
_SUFFIX = re.compile(r"^(.*?)(?:_(\d*)x)?$")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if match is None or match.end() == pos:
            bad = _skip_space(text, pos)
            line, column = _position(text, bad)
            raise DSLSyntaxError(f"Unexpected character {text[bad]!r}", line, column)
        kind = match.lastgroup or "op"
        start = match.start(kind)
        line, column = _position(text, start)
        tokens.append(Token(kind, match.group(kind), line, column))
        pos = match.end()
    line, column = _position(text, len(text))
    tokens.append(Token("end", "", line, column))
    return tokens


def _skip_space(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    last_newline = text.rfind("\n", 0, offset)
    return line, offset - last_newline


class Parser:
    """Parse one expression against a field table and parameter bindings."""

    def __init__(
        self,
        text: str,
        table: FieldTable,
        params: Optional[Mapping[str, Union[Scalar, str]]] = None,
    ):
        self.text = text
        self.table = table
        self.params = {name: _param_value(name, value) for name, value in (params or {}).items()}
        self.tokens = tokenize(text)
        self.index = 0
        self.functions: dict[str, Callable[[Token], Value]] = {
            "Dx": self._parse_dx,
            "Dinv": self._parse_dinv,
            "D": self._parse_super_d,
            "Dk": self._parse_super_dk,
            "Tdot": self._parse_tdot,
        }

    # Token helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def _accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.index += 1
            return True
        return False

    def _expect(self, text: str) -> Token:
        token = self.current
        if not self._accept(text):
            self._fail(f"Expected '{text}'", token)
        return token

    def _fail(self, message: str, token: Optional[Token] = None) -> None:
        token = token or self.current
        found = token.text or "end of input"
        raise DSLSyntaxError(f"{message}, found {found!r}", token.line, token.column)

    # Grammar

    def parse(self) -> Value:
        if self.current.kind == "end":
            self._fail("Empty expression")
        value = self._expr()
        if self.current.kind != "end":
            self._fail("Unexpected token")
        return value

    def _expr(self) -> Value:
        value = self._term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self._advance().text
            right = self._term()
            value = _combine(value, right, "+" if op == "+" else "-")
        return value

    def _term(self) -> Value:
        value = self._unary()
        while self.current.kind == "op" and self.current.text in ("*", "/"):
            op_token = self._advance()
            right = self._unary()
            if op_token.text == "*":
                value = _combine(value, right, "*")
            else:
                divisor = self._scalar(right, op_token)
                if divisor == 0:
                    self._fail("Division by zero", op_token)
                value = value * (1 / divisor)
        return value

    def _unary(self) -> Value:
        if self._accept("-"):
            return -self._unary()
        if self._accept("+"):
            return self._unary()
        return self._power()

    def _power(self) -> Value:
        base = self._primary()
        if self.current.kind == "op" and self.current.text in ("^", "**"):
            op_token = self._advance()
            exponent = self._unary()
            power = self._scalar(exponent, op_token)
            if not power.is_Integer or power < 0:
                self._fail("Exponent must be a nonnegative integer", op_token)
            return base ** int(power)
        return base

    def _primary(self) -> Value:
        token = self.current
        if token.kind == "number":
            self._advance()
            return DiffPoly.constant(int(token.text))
        if self._accept("("):
            value = self._expr()
            self._expect(")")
            return value
        if token.kind == "name":
            self._advance()
            if token.text in self.functions:
                self._expect("(")
                value = self.functions[token.text](token)
                self._expect(")")
                return value
            return self._name(token)
        self._fail("Expected a number, name or '('", token)
        raise AssertionError("unreachable")

    def _name(self, token: Token) -> Value:
        name = token.text
        if name in self.params:
            return DiffPoly.constant(self.params[name])
        if name == "theta":
            return SuperExpr.theta()
        if name == "Phi":
            return superfield(0)
        if name in self.table:
            return DiffPoly.jet(name, 0, self.table[name].odd)
        match = _SUFFIX.match(name)
        base, digits = (match.group(1), match.group(2)) if match else (name, None)
        if digits is not None and base in self.table:
            order = int(digits) if digits else 1
            return DiffPoly.jet(base, order, self.table[base].odd)
        raise UnknownFieldError(
            f"Unknown identifier '{name}'", f"line {token.line}, column {token.column}"
        )

    # Function forms

    def _integer_argument(self) -> int:
        self._expect(",")
        token = self.current
        if token.kind != "number":
            self._fail("Expected an integer order", token)
        self._advance()
        return int(token.text)

    def _parse_dx(self, token: Token) -> Value:
        value = self._expr()
        times = self._integer_argument() if self.current.text == "," else 1
        return value.dx(times)

    def _parse_dinv(self, token: Token) -> Value:
        value = self._expr()
        if isinstance(value, SuperExpr):
            raise ParityError(
                "Dinv of a superspace expression", f"line {token.line}, column {token.column}"
            )
        return dinv(value)

    def _parse_super_d(self, token: Token) -> Value:
        return super_d(self._expr())

    def _parse_super_dk(self, token: Token) -> Value:
        value = self._expr()
        return super_d(value, self._integer_argument())

    def _parse_tdot(self, token: Token) -> Value:
        value = self._expr()
        body = value.body if isinstance(value, SuperExpr) and value.theta_part.is_zero else value
        if isinstance(body, DiffPoly) and len(body) == 1:
            ((atoms, coeff),) = body.terms.items()
            if len(atoms) == 1 and coeff == 1:
                atom = atoms[0]
                if isinstance(atom, JetAtom) and not atom.timed:
                    return DiffPoly.atom(JetAtom(atom.field, atom.order, atom.odd, True))
                if isinstance(atom, SuperAtom) and not atom.timed:
                    return superfield(atom.order, timed=True)
        raise UnsupportedOperationError(
            "Tdot applies to a single field or superfield atom",
            f"line {token.line}, column {token.column}",
        )

    def _scalar(self, value: Value, token: Token) -> sympy.Expr:
        if isinstance(value, DiffPoly) and value.is_constant:
            return value.constant_term()
        self._fail("Expected a constant", token)
        raise AssertionError("unreachable")


def _param_value(name: str, value: Union[Scalar, str]) -> sympy.Expr:
    if isinstance(value, str):
        return sympy.Symbol(name) if value == name else sympy.Rational(value)
    return sympy.sympify(value)


def _combine(left: Value, right: Value, op: str) -> Value:
    if isinstance(left, SuperExpr) or isinstance(right, SuperExpr):
        left, right = SuperExpr.lift(left), SuperExpr.lift(right)
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    return left * right


def parse(
    text: str,
    table: FieldTable,
    params: Optional[Mapping[str, Union[Scalar, str]]] = None,
) -> Value:
    """
    Parse an expression to a normalized ``DiffPoly`` or ``SuperExpr``.

    ``params`` binds names to constants; binding a name to itself (``{"a": "a"}``)
    keeps it as a sympy symbol.
    """
    return Parser(text, table, params).parse()


def parse_component(
    text: str,
    table: FieldTable,
    params: Optional[Mapping[str, Union[Scalar, str]]] = None,
) -> DiffPoly:
    """Parse an expression that must not involve theta or superfield atoms."""
    value = parse(text, table, params)
    if isinstance(value, SuperExpr):
        if not value.theta_part.is_zero or any(
            isinstance(a, SuperAtom) for a in value.body.atoms()
        ):
            raise ParityError("Superspace expression where a component density was expected", text)
        return value.body
    if any(isinstance(a, SuperAtom) for a in value.atoms()):
        raise ParityError("Superspace expression where a component density was expected", text)
    return value


def parse_super(
    text: str, table: FieldTable, params: Optional[Mapping[str, Union[Scalar, str]]] = None
) -> SuperExpr:
    return SuperExpr.lift(parse(text, table, params))
