"""A small arithmetic expression language for user-supplied scalars.

Grammar (standard precedence, ^ binds tightest and is right-associative):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Identifiers must come from the declared context set ({q1..qn, p1..pn} on
phase space, {u, v} on the equilibrium space); the callable names ln, exp,
sqrt, sin and cos are reserved.  Parsing is strict: errors carry the byte
offset of the offending token.  to_string emits a fully parenthesized form
that reparses to an identical tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Union

FUNCTIONS = {
    "ln": math.log,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "sin": math.sin,
    "cos": math.cos,
}


class ExpressionError(ValueError):
    """Base class for parse-time expression errors."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ExpressionSyntaxError(ExpressionError):
    pass


class UnknownIdentifierError(ExpressionError):
    def __init__(self, name: str, offset: int, context: Iterable[str]):
        super().__init__(
            f"unknown identifier {name!r}; allowed variables: {sorted(context)}", offset
        )
        self.name = name


class ExpressionDomainError(ArithmeticError):
    """Evaluation left the real domain (e.g. ln of a non-positive value)."""

    def __init__(self, message: str, bindings: Dict[str, float]):
        shown = ", ".join(f"{k}={v:g}" for k, v in sorted(bindings.items()))
        super().__init__(f"{message} [at {shown}]")
        self.bindings = dict(bindings)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Union[Num, Var, Neg, BinOp, Call]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            offset = len(text) - len(stripped)
            raise ExpressionSyntaxError(f"unexpected character {text[offset]!r}", offset)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, context: FrozenSet[str]):
        self.text = text
        self.context = context
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, symbol: str):
        kind, value, offset = self.peek()
        if kind != "op" or value != symbol:
            raise ExpressionSyntaxError(f"expected {symbol!r}", offset)
        return self.advance()

    def parse(self) -> Expression:
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected trailing token {value!r}", offset)
        return node

    def expr(self) -> Expression:
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.term())
            else:
                return node

    def term(self) -> Expression:
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.unary())
            else:
                return node

    def unary(self) -> Expression:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            # right-associative; the recursion into unary admits 2^-3
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        kind, value, offset = self.advance()
        if kind == "num":
            return Num(float(value))
        if kind == "ident":
            nk, nv, _ = self.peek()
            if nk == "op" and nv == "(":
                if value not in FUNCTIONS:
                    raise UnknownIdentifierError(value, offset, FUNCTIONS)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(value, arg)
            if value not in self.context:
                raise UnknownIdentifierError(value, offset, self.context)
            return Var(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionSyntaxError(
            "expected a number, variable, function call or parenthesized expression", offset
        )


def parse_expression(text: str, context: Iterable[str]) -> Expression:
    """Parse text against a declared variable context."""
    return _Parser(text, frozenset(context)).parse()


def eval_expression(expr: Expression, bindings: Dict[str, float]) -> float:
    """Evaluate in IEEE doubles; real-domain violations raise with the bindings."""
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return float(bindings[expr.name])
        except KeyError:
            raise ExpressionDomainError(f"unbound variable {expr.name!r}", bindings) from None
    if isinstance(expr, Neg):
        return -eval_expression(expr.operand, bindings)
    if isinstance(expr, Call):
        arg = eval_expression(expr.arg, bindings)
        try:
            return FUNCTIONS[expr.func](arg)
        except (ValueError, OverflowError) as exc:
            raise ExpressionDomainError(f"{expr.func}({arg:g}): {exc}", bindings) from None
    if isinstance(expr, BinOp):
        left = eval_expression(expr.left, bindings)
        right = eval_expression(expr.right, bindings)
        try:
            if expr.op == "+":
                return left + right
            if expr.op == "-":
                return left - right
            if expr.op == "*":
                return left * right
            if expr.op == "/":
                return left / right
            if expr.op == "^":
                result = left**right
                if isinstance(result, complex):
                    raise ValueError("complex result")
                return float(result)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ExpressionDomainError(f"{expr.op} failed: {exc}", bindings) from None
    raise TypeError(f"not an expression node: {expr!r}")


def to_string(expr: Expression) -> str:
    """Fully parenthesized rendering; parse(to_string(e)) == e."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return f"(-{to_string(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({to_string(expr.left)}{expr.op}{to_string(expr.right)})"
    if isinstance(expr, Call):
        return f"{expr.func}({to_string(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


def fd_partial(expr: Expression, var: str, bindings: Dict[str, float], h_fd: float) -> float:
    """Central-difference partial derivative of an expression."""
    up = dict(bindings)
    dn = dict(bindings)
    up[var] = bindings[var] + h_fd
    dn[var] = bindings[var] - h_fd
    return (eval_expression(expr, up) - eval_expression(expr, dn)) / (2 * h_fd)
