"""Arithmetic expressions in one variable, for equation-defined pattern queries.

Grammar (whitespace-insensitive, optional leading ``y=`` stripped)::

    expression := term (('+' | '-') term)*
    term       := factor (('*' | '/') factor)*
    factor     := '-' factor | power
    power      := atom (('^' | '**') factor)?
    atom       := NUMBER | 'x' | 'pi' | 'e'
                | FUNC '(' expression ')' | '(' expression ')'
    FUNC       := 'sin' | 'cos' | 'exp' | 'log' | 'sqrt' | 'abs'

Power is right-associative and binds tighter than unary minus, so ``-x^2``
evaluates to ``-(x^2)``; an exponent may itself be negated (``2^-3``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import DomainError, ParseError

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    """The single variable ``x``."""


@dataclass(frozen=True)
class Const:
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Neg:
    arg: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "ExprAst"


ExprAst = Union[Num, Var, Const, Neg, BinOp, Call]

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[+\-*/^()])
  | (?P<ws>\s+)
""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Break text into (kind, value, col) triples; col is 1-based."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", col=pos + 1)
        if m.lastgroup != "ws":
            value = m.group()
            kind = "op" if m.lastgroup == "op" else m.lastgroup
            tokens.append((kind, value, pos + 1))
        pos = m.end()
    tokens.append(("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]]):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, col = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", col=col)
        return self.next()

    def expression(self) -> ExprAst:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.next()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ExprAst:
        node = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.next()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> ExprAst:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.next()
            arg = self.factor()
            # fold a negated bare literal so -3 round-trips as Num(-3)
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Neg(arg)
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value in ("^", "**"):
            self.next()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> ExprAst:
        kind, value, col = self.next()
        if kind == "num":
            return Num(float(value))
        if kind == "name":
            if value == "x":
                return Var()
            if value in CONSTANTS:
                return Const(value)
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.expression()
                self.expect_op(")")
                return Call(value, arg)
            raise ParseError(f"unknown identifier {value!r}", col=col)
        if kind == "op" and value == "(":
            node = self.expression()
            self.expect_op(")")
            return node
        shown = value if value else "end of input"
        raise ParseError(f"unexpected {shown!r}", col=col)


def parse_equation(text: str) -> ExprAst:
    """Parse an equation like ``y=x^2`` (the ``y=`` prefix is optional)."""
    if not text or not text.strip():
        raise ParseError("empty equation")
    stripped = re.sub(r"^\s*y\s*=", "", text, count=1)
    offset = len(text) - len(stripped)
    tokens = [(k, v, c + offset) for k, v, c in _tokenize(stripped)]
    parser = _Parser(tokens)
    node = parser.expression()
    kind, value, col = parser.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {value!r} after expression", col=col)
    return node


def eval_expr(ast: ExprAst, x: float) -> float:
    """Evaluate the expression at x; raises DomainError outside the domain."""
    if isinstance(ast, Num):
        return ast.value
    if isinstance(ast, Var):
        return x
    if isinstance(ast, Const):
        return CONSTANTS[ast.name]
    if isinstance(ast, Neg):
        return -eval_expr(ast.arg, x)
    if isinstance(ast, Call):
        v = eval_expr(ast.arg, x)
        try:
            return FUNCTIONS[ast.func](v)
        except (ValueError, OverflowError):
            raise DomainError(f"{ast.func}({v}) is undefined at x={x}") from None
    if isinstance(ast, BinOp):
        a = eval_expr(ast.left, x)
        b = eval_expr(ast.right, x)
        try:
            if ast.op == "+":
                return a + b
            if ast.op == "-":
                return a - b
            if ast.op == "*":
                return a * b
            if ast.op == "/":
                return a / b
            if ast.op == "^":
                return math.pow(a, b)
        except ZeroDivisionError:
            raise DomainError(f"division by zero at x={x}") from None
        except (ValueError, OverflowError):
            raise DomainError(f"{a}^{b} is undefined at x={x}") from None
    raise TypeError(f"not an expression node: {ast!r}")


# precedence levels used by the minimal-parenthesis printer
_LVL_ADD, _LVL_MUL, _LVL_NEG, _LVL_POW, _LVL_ATOM = 1, 2, 3, 4, 5


def _level(ast: ExprAst) -> int:
    if isinstance(ast, BinOp):
        if ast.op in "+-":
            return _LVL_ADD
        if ast.op in "*/":
            return _LVL_MUL
        return _LVL_POW
    if isinstance(ast, Neg):
        return _LVL_NEG
    if isinstance(ast, Num) and ast.value < 0:
        return _LVL_NEG  # prints with a leading minus
    return _LVL_ATOM


def to_text(ast: ExprAst, _ctx: int = _LVL_ADD) -> str:
    """Render an AST back to parseable text with minimal parentheses.

    ``parse_equation(to_text(ast))`` is structurally identical to ``ast``.
    """
    if isinstance(ast, Num):
        s = repr(ast.value)
    elif isinstance(ast, Var):
        s = "x"
    elif isinstance(ast, Const):
        s = ast.name
    elif isinstance(ast, Call):
        s = f"{ast.func}({to_text(ast.arg)})"
    elif isinstance(ast, Neg):
        s = "-" + to_text(ast.arg, _LVL_NEG)
    elif isinstance(ast, BinOp):
        lvl = _level(ast)
        if ast.op == "^":
            # right-associative; exponent admits a unary minus
            s = to_text(ast.left, _LVL_ATOM) + "^" + to_text(ast.right, _LVL_NEG)
        else:
            s = to_text(ast.left, lvl) + ast.op + to_text(ast.right, lvl + 1)
    else:
        raise TypeError(f"not an expression node: {ast!r}")
    if _level(ast) < _ctx:
        return f"({s})"
    return s
