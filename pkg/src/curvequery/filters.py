"""Boolean predicate expressions over dataset rows.

Grammar (keywords case-insensitive; AND binds tighter than OR)::

    or_expr    := and_expr ('OR' and_expr)*
    and_expr   := not_expr ('AND' not_expr)*
    not_expr   := 'NOT' not_expr | '(' or_expr ')' | comparison
    comparison := IDENT op literal
    op         := '=' | '!=' | '<' | '<=' | '>' | '>='
    literal    := NUMBER | quoted string | bare token

A bare token that parses as a number is a numeric literal; quote it to
compare against a categorical column. Attribute names are validated lazily,
against a concrete schema, not at parse time. Comparisons against a missing
cell are false; NOT/AND/OR combine those boolean results in the usual way.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import ParseError, ValidationError

ORDERING_OPS = ("<", "<=", ">", ">=")
ALL_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Comparison:
    attr: str
    op: str
    value: Union[float, str]  # float for numeric literals, str for strings


@dataclass(frozen=True)
class And:
    left: "FilterAst"
    right: "FilterAst"


@dataclass(frozen=True)
class Or:
    left: "FilterAst"
    right: "FilterAst"


@dataclass(frozen=True)
class Not:
    arg: "FilterAst"


FilterAst = Union[Comparison, And, Or, Not]

_TOKEN_RE = re.compile(
    r"""
    (?P<num>[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?![A-Za-z_0-9.]))
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<str>"[^"]*"|'[^']*')
  | (?P<op><=|>=|!=|[=<>()])
  | (?P<ws>\s+)
""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", col=pos + 1)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _keyword(self, word: str) -> bool:
        kind, value, _ = self.peek()
        return kind == "name" and value.upper() == word

    def or_expr(self) -> FilterAst:
        node = self.and_expr()
        while self._keyword("OR"):
            self.next()
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> FilterAst:
        node = self.not_expr()
        while self._keyword("AND"):
            self.next()
            node = And(node, self.not_expr())
        return node

    def not_expr(self) -> FilterAst:
        if self._keyword("NOT"):
            self.next()
            return Not(self.not_expr())
        kind, value, col = self.peek()
        if kind == "op" and value == "(":
            self.next()
            node = self.or_expr()
            k, v, c = self.next()
            if v != ")":
                raise ParseError("expected ')'", col=c)
            return node
        return self.comparison()

    def comparison(self) -> Comparison:
        kind, attr, col = self.next()
        if kind != "name":
            shown = attr if attr else "end of input"
            raise ParseError(f"expected attribute name, got {shown!r}", col=col)
        if attr.upper() in ("AND", "OR", "NOT"):
            raise ParseError(f"{attr!r} is a keyword, not an attribute", col=col)
        kind, op, col = self.next()
        if kind != "op" or op not in ALL_OPS:
            raise ParseError(f"expected comparison operator after {attr!r}", col=col)
        kind, raw, col = self.next()
        if kind == "num":
            return Comparison(attr, op, float(raw))
        if kind == "str":
            return Comparison(attr, op, raw[1:-1])
        if kind == "name":
            if raw.upper() in ("AND", "OR", "NOT"):
                raise ParseError(f"{raw!r} is a keyword, not a value", col=col)
            return Comparison(attr, op, raw)
        shown = raw if raw else "end of input"
        raise ParseError(f"expected literal value, got {shown!r}", col=col)


def parse_filter(text: str) -> FilterAst:
    """Parse a filter expression such as ``flux>10 AND CLASS_STAR=1``."""
    if not text or not text.strip():
        raise ParseError("empty filter")
    parser = _Parser(_tokenize(text))
    node = parser.or_expr()
    kind, value, col = parser.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {value!r} after expression", col=col)
    return node


def validate_filter(ast: FilterAst, schema) -> None:
    """Check attribute existence and kind compatibility against a schema.

    ``schema`` is a mapping of column name to kind ("quantitative" or
    "categorical"), or anything with a ``.kinds()`` mapping like Dataset.
    Raises ValidationError on the first offending comparison.
    """
    kinds = schema.kinds() if hasattr(schema, "kinds") else dict(schema)
    for cmp_node in _comparisons(ast):
        kind = kinds.get(cmp_node.attr)
        if kind is None:
            raise ValidationError(f"unknown attribute {cmp_node.attr!r} in filter")
        numeric_literal = isinstance(cmp_node.value, float)
        if cmp_node.op in ORDERING_OPS:
            if kind != "quantitative":
                raise ValidationError(
                    f"ordering comparison {cmp_node.op!r} needs a quantitative "
                    f"column, but {cmp_node.attr!r} is categorical"
                )
            if not numeric_literal:
                raise ValidationError(
                    f"ordering comparison on {cmp_node.attr!r} needs a numeric value"
                )
        elif kind == "quantitative" and not numeric_literal:
            raise ValidationError(
                f"comparing quantitative {cmp_node.attr!r} to a string; "
                "remove the quotes to compare numerically"
            )
        elif kind == "categorical" and numeric_literal:
            raise ValidationError(
                f"comparing categorical {cmp_node.attr!r} to a number; "
                "quote the value to compare as text"
            )


def _comparisons(ast: FilterAst):
    if isinstance(ast, Comparison):
        yield ast
    elif isinstance(ast, Not):
        yield from _comparisons(ast.arg)
    else:
        yield from _comparisons(ast.left)
        yield from _comparisons(ast.right)


def eval_filter(ast: FilterAst, row: dict, schema=None) -> bool:
    """Evaluate the predicate on one row (a dict of parsed cell values).

    Call validate_filter once beforehand; this function assumes kinds line
    up and treats any comparison against a missing value (None) as false.
    """
    if schema is not None:
        validate_filter(ast, schema)
    return _eval(ast, row)


def _eval(ast: FilterAst, row: dict) -> bool:
    if isinstance(ast, Comparison):
        cell = row.get(ast.attr)
        if cell is None:
            return False
        op, want = ast.op, ast.value
        if op == "=":
            return cell == want
        if op == "!=":
            return cell != want
        if op == "<":
            return cell < want
        if op == "<=":
            return cell <= want
        if op == ">":
            return cell > want
        return cell >= want
    if isinstance(ast, Not):
        return not _eval(ast.arg, row)
    if isinstance(ast, And):
        return _eval(ast.left, row) and _eval(ast.right, row)
    if isinstance(ast, Or):
        return _eval(ast.left, row) or _eval(ast.right, row)
    raise TypeError(f"not a filter node: {ast!r}")


_BARE_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")

_LVL_OR, _LVL_AND, _LVL_NOT = 1, 2, 3


def _flevel(ast: FilterAst) -> int:
    if isinstance(ast, Or):
        return _LVL_OR
    if isinstance(ast, And):
        return _LVL_AND
    if isinstance(ast, Not):
        return _LVL_NOT
    return 4


def to_text(ast: FilterAst, _ctx: int = _LVL_OR) -> str:
    """Render a filter AST back to parseable text with minimal parentheses."""
    if isinstance(ast, Comparison):
        if isinstance(ast.value, float):
            lit = repr(ast.value)
        elif _BARE_RE.match(ast.value) and ast.value.upper() not in ("AND", "OR", "NOT"):
            lit = ast.value
        else:
            lit = '"' + ast.value + '"'
        s = f"{ast.attr} {ast.op} {lit}"
    elif isinstance(ast, Not):
        s = "NOT " + to_text(ast.arg, _LVL_NOT)
    elif isinstance(ast, And):
        s = to_text(ast.left, _LVL_AND) + " AND " + to_text(ast.right, _LVL_AND + 1)
    elif isinstance(ast, Or):
        s = to_text(ast.left, _LVL_OR) + " OR " + to_text(ast.right, _LVL_OR + 1)
    else:
        raise TypeError(f"not a filter node: {ast!r}")
    if _flevel(ast) < _ctx:
        return f"({s})"
    return s
