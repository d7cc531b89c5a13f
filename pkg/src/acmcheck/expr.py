"""A small arithmetic expression language over chart coordinates.

Expressions are tokenized, parsed by recursive descent into an immutable tree
and evaluated either to a plain float or to a first-order dual number whose
partials are the exact analytic gradient with respect to the coordinates.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

so ``-x^2`` is ``-(x^2)`` and ``2^3^2`` is ``2^(3^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt")

_NUMBER = re.compile(r"[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?")
_NUMBER_RUN = re.compile(r"[0-9.]+([eE][+-]?[0-9.]*)?[A-Za-z0-9_.]*")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPERATORS = "+-*/^"


class ExprError(Exception):
    """Base class for expression errors."""


class LexError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class EvalError(ExprError):
    """Domain error during evaluation; ``node`` is the offending subtree."""

    def __init__(self, message: str, node: "Node"):
        super().__init__(f"{message} in {to_source(node)!r}")
        self.node = node


@dataclass(frozen=True)
class Token:
    kind: str  # number | identifier | operator | left-paren | right-paren | comma
    lexeme: str
    position: int


# --- tree ------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Call]

ZERO = Const(0.0)
ONE = Const(1.0)


# --- lexing ----------------------------------------------------------------


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(source)

    def offset(k: int) -> int:
        return len(source[:k].encode("utf-8"))

    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
        elif c == "#":
            while i < n and source[i] != "\n":
                i += 1
        elif c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            run = _NUMBER_RUN.match(source, i).group(0)
            m = _NUMBER.match(run)
            if m is None or m.end() != len(run):
                # a trailing identifier (``2x``) is left to the parser
                if m is not None and _IDENT.fullmatch(run[m.end():]) and run[m.end()] not in "eE":
                    run = run[: m.end()]
                else:
                    raise LexError(f"malformed number {run!r}", offset(i))
            tokens.append(Token("number", run, offset(i)))
            i += len(run)
        elif c.isalpha() or c == "_":
            m = _IDENT.match(source, i)
            tokens.append(Token("identifier", m.group(0), offset(i)))
            i = m.end()
        elif c in _OPERATORS:
            tokens.append(Token("operator", c, offset(i)))
            i += 1
        elif c == "(":
            tokens.append(Token("left-paren", c, offset(i)))
            i += 1
        elif c == ")":
            tokens.append(Token("right-paren", c, offset(i)))
            i += 1
        elif c == ",":
            tokens.append(Token("comma", c, offset(i)))
            i += 1
        else:
            raise LexError(f"illegal character {c!r}", offset(i))
    return tokens


# --- parsing ---------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: Sequence[Token], coordinates: Sequence[str], end: int):
        self.tokens = list(tokens)
        self.coords = {name: k for k, name in enumerate(coordinates)}
        self.pos = 0
        self.end = end

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def here(self) -> int:
        tok = self.peek()
        return tok.position if tok is not None else self.end

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def accept(self, kind: str, lexeme: str | None = None) -> Token | None:
        tok = self.peek()
        if tok is not None and tok.kind == kind and (lexeme is None or tok.lexeme == lexeme):
            return self.take()
        return None

    def expect_rparen(self, opened: Token) -> None:
        if self.accept("right-paren") is None:
            raise ParseError(f"unbalanced parenthesis opened at {opened.position}", self.here())

    def expr(self) -> Node:
        node = self.term()
        while (tok := self.peek()) is not None and tok.kind == "operator" and tok.lexeme in "+-":
            self.take()
            node = BinOp(tok.lexeme, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while (tok := self.peek()) is not None and tok.kind == "operator" and tok.lexeme in "*/":
            self.take()
            node = BinOp(tok.lexeme, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.accept("operator", "-"):
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.accept("operator", "^"):
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Node:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected operand, found end of input", self.end)
        if tok.kind == "number":
            self.take()
            return Const(float(tok.lexeme))
        if tok.kind == "left-paren":
            self.take()
            node = self.expr()
            self.expect_rparen(tok)
            return node
        if tok.kind == "identifier":
            self.take()
            if tok.lexeme in self.coords:
                return Var(self.coords[tok.lexeme], tok.lexeme)
            if tok.lexeme in FUNCTIONS:
                opened = self.accept("left-paren")
                if opened is None:
                    raise ParseError(f"function {tok.lexeme} needs a parenthesized argument", self.here())
                arg = self.expr()
                self.expect_rparen(opened)
                return Call(tok.lexeme, arg)
            raise ParseError(f"unknown identifier {tok.lexeme!r}", tok.position)
        raise ParseError(f"expected operand, found {tok.lexeme!r}", tok.position)


def parse(tokens: Sequence[Token], coordinates: Sequence[str], end: int | None = None) -> Node:
    """Parse a token sequence against an ordered list of coordinate names."""
    if len(set(coordinates)) != len(coordinates):
        raise ValueError(f"coordinate names are not distinct: {list(coordinates)}")
    clash = set(coordinates) & set(FUNCTIONS)
    if clash:
        raise ValueError(f"coordinate names shadow functions: {sorted(clash)}")
    if end is None:
        end = tokens[-1].position + len(tokens[-1].lexeme) if tokens else 0
    parser = _Parser(tokens, coordinates, end)
    node = parser.expr()
    tok = parser.peek()
    if tok is not None:
        if tok.kind == "right-paren":
            raise ParseError("unbalanced parenthesis", tok.position)
        raise ParseError(f"unexpected {tok.lexeme!r}", tok.position)
    return node


def parse_expression(source: str, coordinates: Sequence[str]) -> Node:
    return parse(tokenize(source), coordinates, end=len(source.encode("utf-8")))


# --- printing --------------------------------------------------------------

# binding levels: expr 0, term 1, factor 2, power 3, atom 4
_LEVEL = {"+": 0, "-": 0, "*": 1, "/": 1, "^": 3}


def _level(node: Node) -> int:
    if isinstance(node, BinOp):
        return _LEVEL[node.op]
    if isinstance(node, Neg):
        return 2
    return 4


def _show(node: Node, need: int) -> str:
    if isinstance(node, Const):
        v = float(node.value)
        text = str(int(v)) if v.is_integer() and abs(v) < 1e16 else repr(v)
        if not _NUMBER.fullmatch(text):
            raise ValueError(f"constant {node.value!r} has no literal form")
    elif isinstance(node, Var):
        text = node.name
    elif isinstance(node, Call):
        text = f"{node.func}({_show(node.arg, 0)})"
    elif isinstance(node, Neg):
        text = "-" + _show(node.operand, 2)
    elif node.op == "^":
        text = f"{_show(node.left, 4)}^{_show(node.right, 2)}"
    else:
        lvl = _LEVEL[node.op]
        sep = f" {node.op} " if lvl == 0 else node.op
        text = _show(node.left, lvl) + sep + _show(node.right, lvl + 1)
    if _level(node) < need:
        return f"({text})"
    return text


def to_source(node: Node) -> str:
    """Render with the fewest parentheses that re-parse to the same tree."""
    return _show(node, 0)


# --- evaluation ------------------------------------------------------------


def _pow(node: BinOp, a: float, b: float) -> float:
    if a == 0.0 and b < 0:
        raise EvalError("division by zero", node)
    if a < 0 and b != int(b):
        raise EvalError("negative base with fractional exponent", node)
    try:
        return math.pow(a, b)
    except OverflowError:
        raise EvalError("overflow", node) from None


def _call(node: Call, x: float) -> float:
    f = node.func
    if f == "ln" and x <= 0:
        raise EvalError("ln of non-positive value", node)
    if f == "sqrt" and x < 0:
        raise EvalError("sqrt of negative value", node)
    try:
        return getattr(math, "log" if f == "ln" else f)(x)
    except OverflowError:
        raise EvalError("overflow", node) from None


def evaluate(node: Node, point: Sequence[float]) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return float(point[node.index])
    if isinstance(node, Neg):
        return -evaluate(node.operand, point)
    if isinstance(node, Call):
        return _call(node, evaluate(node.arg, point))
    a = evaluate(node.left, point)
    b = evaluate(node.right, point)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if b == 0.0:
            raise EvalError("division by zero", node)
        return a / b
    return _pow(node, a, b)


@dataclass(frozen=True)
class DualValue:
    value: float
    partials: np.ndarray


def _d_call(node: Call, u: DualValue) -> DualValue:
    x = u.value
    fx = _call(node, x)
    f = node.func
    if f == "sin":
        d = math.cos(x)
    elif f == "cos":
        d = -math.sin(x)
    elif f == "tan":
        d = 1.0 + fx * fx
    elif f == "exp":
        d = fx
    elif f == "ln":
        d = 1.0 / x
    else:
        if fx == 0.0:
            raise EvalError("sqrt is not differentiable at 0", node)
        d = 0.5 / fx
    return DualValue(fx, d * u.partials)


def _dual(node: Node, point: Sequence[float], n: int) -> DualValue:
    if isinstance(node, Const):
        return DualValue(node.value, np.zeros(n))
    if isinstance(node, Var):
        e = np.zeros(n)
        e[node.index] = 1.0
        return DualValue(float(point[node.index]), e)
    if isinstance(node, Neg):
        u = _dual(node.operand, point, n)
        return DualValue(-u.value, -u.partials)
    if isinstance(node, Call):
        return _d_call(node, _dual(node.arg, point, n))
    u = _dual(node.left, point, n)
    v = _dual(node.right, point, n)
    if node.op == "+":
        return DualValue(u.value + v.value, u.partials + v.partials)
    if node.op == "-":
        return DualValue(u.value - v.value, u.partials - v.partials)
    if node.op == "*":
        return DualValue(u.value * v.value, v.value * u.partials + u.value * v.partials)
    if node.op == "/":
        if v.value == 0.0:
            raise EvalError("division by zero", node)
        q = u.value / v.value
        return DualValue(q, (u.partials - q * v.partials) / v.value)
    value = _pow(node, u.value, v.value)
    grad = np.zeros(n)
    if u.partials.any():
        if u.value == 0.0 and v.value < 1:
            raise EvalError("power is not differentiable at base 0", node)
        grad = grad + v.value * _pow(node, u.value, v.value - 1) * u.partials
    if v.partials.any():
        if u.value <= 0:
            raise EvalError("variable exponent needs a positive base", node)
        grad = grad + value * math.log(u.value) * v.partials
    return DualValue(value, grad)


def evaluate_dual(node: Node, point: Sequence[float]) -> DualValue:
    """Value and exact gradient of ``node`` at ``point``."""
    return _dual(node, point, len(point))


def variables(node: Node) -> set[int]:
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, Const):
        return set()
    if isinstance(node, (Neg, Call)):
        return variables(node.operand if isinstance(node, Neg) else node.arg)
    return variables(node.left) | variables(node.right)


def is_zero(node: Node) -> bool:
    return isinstance(node, Const) and node.value == 0.0


# smart constructors used when fields are combined; they drop exact zeros and
# ones so composite components stay small


def add(a: Node, b: Node) -> Node:
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    return BinOp("+", a, b)


def mul(a: Node, b: Node) -> Node:
    if is_zero(a) or is_zero(b):
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return BinOp("*", a, b)


def const(value: float) -> Node:
    """Constant node; negative values become a negation of a literal."""
    if value < 0:
        return Neg(Const(-float(value)))
    return Const(float(value))
