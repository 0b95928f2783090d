"""Recursive-descent parser for radial weight expressions Q(r).

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'r' | FUNC '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-r^2``
is ``-(r^2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

FUNCS = ("log", "exp", "sqrt")


class ExprSyntaxError(ValueError):
    def __init__(self, position: int, message: str):
        super().__init__(f"syntax error at offset {position}: {message}")
        self.position = position


class ExprDomainError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str):
    """Yield (kind, value, offset) triples, ending with ('end', '', len)."""
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            off = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(off, f"unexpected character {text[off]!r}")
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, off = self.tok
        if val != value:
            got = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(off, f"expected {value!r}, got {got}")
        self.take()

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.tok
        if kind != "end":
            raise ExprSyntaxError(off, f"expected operator or end of input, got {val!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.take()
            return Neg(self.unary())
        if self.tok[0] == "op" and self.tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, off = self.tok
        if kind == "num":
            self.take()
            return Num(float(val))
        if kind == "name":
            self.take()
            if val == "r":
                return Var()
            if val in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise ExprSyntaxError(off, f"unknown name {val!r}; expected r or one of {FUNCS}")
        if val == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        got = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(off, f"expected number, 'r', function or '(', got {got}")


def parse_radial_expression(text: str) -> Node:
    return _Parser(text).parse()


def evaluate(node: Node, r):
    """Evaluate the tree at r (scalar or array); log/sqrt domain errors raise."""
    r = np.asarray(r, dtype=float)
    with np.errstate(over="ignore"):
        out = _eval(node, r)
    return float(out) if np.ndim(out) == 0 else out


def _eval(node: Node, r):
    if isinstance(node, Num):
        return np.full_like(r, node.value)
    if isinstance(node, Var):
        return r
    if isinstance(node, Neg):
        return -_eval(node.arg, r)
    if isinstance(node, BinOp):
        a, b = _eval(node.left, r), _eval(node.right, r)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if np.any(b == 0):
                raise ExprDomainError("division by zero")
            return a / b
        return np.power(a, b)
    arg = _eval(node.arg, r)
    if node.func == "log":
        if np.any(arg <= 0):
            raise ExprDomainError("log of a non-positive value")
        return np.log(arg)
    if node.func == "sqrt":
        if np.any(arg < 0):
            raise ExprDomainError("sqrt of a negative value")
        return np.sqrt(arg)
    return np.exp(arg)


def to_text(node: Node) -> str:
    """Fully parenthesized rendering that re-parses to the same tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return "r"
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.func}({to_text(node.arg)})"


def derivatives(node: Node, r, h: float = 1e-5) -> Tuple[np.ndarray, np.ndarray]:
    """First and second derivative by central differences (used for dd^c Q)."""
    r = np.asarray(r, dtype=float)
    f0, fp, fm = evaluate(node, r), evaluate(node, r + h), evaluate(node, r - h)
    return (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / (h * h)
