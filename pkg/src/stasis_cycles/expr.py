"""Scalar expressions over x1..xn with exact symbolic partial derivatives.

Grammar (right-associative ``^``)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-"? power
    power  := atom ("^" factor)?
    atom   := number | variable | func "(" expr ")" | "(" expr ")"

Variables are ``x1``..``xn``; for n <= 3 the aliases ``x``, ``y``, ``z``
stand for ``x1``, ``x2``, ``x3``. Constants ``pi`` and ``e`` are recognised.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .errors import DomainError, ExprSyntaxError, UnknownFunctionError, VariableIndexError

__all__ = [
    "Num",
    "Var",
    "BinOp",
    "Neg",
    "Func",
    "Expression",
    "parse",
    "differentiate",
    "FUNCTIONS",
]

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "tanh")
_ALIASES = {"x": 1, "y": 2, "z": 3}
_CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Node"


Node = Union[Num, Var, BinOp, Neg, Func]


# -- runtime helpers used by compiled code ---------------------------------

def _div(a, b):
    if b == 0.0:
        raise DomainError("division by zero")
    return a / b


def _ln(a):
    if a <= 0.0:
        raise DomainError(f"ln of non-positive value {a!r}")
    return math.log(a)


def _sqrt(a):
    if a < 0.0:
        raise DomainError(f"sqrt of negative value {a!r}")
    return math.sqrt(a)


def _exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        raise DomainError(f"exp overflow at {a!r}") from None


def _ipow(a, k):
    if a == 0.0 and k < 0:
        raise DomainError("zero raised to a negative power")
    try:
        return a**k
    except OverflowError:
        raise DomainError("power overflow") from None


def _pow(a, b):
    if a <= 0.0:
        raise DomainError(f"non-integer power of non-positive base {a!r}")
    return _exp(b * math.log(a))


_RUNTIME = {
    "_div": _div,
    "_ln": _ln,
    "_sqrt": _sqrt,
    "_exp": _exp,
    "_ipow": _ipow,
    "_pow": _pow,
    "_sin": math.sin,
    "_cos": math.cos,
    "_tanh": math.tanh,
}


def _integer_exponent(node: Node) -> int | None:
    if isinstance(node, Num) and abs(node.value) < 2**31 and node.value == int(node.value):
        return int(node.value)
    return None


# -- constant folding -------------------------------------------------------

def _fold(node: Node) -> Node:
    """Replace an operator node over literals by its value, when finite."""
    try:
        if isinstance(node, BinOp) and isinstance(node.left, Num) and isinstance(node.right, Num):
            value = _eval_node(node, ())
        elif isinstance(node, (Neg, Func)) and isinstance(node.arg, Num):
            value = _eval_node(node, ())
        else:
            return node
    except DomainError:
        return node
    if not math.isfinite(value):
        return node
    return Num(float(value))


def _eval_node(node: Node, x: Sequence[float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(x[node.index - 1])
    if isinstance(node, Neg):
        return -_eval_node(node.arg, x)
    if isinstance(node, Func):
        return _RUNTIME["_" + node.name](_eval_node(node.arg, x))
    a = _eval_node(node.left, x)
    b = _eval_node(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return _div(a, b)
    k = _integer_exponent(node.right)
    return _ipow(a, k) if k is not None else _pow(a, b)


# -- printing and code generation ------------------------------------------

def _to_text(node: Node) -> str:
    if isinstance(node, Num):
        text = repr(node.value)
        return f"({text})" if node.value < 0 or text.startswith("-") else text
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return f"(-{_to_text(node.arg)})"
    if isinstance(node, Func):
        return f"{node.name}({_to_text(node.arg)})"
    return f"({_to_text(node.left)} {node.op} {_to_text(node.right)})"


def _to_code(node: Node) -> str:
    if isinstance(node, Num):
        return f"({node.value!r})"
    if isinstance(node, Var):
        return f"v[{node.index - 1}]"
    if isinstance(node, Neg):
        return f"(-{_to_code(node.arg)})"
    if isinstance(node, Func):
        return f"_{node.name}({_to_code(node.arg)})"
    a, b = _to_code(node.left), _to_code(node.right)
    if node.op in "+-*":
        return f"({a} {node.op} {b})"
    if node.op == "/":
        return f"_div({a}, {b})"
    k = _integer_exponent(node.right)
    return f"_ipow({a}, {k})" if k is not None else f"_pow({a}, {b})"


def compile_nodes(nodes: Sequence[Node]) -> Callable[[Sequence[float]], list]:
    """Compile a list of trees into one function returning a list of floats.

    The returned function raises :class:`DomainError` on any domain violation
    or non-finite result.
    """
    body = ", ".join(_to_code(n) for n in nodes)
    src = f"def _compiled(v):\n    return [{body}]\n"
    namespace = dict(_RUNTIME)
    exec(compile(src, "<expression>", "exec"), namespace)
    raw = namespace["_compiled"]

    def fn(x):
        v = [float(t) for t in x]
        try:
            out = raw(v)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise DomainError(str(exc)) from None
        for value in out:
            if not math.isfinite(value):
                raise DomainError(f"non-finite value at {v}")
        return out

    return fn


# -- the public Expression --------------------------------------------------

class Expression:
    """Immutable parsed expression in ``dim`` variables."""

    __slots__ = ("root", "dim", "source", "_fn")

    def __init__(self, root: Node, dim: int, source: str | None = None):
        _check_indices(root, dim)
        self.root = root
        self.dim = dim
        self.source = source if source is not None else _to_text(root)
        self._fn = None

    def __repr__(self):
        return f"Expression({self.source!r}, dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, Expression) and self.dim == other.dim and self.root == other.root

    def __hash__(self):
        return hash((self.root, self.dim))

    def to_text(self) -> str:
        return _to_text(self.root)

    def evaluate(self, x: Sequence[float]) -> float:
        if len(x) != self.dim:
            raise ValueError(f"expected a point of dimension {self.dim}, got {len(x)}")
        if self._fn is None:
            self._fn = compile_nodes([self.root])
        return self._fn(x)[0]

    __call__ = evaluate

    def derivative(self, i: int) -> "Expression":
        return differentiate(self, i)

    @property
    def is_constant(self) -> bool:
        return isinstance(self.root, Num)


def _check_indices(node: Node, dim: int) -> None:
    if isinstance(node, Var):
        if not 1 <= node.index <= dim:
            raise VariableIndexError(f"variable x{node.index} outside 1..{dim}")
    elif isinstance(node, (Neg, Func)):
        _check_indices(node.arg, dim)
    elif isinstance(node, BinOp):
        _check_indices(node.left, dim)
        _check_indices(node.right, dim)


# -- parser -------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {source[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, dim: int):
        self.source = source
        self.dim = dim
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.take()
        if value != text:
            found = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {value!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = _fold(BinOp(op, node, self.term()))
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = _fold(BinOp(op, node, self.factor()))
        return node

    def factor(self) -> Node:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return _fold(Neg(self.power()))
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return _fold(BinOp("^", base, self.factor()))
        return base

    def atom(self) -> Node:
        kind, value, pos = self.take()
        if kind == "num":
            number = float(value)
            if not math.isfinite(number):
                raise ExprSyntaxError(f"number {value!r} out of range", pos)
            return Num(number)
        if kind == "id":
            if self.peek()[1] == "(":
                if value not in FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {value!r}", pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return _fold(Func(value, arg))
            return self.name(value, pos)
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {found}", pos)

    def name(self, value: str, pos: int) -> Node:
        m = re.fullmatch(r"x(\d+)", value)
        if m:
            index = int(m.group(1))
        elif value in _ALIASES and self.dim <= 3:
            index = _ALIASES[value]
        elif value in _CONSTANTS:
            return Num(_CONSTANTS[value])
        else:
            raise ExprSyntaxError(f"unknown name {value!r}", pos)
        if not 1 <= index <= self.dim:
            raise VariableIndexError(f"variable {value!r} outside x1..x{self.dim}", pos)
        return Var(index)


def parse(source: str, dim: int) -> Expression:
    if dim < 1:
        raise ValueError("dimension must be positive")
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    return Expression(_Parser(source, dim).parse(), dim, source)


# -- differentiation ---------------------------------------------------------
# Builders below drop terms whose derivative is the literal 0 and multiplications
# by the literal 1; everything else is left as written, then constant-folded.

_ZERO = Num(0.0)
_ONE = Num(1.0)


def _add(a: Node, b: Node) -> Node:
    if a == _ZERO:
        return b
    if b == _ZERO:
        return a
    return _fold(BinOp("+", a, b))


def _sub(a: Node, b: Node) -> Node:
    if b == _ZERO:
        return a
    if a == _ZERO:
        return _fold(Neg(b))
    return _fold(BinOp("-", a, b))


def _mul(a: Node, b: Node) -> Node:
    if a == _ZERO or b == _ZERO:
        return _ZERO
    if a == _ONE:
        return b
    if b == _ONE:
        return a
    return _fold(BinOp("*", a, b))


def _div_node(a: Node, b: Node) -> Node:
    if a == _ZERO:
        return _ZERO
    return _fold(BinOp("/", a, b))


def _d(node: Node, i: int) -> Node:
    if isinstance(node, Num):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.index == i else _ZERO
    if isinstance(node, Neg):
        du = _d(node.arg, i)
        return _ZERO if du == _ZERO else _fold(Neg(du))
    if isinstance(node, Func):
        u = node.arg
        du = _d(u, i)
        if du == _ZERO:
            return _ZERO
        if node.name == "sin":
            outer = Func("cos", u)
        elif node.name == "cos":
            outer = _fold(Neg(Func("sin", u)))
        elif node.name == "exp":
            outer = node
        elif node.name == "ln":
            return _div_node(du, u)
        elif node.name == "sqrt":
            return _div_node(du, _mul(Num(2.0), node))
        else:  # tanh
            outer = _sub(_ONE, BinOp("^", node, Num(2.0)))
        return _mul(outer, du)
    a, b = node.left, node.right
    da, db = _d(a, i), _d(b, i)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if node.op == "/":
        # (a/b)' = a'/b - a*b'/b^2
        return _sub(_div_node(da, b), _div_node(_mul(a, db), BinOp("^", b, Num(2.0))))
    k = _integer_exponent(b)
    if k is not None:
        if k == 0:
            return _ZERO
        lower = _ONE if k == 1 else BinOp("^", a, Num(float(k - 1)))
        return _mul(_mul(Num(float(k)), lower), da)
    # (a^b)' = a^b * (b' ln a + b a'/a)
    inner = _add(_mul(db, Func("ln", a)), _div_node(_mul(b, da), a))
    return _mul(node, inner)


def differentiate(e: Expression, i: int) -> Expression:
    """Return the partial derivative of ``e`` with respect to ``x_i``."""
    if not 1 <= i <= e.dim:
        raise VariableIndexError(f"derivative index {i} outside 1..{e.dim}")
    return Expression(_d(e.root, i), e.dim)
