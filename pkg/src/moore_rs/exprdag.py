"""Formula front end: parse elementary functions into a DAG and evaluate it.

A parsed formula is stored as a list of nodes in topological order (every
operand index is smaller than the node's own index).  Syntactically
identical subtrees are stored once.  Three evaluators are generated from
the node list as straight-line Python:

* ``eval_point``    -- one point, plain float arithmetic;
* ``eval_points``   -- many points at once, numpy;
* ``eval_interval`` -- the natural interval extension over a Box.

Grammar (precedence high to low)::

    atom    := NUMBER | x<k> | FUNC '(' expr ')' | '(' expr ')'
    power   := atom ('^' ['-'] INTEGER)*
    unary   := ('-' | '+') unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*

There is no algebraic simplification: ``x1 - x1`` over [1, 2] encloses
to [-1, 1], exactly as the formula is written.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import interval as iv
from .errors import EvalDomainError, ParseError, UnknownFunction, VariableOutOfRange
from .interval import Box, Interval

__all__ = ["ExprNode", "ExprDag", "parse", "eval_point", "eval_points", "eval_interval",
           "FUNCTIONS"]

FUNCTIONS = ("exp", "log", "sqrt", "abs", "sin", "cos", "tan",
             "sinh", "cosh", "tanh", "asin", "acos", "atan")


class ExprNode(NamedTuple):
    kind: str                      # 'const' | 'var' | 'binary' | 'power' | 'call'
    op: str | None = None          # binary operator or function name
    args: tuple[int, ...] = ()     # operand node indices
    value: float | None = None     # nearest float of a constant
    enclosure: Interval | None = None  # rigorous enclosure of a constant
    index: int | None = None       # 0-based variable index
    exponent: int | None = None


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),−·×])
""", re.VERBOSE)

_OP_ALIASES = {"−": "-", "·": "*", "×": "*"}


class _Token(NamedTuple):
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            text = m.group()
            if kind == "op":
                text = _OP_ALIASES.get(text, text)
            tokens.append(_Token(kind, text, pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(src)))
    return tokens


def _literal(text: str) -> tuple[float, Interval]:
    value = float(text)
    if not math.isfinite(value):
        raise ParseError(f"literal {text} overflows")
    exact = Fraction(text)
    if Fraction(value) == exact:
        return value, Interval(value, value)
    if Fraction(value) < exact:
        return value, Interval(value, math.nextafter(value, math.inf))
    return value, Interval(math.nextafter(value, -math.inf), value)


# ---------------------------------------------------------------------------
# parser

class _Builder:
    """Recursive-descent parser emitting hash-consed nodes."""

    def __init__(self, src: str, arity: int):
        self.src = src
        self.arity = arity
        self.tokens = _tokenize(src)
        self.i = 0
        self.nodes: list[ExprNode] = []
        self.memo: dict[tuple, int] = {}

    def emit(self, node: ExprNode) -> int:
        if node.kind == "const":
            key = ("const", node.enclosure.lo, node.enclosure.hi, node.value)
        else:
            key = (node.kind, node.op, node.args, node.index, node.exponent)
        k = self.memo.get(key)
        if k is None:
            k = len(self.nodes)
            self.nodes.append(node)
            self.memo[key] = k
        return k

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Token:
        t = self.take()
        if t.text != text:
            got = "end of input" if t.kind == "end" else repr(t.text)
            raise ParseError(f"expected {text!r}, got {got}", t.pos)
        return t

    def parse(self) -> int:
        if self.tok.kind == "end":
            raise ParseError("empty formula", 0)
        root = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return root

    def expr(self) -> int:
        left = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            left = self.emit(ExprNode("binary", op, (left, self.term())))
        return left

    def term(self) -> int:
        left = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            left = self.emit(ExprNode("binary", op, (left, self.unary())))
        return left

    def unary(self) -> int:
        if self.tok.text == "-":
            self.take()
            zero = self.emit(ExprNode("const", value=0.0, enclosure=Interval(0.0)))
            return self.emit(ExprNode("binary", "-", (zero, self.unary())))
        if self.tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def exponent(self) -> int:
        paren = self.tok.text == "("
        if paren:
            self.take()
        sign = 1
        if self.tok.text in ("-", "+"):
            sign = -1 if self.take().text == "-" else 1
        t = self.take()
        if t.kind != "num" or not t.text.isdigit():
            raise ParseError("exponent must be an integer literal", t.pos)
        if paren:
            self.expect(")")
        return sign * int(t.text)

    def power(self) -> int:
        base = self.atom()
        while self.tok.text == "^":
            self.take()
            base = self.emit(ExprNode("power", args=(base,), exponent=self.exponent()))
        return base

    def atom(self) -> int:
        t = self.take()
        if t.kind == "num":
            value, enc = _literal(t.text)
            return self.emit(ExprNode("const", value=value, enclosure=enc))
        if t.kind == "name":
            if self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise UnknownFunction(f"unknown function {t.text!r}", t.pos)
                self.take()
                child = self.expr()
                self.expect(")")
                return self.emit(ExprNode("call", t.text, (child,)))
            m = re.fullmatch(r"x(\d+)", t.text)
            if not m:
                raise ParseError(f"unknown identifier {t.text!r}", t.pos)
            k = int(m.group(1))
            if not 1 <= k <= self.arity:
                raise VariableOutOfRange(
                    f"variable {t.text} outside x1..x{self.arity}", t.pos)
            return self.emit(ExprNode("var", index=k - 1))
        if t.text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        got = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"unexpected {got}", t.pos)


# ---------------------------------------------------------------------------
# code generation

_POINT_FNS = {
    "exp": math.exp, "log": math.log, "sqrt": math.sqrt, "abs": abs,
    "sin": math.sin, "cos": math.cos, "tan": math.tan,
    "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
    "asin": math.asin, "acos": math.acos, "atan": math.atan,
}
_ARRAY_FNS = {
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "asin": np.arcsin, "acos": np.arccos, "atan": np.arctan,
}
_BINARY_IV = {"+": iv.add, "-": iv.sub, "*": iv.mul, "/": iv.div}


def _codegen(nodes: Sequence[ExprNode], root: int, mode: str):
    ns: dict = {}
    lines = ["def _f(x):"]
    for k, nd in enumerate(nodes):
        if nd.kind == "const":
            if mode == "interval":
                ns[f"c{k}"] = nd.enclosure
                rhs = f"c{k}"
            else:
                rhs = repr(nd.value)
        elif nd.kind == "var":
            rhs = f"x[:, {nd.index}]" if mode == "array" else f"x[{nd.index}]"
        elif nd.kind == "binary":
            a, b = nd.args
            if mode == "interval":
                ns[f"op{k}"] = _BINARY_IV[nd.op]
                rhs = f"op{k}(t{a}, t{b})"
            else:
                rhs = f"t{a} {nd.op} t{b}"
        elif nd.kind == "power":
            (a,), n = nd.args, nd.exponent
            if mode == "interval":
                ns["pow_int"] = iv.pow_int
                rhs = f"pow_int(t{a}, {n})"
            elif n == 2:
                rhs = f"t{a} * t{a}"
            elif mode == "array" and n < 0:
                rhs = f"1.0 / t{a} ** {-n}"
            else:
                rhs = f"t{a} ** {n}"
        elif nd.kind == "call":
            (a,) = nd.args
            table = {"interval": iv.STANDARD_FUNCTIONS, "point": _POINT_FNS,
                     "array": _ARRAY_FNS}[mode]
            ns[f"fn_{nd.op}"] = table[nd.op]
            rhs = f"fn_{nd.op}(t{a})"
        else:  # pragma: no cover
            raise AssertionError(nd.kind)
        lines.append(f"    t{k} = {rhs}")
    lines.append(f"    return t{root}")
    exec(compile("\n".join(lines), f"<exprdag:{mode}>", "exec"), ns)
    return ns["_f"]


# ---------------------------------------------------------------------------
# the DAG

class ExprDag:
    """Parsed elementary function of ``arity`` variables x1..xN."""

    def __init__(self, nodes: Sequence[ExprNode], root: int, arity: int, source: str = ""):
        self.nodes = tuple(nodes)
        self.root = root
        self.arity = arity
        self.source = source
        for k, nd in enumerate(self.nodes):
            if any(not 0 <= a < k for a in nd.args):
                raise ValueError(f"node {k} references a node that is not earlier")
        self._compiled: dict = {}

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"ExprDag({self.source!r}, arity={self.arity}, nodes={len(self.nodes)})"

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_compiled"] = {}
        return state

    def _fn(self, mode):
        f = self._compiled.get(mode)
        if f is None:
            f = self._compiled[mode] = _codegen(self.nodes, self.root, mode)
        return f

    def eval_point(self, x: Sequence[float]) -> float:
        if len(x) != self.arity:
            raise ValueError(f"expected {self.arity} coordinates, got {len(x)}")
        try:
            return float(self._fn("point")(x))
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise EvalDomainError(f"{self.source}: {exc}", tuple(x)) from None

    def eval_points(self, X) -> np.ndarray:
        """Vectorized point evaluation; X has shape (m, arity)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.arity:
            raise ValueError(f"expected an (m, {self.arity}) array, got shape {X.shape}")
        with np.errstate(divide="raise", invalid="raise", over="raise", under="ignore"):
            try:
                out = self._fn("array")(X)
            except FloatingPointError as exc:
                raise EvalDomainError(f"{self.source}: {exc}") from None
        return np.array(np.broadcast_to(out, (X.shape[0],)), dtype=float)

    def eval_interval(self, box: Box) -> Interval:
        dims = box.dims if isinstance(box, Box) else tuple(box)
        if len(dims) != self.arity:
            raise ValueError(f"expected a {self.arity}-dimensional box, got {len(dims)}")
        return self._fn("interval")(dims)


def parse(src: str, n: int) -> ExprDag:
    """Parse ``src`` as a function of the variables x1..xn."""
    if n < 1:
        raise ValueError("a formula needs at least one variable slot")
    b = _Builder(src, n)
    root = b.parse()
    return ExprDag(b.nodes, root, n, src)


def eval_point(f: ExprDag, x: Sequence[float]) -> float:
    return f.eval_point(x)


def eval_points(f: ExprDag, X) -> np.ndarray:
    return f.eval_points(X)


def eval_interval(f: ExprDag, X: Box) -> Interval:
    return f.eval_interval(X)
