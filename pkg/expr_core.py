#!/usr/bin/env python3
"""
Expression Core for Lagrange-Ops
Immutable symbolic expression trees: parsing, printing, exact partial
differentiation, substitution, structural normalization and evaluation
"""

import math
import re
from dataclasses import dataclass
from functools import singledispatch
from typing import Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from errors import DomainError, MissingVariable, ParseError, UnknownFunction

Number = Union[int, float]

IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")


class Expr:
    """Base class of every expression node.

    Nodes are frozen dataclasses, so equality and hashing are structural.
    The arithmetic operators build new trees; plain numbers are coerced to
    Const.
    """

    __slots__ = ()

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __pow__(self, other):
        return Pow(self, as_expr(other))

    def __rpow__(self, other):
        return Pow(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return to_text(self)


def as_expr(value: Union["Expr", Number]) -> "Expr":
    if isinstance(value, Expr):
        return value
    return Const(float(value))


# Terminal nodes

@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"Const values must be finite, got {self.value!r}")
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if not isinstance(self.name, str) or not IDENTIFIER.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")


# Operator nodes

@dataclass(frozen=True)
class Neg(Expr):
    child: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


# Function nodes

@dataclass(frozen=True)
class Abs(Expr):
    child: Expr


@dataclass(frozen=True)
class Exp(Expr):
    child: Expr


@dataclass(frozen=True)
class Ln(Expr):
    child: Expr


@dataclass(frozen=True)
class Sin(Expr):
    child: Expr


@dataclass(frozen=True)
class Cos(Expr):
    child: Expr


@dataclass(frozen=True)
class Sqrt(Expr):
    child: Expr


ZERO = Const(0.0)
ONE = Const(1.0)

BINARY_NODES = (Add, Sub, Mul, Div)
FUNCTION_NODES = {"exp": Exp, "ln": Ln, "abs": Abs, "sin": Sin, "cos": Cos, "sqrt": Sqrt}
FUNCTION_NAMES = {node: name for name, node in FUNCTION_NODES.items()}
UNARY_NODES = (Neg,) + tuple(FUNCTION_NODES.values())


def children(e: Expr) -> Tuple[Expr, ...]:
    if isinstance(e, BINARY_NODES):
        return (e.left, e.right)
    if isinstance(e, Pow):
        return (e.base, e.exponent)
    if isinstance(e, UNARY_NODES):
        return (e.child,)
    return ()


def rebuild(e: Expr, new_children: Sequence[Expr]) -> Expr:
    """Same node type as e over new children."""
    if not new_children:
        return e
    return type(e)(*new_children)


def walk(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def variables(e: Expr) -> frozenset:
    return frozenset(node.name for node in walk(e) if isinstance(node, Var))


def node_count(e: Expr) -> int:
    return sum(1 for _ in walk(e))


def is_const(e: Expr, value: Optional[float] = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def constant_value(e: Expr) -> Optional[float]:
    """Value of a Var-free subtree, or None if it has variables or no value."""
    if isinstance(e, Const):
        return e.value
    if variables(e):
        return None
    try:
        return evaluate(e, {})
    except DomainError:
        return None


# ---------------------------------------------------------------------------
# Coordinates and points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoordinateSystem:
    """Ordered, distinct coordinate names x1..xn."""

    names: Tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        if not names:
            raise ValueError("a coordinate system needs at least one coordinate")
        for name in names:
            if not isinstance(name, str) or not IDENTIFIER.match(name):
                raise ValueError(f"invalid coordinate name {name!r}")
        if len(set(names)) != len(names):
            raise ValueError(f"coordinate names must be distinct: {names}")
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        return self.names.index(name)

    def point(self, values: Iterable[Number]) -> "Point":
        return Point(self.names, tuple(float(v) for v in values))

    def __str__(self):
        return " ".join(self.names)


class Point(Mapping[str, float]):
    """Immutable ordered association coordinate name -> finite real."""

    __slots__ = ("_names", "_values", "_index")

    def __init__(self, names: Sequence[str], values: Sequence[float]):
        names = tuple(names)
        values = tuple(float(v) for v in values)
        if len(names) != len(values):
            raise ValueError("point needs exactly one value per coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate in point: {names}")
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"point values must be finite: {values}")
        self._names = names
        self._values = values
        self._index = {name: i for i, name in enumerate(names)}

    @classmethod
    def of(cls, **values: Number) -> "Point":
        return cls(tuple(values), tuple(values.values()))

    def __getitem__(self, name: str) -> float:
        return self._values[self._index[name]]

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __hash__(self):
        return hash((self._names, self._values))

    def __eq__(self, other):
        if isinstance(other, Point):
            return self._names == other._names and self._values == other._values
        return Mapping.__eq__(self, other)

    @property
    def values_tuple(self) -> Tuple[float, ...]:
        return self._values

    def shifted(self, name: str, delta: float) -> "Point":
        values = list(self._values)
        values[self._index[name]] += delta
        return Point(self._names, values)

    def __repr__(self):
        inner = ", ".join(f"{n}: {v!r}" for n, v in zip(self._names, self._values))
        return "{" + inner + "}"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

TOKEN_PATTERN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()|])"
    r")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # number, ident, op, end
    text: str
    offset: int  # byte offset into the UTF-8 source


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    byte_offsets = _byte_offsets(text)
    while True:
        while position < len(text) and text[position].isspace():
            position += 1
        if position >= len(text):
            tokens.append(Token("end", "", byte_offsets[len(text)]))
            return tokens
        match = TOKEN_PATTERN.match(text, position)
        if match is None or match.end() == position:
            raise ParseError(f"unexpected character {text[position]!r}", byte_offsets[position], text)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), byte_offsets[start]))
        position = match.end()


def _byte_offsets(text: str) -> List[int]:
    offsets = [0]
    for ch in text:
        offsets.append(offsets[-1] + len(ch.encode("utf-8")))
    return offsets


class Parser:
    """Recursive descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')' | '|' expr '|'
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.position = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.current
        self.position += 1
        return token

    def accept(self, op: str) -> bool:
        if self.current.kind == "op" and self.current.text == op:
            self.position += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            found = self.current.text or "end of input"
            raise ParseError(f"expected '{op}' but found {found!r}", self.current.offset, self.text)

    def parse(self) -> Expr:
        tree = self.expr()
        if self.current.kind != "end":
            raise ParseError(f"unexpected {self.current.text!r}", self.current.offset, self.text)
        return tree

    def expr(self) -> Expr:
        tree = self.term()
        while True:
            if self.accept("+"):
                tree = Add(tree, self.term())
            elif self.accept("-"):
                tree = Sub(tree, self.term())
            else:
                return tree

    def term(self) -> Expr:
        tree = self.factor()
        while True:
            if self.accept("*"):
                tree = Mul(tree, self.factor())
            elif self.accept("/"):
                tree = Div(tree, self.factor())
            else:
                return tree

    def factor(self) -> Expr:
        if self.accept("-"):
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.factor())
        return base

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self.advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise ParseError(f"number {token.text!r} is out of range", token.offset, self.text)
            return Const(value)
        if token.kind == "ident":
            self.advance()
            if self.accept("("):
                node = FUNCTION_NODES.get(token.text)
                if node is None:
                    raise UnknownFunction(token.text, token.offset, self.text)
                argument = self.expr()
                self.expect(")")
                return node(argument)
            return Var(token.text)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        if self.accept("|"):
            inner = self.expr()
            self.expect("|")
            return Abs(inner)
        found = token.text or "end of input"
        raise ParseError(f"unexpected {found!r}", token.offset, self.text)


def parse(text: str) -> Expr:
    """Parse expression text into an Expr tree."""
    parser = Parser(text)
    try:
        return parser.parse()
    except RecursionError:
        raise ParseError("expression is nested too deeply", parser.current.offset, text) from None


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

PRECEDENCE_SUM = 1
PRECEDENCE_PRODUCT = 2
PRECEDENCE_UNARY = 3
PRECEDENCE_POWER = 4
PRECEDENCE_ATOM = 5


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _precedence(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return PRECEDENCE_SUM
    if isinstance(e, (Mul, Div)):
        return PRECEDENCE_PRODUCT
    if isinstance(e, Neg) or (isinstance(e, Const) and e.value < 0):
        return PRECEDENCE_UNARY
    if isinstance(e, Pow):
        return PRECEDENCE_POWER
    return PRECEDENCE_ATOM


@singledispatch
def to_text(e: Expr) -> str:
    """Print an expression in the grammar the parser reads."""
    raise TypeError(f"cannot print {type(e).__name__}")


@to_text.register
def _(e: Const) -> str:
    return format_number(e.value)


@to_text.register
def _(e: Var) -> str:
    return e.name


@to_text.register
def _(e: Neg) -> str:
    child = to_text(e.child)
    if _precedence(e.child) <= PRECEDENCE_UNARY:
        return f"-({child})"
    return f"-{child}"


def _binary_text(e: Expr, symbol: str, precedence: int) -> str:
    left = to_text(e.left)
    if _precedence(e.left) < precedence:
        left = f"({left})"
    right = to_text(e.right)
    # right operands at the same level keep the tree shape on re-parse
    if _precedence(e.right) <= precedence:
        right = f"({right})"
    return f"{left} {symbol} {right}" if precedence == PRECEDENCE_SUM else f"{left}{symbol}{right}"


@to_text.register
def _(e: Add) -> str:
    return _binary_text(e, "+", PRECEDENCE_SUM)


@to_text.register
def _(e: Sub) -> str:
    return _binary_text(e, "-", PRECEDENCE_SUM)


@to_text.register
def _(e: Mul) -> str:
    return _binary_text(e, "*", PRECEDENCE_PRODUCT)


@to_text.register
def _(e: Div) -> str:
    return _binary_text(e, "/", PRECEDENCE_PRODUCT)


@to_text.register
def _(e: Pow) -> str:
    base = to_text(e.base)
    if _precedence(e.base) < PRECEDENCE_ATOM:
        base = f"({base})"
    exponent = to_text(e.exponent)
    if _precedence(e.exponent) < PRECEDENCE_ATOM:
        exponent = f"({exponent})"
    return f"{base}^{exponent}"


def _function_text(e: Expr) -> str:
    return f"{FUNCTION_NAMES[type(e)]}({to_text(e.child)})"


for _node in FUNCTION_NODES.values():
    to_text.register(_node, _function_text)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _checked(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise DomainError(f"{what} is not a finite real")
    return value


def _integer_power(base: float, n: int) -> float:
    if n < 0:
        if base == 0.0:
            raise DomainError("division by zero in negative integer power")
        return 1.0 / _integer_power(base, -n)
    result = 1.0
    factor = base
    while n:
        if n & 1:
            result *= factor
        n >>= 1
        if n:
            factor *= factor
    return result


@singledispatch
def _eval(e: Expr, env: Mapping[str, float]) -> float:
    raise TypeError(f"cannot evaluate {type(e).__name__}")


@_eval.register
def _(e: Const, env: Mapping[str, float]) -> float:
    return e.value


@_eval.register
def _(e: Var, env: Mapping[str, float]) -> float:
    try:
        return float(env[e.name])
    except KeyError:
        raise MissingVariable(e.name) from None


@_eval.register
def _(e: Neg, env: Mapping[str, float]) -> float:
    return -_eval(e.child, env)


@_eval.register
def _(e: Add, env: Mapping[str, float]) -> float:
    return _checked(_eval(e.left, env) + _eval(e.right, env), "sum")


@_eval.register
def _(e: Sub, env: Mapping[str, float]) -> float:
    return _checked(_eval(e.left, env) - _eval(e.right, env), "difference")


@_eval.register
def _(e: Mul, env: Mapping[str, float]) -> float:
    return _checked(_eval(e.left, env) * _eval(e.right, env), "product")


@_eval.register
def _(e: Div, env: Mapping[str, float]) -> float:
    numerator = _eval(e.left, env)
    denominator = _eval(e.right, env)
    if denominator == 0.0:
        raise DomainError("division by zero")
    return _checked(numerator / denominator, "quotient")


@_eval.register
def _(e: Pow, env: Mapping[str, float]) -> float:
    base = _eval(e.base, env)
    exponent = _eval(e.exponent, env)
    if not variables(e.exponent) and exponent.is_integer():
        try:
            return _checked(_integer_power(base, int(exponent)), "power")
        except OverflowError:
            raise DomainError("power overflows") from None
    if base <= 0.0:
        raise DomainError(f"non-integer power of non-positive base {base!r}")
    try:
        return _checked(math.exp(exponent * math.log(base)), "power")
    except OverflowError:
        raise DomainError("power overflows") from None


@_eval.register
def _(e: Abs, env: Mapping[str, float]) -> float:
    return abs(_eval(e.child, env))


@_eval.register
def _(e: Exp, env: Mapping[str, float]) -> float:
    try:
        return math.exp(_eval(e.child, env))
    except OverflowError:
        raise DomainError("exp overflows") from None


@_eval.register
def _(e: Ln, env: Mapping[str, float]) -> float:
    argument = _eval(e.child, env)
    if argument <= 0.0:
        raise DomainError(f"ln of non-positive argument {argument!r}")
    return math.log(argument)


@_eval.register
def _(e: Sin, env: Mapping[str, float]) -> float:
    return math.sin(_eval(e.child, env))


@_eval.register
def _(e: Cos, env: Mapping[str, float]) -> float:
    return math.cos(_eval(e.child, env))


@_eval.register
def _(e: Sqrt, env: Mapping[str, float]) -> float:
    argument = _eval(e.child, env)
    if argument <= 0.0:
        raise DomainError(f"sqrt of non-positive argument {argument!r}")
    return math.sqrt(argument)


def evaluate(e: Expr, p: Mapping[str, float]) -> float:
    """Evaluate e at point p with real arithmetic.

    Raises DomainError (with the point attached) outside the real domain and
    MissingVariable when p lacks a variable of e.
    """
    try:
        return _eval(e, p)
    except DomainError as error:
        if error.point is None and p:
            raise error.at(p) from None
        raise


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

@singledispatch
def _diff(e: Expr, v: str) -> Expr:
    raise TypeError(f"cannot differentiate {type(e).__name__}")


@_diff.register
def _(e: Const, v: str) -> Expr:
    return ZERO


@_diff.register
def _(e: Var, v: str) -> Expr:
    return ONE if e.name == v else ZERO


@_diff.register
def _(e: Neg, v: str) -> Expr:
    return Neg(_diff(e.child, v))


@_diff.register
def _(e: Add, v: str) -> Expr:
    return Add(_diff(e.left, v), _diff(e.right, v))


@_diff.register
def _(e: Sub, v: str) -> Expr:
    return Sub(_diff(e.left, v), _diff(e.right, v))


@_diff.register
def _(e: Mul, v: str) -> Expr:
    return Add(Mul(_diff(e.left, v), e.right), Mul(e.left, _diff(e.right, v)))


@_diff.register
def _(e: Div, v: str) -> Expr:
    numerator = Sub(Mul(_diff(e.left, v), e.right), Mul(e.left, _diff(e.right, v)))
    return Div(numerator, Pow(e.right, Const(2.0)))


@_diff.register
def _(e: Pow, v: str) -> Expr:
    if variables(e.exponent):
        return _diff(Exp(Mul(e.exponent, Ln(e.base))), v)
    c = constant_value(e.exponent)
    lowered = Const(c - 1.0) if c is not None else Sub(e.exponent, ONE)
    return Mul(Mul(e.exponent, Pow(e.base, lowered)), _diff(e.base, v))


@_diff.register
def _(e: Abs, v: str) -> Expr:
    return Mul(Div(e.child, Abs(e.child)), _diff(e.child, v))


@_diff.register
def _(e: Exp, v: str) -> Expr:
    return Mul(e, _diff(e.child, v))


@_diff.register
def _(e: Ln, v: str) -> Expr:
    return Div(_diff(e.child, v), e.child)


@_diff.register
def _(e: Sin, v: str) -> Expr:
    return Mul(Cos(e.child), _diff(e.child, v))


@_diff.register
def _(e: Cos, v: str) -> Expr:
    return Mul(Neg(Sin(e.child)), _diff(e.child, v))


@_diff.register
def _(e: Sqrt, v: str) -> Expr:
    return Div(_diff(e.child, v), Mul(Const(2.0), e))


def differentiate(e: Expr, v: str) -> Expr:
    """Exact partial derivative of e with respect to v, normalized."""
    if not isinstance(v, str) or not IDENTIFIER.match(v):
        raise ValueError(f"invalid variable name {v!r}")
    return normalize(_diff(e, v))


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    """Simultaneously replace each bound Var; replacements are not revisited."""
    if isinstance(e, Var):
        replacement = bindings.get(e.name)
        return as_expr(replacement) if replacement is not None else e
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, [substitute(child, bindings) for child in kids])


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

MAX_NORMALIZE_PASSES = 64


def _fold(e: Expr) -> Optional[Expr]:
    """Fold a node whose children are all constants."""
    kids = children(e)
    if not kids or not all(isinstance(k, Const) for k in kids):
        return None
    try:
        return Const(_eval(e, {}))
    except (DomainError, ValueError):
        return None


def _rewrite(e: Expr) -> Expr:
    """One local rewrite at the root of e (children already normalized)."""
    folded = _fold(e)
    if folded is not None:
        return folded

    if isinstance(e, Neg):
        if isinstance(e.child, Neg):
            return e.child.child
        if isinstance(e.child, Const):
            return Const(-e.child.value)
        return e

    if isinstance(e, Add):
        a, b = e.left, e.right
        if is_const(b, 0.0):
            return a
        if is_const(a, 0.0):
            return b
        if isinstance(b, Neg):
            return Sub(a, b.child)
        if isinstance(b, Const) and b.value < 0:
            return Sub(a, Const(-b.value))
        return e

    if isinstance(e, Sub):
        a, b = e.left, e.right
        if is_const(b, 0.0):
            return a
        if is_const(a, 0.0):
            return Neg(b)
        if a == b:
            return ZERO
        if isinstance(a, Add):
            if a.left == b:
                return a.right
            if a.right == b:
                return a.left
        if isinstance(b, Neg):
            return Add(a, b.child)
        return e

    if isinstance(e, Mul):
        a, b = e.left, e.right
        if is_const(a, 0.0) or is_const(b, 0.0):
            return ZERO
        if is_const(b, 1.0):
            return a
        if is_const(a, 1.0):
            return b
        if is_const(a, -1.0):
            return Neg(b)
        if is_const(b, -1.0):
            return Neg(a)
        if isinstance(b, Const) and not isinstance(a, Const):
            return Mul(b, a)
        if isinstance(a, Neg):
            return Neg(Mul(a.child, b))
        if isinstance(b, Neg):
            return Neg(Mul(a, b.child))
        if isinstance(a, Const) and isinstance(b, Mul) and isinstance(b.left, Const):
            return Mul(Const(a.value * b.left.value), b.right)
        if isinstance(a, Exp) and isinstance(b, Exp):
            return Exp(Add(a.child, b.child))
        return e

    if isinstance(e, Div):
        a, b = e.left, e.right
        if is_const(b, 1.0):
            return a
        if is_const(a, 0.0):
            return ZERO
        if isinstance(a, Div) and isinstance(b, Div):
            return Div(Mul(a.left, b.right), Mul(a.right, b.left))
        if isinstance(a, Neg):
            return Neg(Div(a.child, b))
        return e

    if isinstance(e, Pow):
        if is_const(e.exponent, 1.0):
            return e.base
        if is_const(e.exponent, 0.0):
            return ONE
        return e

    return e


def _normalize_pass(e: Expr) -> Expr:
    kids = children(e)
    if kids:
        new_kids = [_normalize_pass(child) for child in kids]
        if any(new is not old for new, old in zip(new_kids, kids)):
            e = rebuild(e, new_kids)
    return _rewrite(e)


def normalize(e: Expr) -> Expr:
    """Apply the structural rewrites bottom-up until nothing changes."""
    for _ in range(MAX_NORMALIZE_PASSES):
        rewritten = _normalize_pass(e)
        if rewritten == e:
            return rewritten
        e = rewritten
    return e


# ---------------------------------------------------------------------------
# Numeric comparison
# ---------------------------------------------------------------------------

def relative_gap(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def numeric_equal(e1: Expr, e2: Expr, d, samples: int = 100, tol: float = 1e-12, seed: int = 42) -> bool:
    """True iff |e1 - e2| <= tol * max(1, |e1|) at every sampled point of d.

    d is a numeric_verify.Domain (anything with sample(n, seed)).
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    for point in d.sample(samples, seed):
        if relative_gap(evaluate(e2, point), evaluate(e1, point)) > tol:
            return False
    return True
