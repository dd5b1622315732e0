"""
A tiny arithmetic-expression grammar for closed-form profiles and couplings.

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | VARIABLE | 'exp' '(' expr ')' | '(' expr ')'

Expressions are parsed into a tree and evaluated with numpy; nothing is handed to
eval. Trees can be differentiated symbolically, which is how expression profiles
get exact f0' and f0''.
"""

import math
import re
from typing import Iterable, List, Tuple

import numpy as np

from .errors import ConfigError

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|([A-Za-z_]\w*)|(\S))")


class Node:
    def evaluate(self, x):
        raise NotImplementedError

    def derivative(self) -> "Node":
        raise NotImplementedError

    @property
    def constant(self) -> bool:
        return False


class Num(Node):
    def __init__(self, value: float):
        self.value = float(value)

    def evaluate(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.value)

    def derivative(self):
        return Num(0.0)

    @property
    def constant(self):
        return True

    def __repr__(self):
        return repr(self.value)


class Var(Node):
    def evaluate(self, x):
        return np.asarray(x, dtype=float)

    def derivative(self):
        return Num(1.0)

    def __repr__(self):
        return "x"


class Unary(Node):
    def __init__(self, op: str, arg: Node):
        self.op = op
        self.arg = arg

    def evaluate(self, x):
        value = self.arg.evaluate(x)
        return -value if self.op == "neg" else np.exp(value)

    def derivative(self):
        if self.op == "neg":
            return neg(self.arg.derivative())
        return mul(self, self.arg.derivative())

    @property
    def constant(self):
        return self.arg.constant

    def __repr__(self):
        return f"-({self.arg!r})" if self.op == "neg" else f"exp({self.arg!r})"


class Binary(Node):
    def __init__(self, op: str, left: Node, right: Node):
        self.op = op
        self.left = left
        self.right = right

    def evaluate(self, x):
        a = self.left.evaluate(x)
        b = self.right.evaluate(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return np.power(a, b)

    @property
    def constant(self):
        return self.left.constant and self.right.constant

    def derivative(self):
        a, b = self.left, self.right
        da, db = a.derivative(), b.derivative()
        if self.op == "+":
            return add(da, db)
        if self.op == "-":
            return sub(da, db)
        if self.op == "*":
            return add(mul(da, b), mul(a, db))
        if self.op == "/":
            return div(sub(mul(da, b), mul(a, db)), power(b, Num(2.0)))
        if b.constant:
            return mul(mul(b, power(a, sub(b, Num(1.0)))), da)
        if a.constant:
            base = float(a.evaluate(0.0))
            if base <= 0:
                raise ConfigError("variable exponents need a positive constant base")
            return mul(mul(self, Num(math.log(base))), db)
        raise ConfigError("x^f(x) is outside the expression grammar")

    def __repr__(self):
        return f"({self.left!r} {self.op} {self.right!r})"


def _fold(node: Node) -> Node:
    if node.constant and not isinstance(node, Num):
        return Num(float(node.evaluate(0.0)))
    return node


def _is(node: Node, value: float) -> bool:
    return isinstance(node, Num) and node.value == value


def add(a, b):
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return _fold(Binary("+", a, b))


def sub(a, b):
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return _fold(Binary("-", a, b))


def mul(a, b):
    if _is(a, 0.0) or _is(b, 0.0):
        return Num(0.0)
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return _fold(Binary("*", a, b))


def div(a, b):
    if _is(a, 0.0):
        return Num(0.0)
    if _is(b, 1.0):
        return a
    return _fold(Binary("/", a, b))


def power(a, b):
    if _is(b, 1.0):
        return a
    if _is(b, 0.0):
        return Num(1.0)
    return _fold(Binary("^", a, b))


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    return Unary("neg", a)


def _tokenize(text: str) -> List[Tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ConfigError(f"cannot parse expression near '{text[pos:]}'")
        number, name, symbol = match.groups()
        if number is not None:
            tokens.append(("num", number))
        elif name is not None:
            tokens.append(("name", name))
        else:
            tokens.append(("sym", symbol))
        pos = match.end()
    tokens.append(("end", ""))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Iterable[str]):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.variables = set(variables)

    def peek(self):
        return self.tokens[self.pos]

    def take(self, expected=None):
        kind, value = self.tokens[self.pos]
        if expected is not None and value != expected:
            raise ConfigError(f"expected '{expected}' in expression '{self.text}', found '{value or 'end'}'")
        self.pos += 1
        return kind, value

    def parse(self) -> Node:
        node = self.expr()
        if self.peek()[0] != "end":
            raise ConfigError(f"unexpected '{self.peek()[1]}' in expression '{self.text}'")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in (("sym", "+"), ("sym", "-")):
            op = self.take()[1]
            node = add(node, self.term()) if op == "+" else sub(node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("sym", "*"), ("sym", "/")):
            op = self.take()[1]
            node = mul(node, self.unary()) if op == "*" else div(node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("sym", "-"):
            self.take()
            return neg(self.unary())
        if self.peek() == ("sym", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("sym", "^"):
            self.take()
            return power(base, self.unary())
        return base

    def atom(self):
        kind, value = self.take()
        if kind == "num":
            return Num(float(value))
        if kind == "name":
            if value in self.variables:
                return Var()
            if value == "exp":
                self.take("(")
                inner = self.expr()
                self.take(")")
                return _fold(Unary("exp", inner))
            raise ConfigError(f"unknown name '{value}' in expression '{self.text}'")
        if value == "(":
            inner = self.expr()
            self.take(")")
            return inner
        raise ConfigError(f"unexpected '{value or 'end'}' in expression '{self.text}'")


class Expression:
    """A parsed closed form in one variable, callable on numpy arrays."""

    def __init__(self, text: str, variables: Iterable[str] = ("x", "p"), _tree: Node = None):
        self.text = text
        self.variables = tuple(variables)
        self.tree = _tree if _tree is not None else _Parser(text, self.variables).parse()

    def __call__(self, x):
        with np.errstate(over="ignore", under="ignore"):
            out = self.tree.evaluate(x)
        return out if np.ndim(x) else float(out)

    def derivative(self) -> "Expression":
        return Expression(f"d/dx[{self.text}]", self.variables, _tree=self.tree.derivative())

    def __repr__(self):
        return f"Expression({self.text!r})"


def parse_expression(text: str, variables: Iterable[str] = ("x", "p")) -> Expression:
    if not text or not text.strip():
        raise ConfigError("empty expression")
    return Expression(text, variables)
