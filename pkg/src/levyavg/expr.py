"""Tiny recursive-descent parser for coefficient expressions.

Experiment configs declare drift/diffusion coefficients as strings so that a
run is fully reproducible from its config document.  The grammar is fixed and
deterministic:

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Recognised function names: ``sin, cos, exp, min, max, abs, abspow`` with
``abspow(u, a) = |u|^a``.  Recognised variables: ``t, x, x1, x2, x3, y`` plus
the constant ``pi``.  Everything evaluates elementwise over numpy arrays.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import ConfigError

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[()+\-*/^,]))"
)

_FUNCTIONS = {
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "exp": (1, np.exp),
    "abs": (1, np.abs),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
    "abspow": (2, lambda u, a: np.abs(u) ** a),
}

VARIABLES = ("t", "x", "x1", "x2", "x3", "y")
_CONSTANTS = {"pi": math.pi}


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            raise ConfigError(f"cannot tokenize expression at: {source[pos:]!r}")
        if m.lastgroup == "num":
            tokens.append(("num", float(m.group("num"))))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, source):
        self.tokens = tokens
        self.source = source
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ConfigError(f"expected {op!r} in {self.source!r}")

    def parse(self):
        node = self.expr()
        if self.i != len(self.tokens):
            raise ConfigError(f"trailing input in expression {self.source!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.next()
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.next()
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.next()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.next()
            node = ("^", node, self.unary())
        return node

    def atom(self):
        kind, val = self.next()
        if kind == "num":
            return ("const", val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if self.peek() == ("op", "("):
                self.next()
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                if val not in _FUNCTIONS:
                    raise ConfigError(f"unknown function {val!r} in {self.source!r}")
                arity, _ = _FUNCTIONS[val]
                if len(args) != arity:
                    raise ConfigError(f"{val} takes {arity} argument(s)")
                return ("call", val, args)
            if val in _CONSTANTS:
                return ("const", _CONSTANTS[val])
            if val not in VARIABLES:
                raise ConfigError(f"unknown symbol {val!r} in {self.source!r}")
            return ("var", val)
        raise ConfigError(f"unexpected end of expression {self.source!r}")


def parse(source: str):
    """Parse ``source`` into an expression tree (nested tuples)."""
    return _Parser(_tokenize(source), source).parse()


def variables_of(source: str) -> set:
    """The variable names a parsed expression actually references."""
    names = set()

    def walk(node):
        tag = node[0]
        if tag == "var":
            names.add(node[1])
        elif tag == "call":
            for arg in node[2]:
                walk(arg)
        elif tag == "neg":
            walk(node[1])
        elif tag in ("+", "-", "*", "/", "^"):
            walk(node[1])
            walk(node[2])

    walk(parse(source))
    return names


def _evaluate(node, env):
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "var":
        name = node[1]
        if name not in env:
            raise ConfigError(f"variable {name!r} not bound in this context")
        return env[name]
    if tag == "neg":
        return -_evaluate(node[1], env)
    if tag == "call":
        _, fname, args = node
        fn = _FUNCTIONS[fname][1]
        return fn(*(_evaluate(a, env) for a in args))
    op, lhs, rhs = node
    a, b = _evaluate(lhs, env), _evaluate(rhs, env)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    if op == "^":
        return a**b
    raise ConfigError(f"unknown operator {op!r}")


def compile_expression(source: str):
    """Compile ``source`` to a function of keyword arguments.

    The returned callable accepts any subset of the variable names as numpy
    arrays or scalars (``f(t=..., x=...)``) and evaluates elementwise.  For
    1-d state, ``x`` and ``x1`` are interchangeable.
    """
    tree = parse(source)

    def fn(**env):
        if "x" in env and "x1" not in env:
            env = dict(env, x1=env["x"])
        elif "x1" in env and "x" not in env:
            env = dict(env, x=env["x1"])
        return _evaluate(tree, env)

    fn.source = source
    return fn
