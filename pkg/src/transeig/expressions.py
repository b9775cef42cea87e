"""Arithmetic expressions over spatial coordinates.

A refractive-index coefficient is given as text like ``16 + 8*sin(4*x*y)``
and parsed by recursive descent into a small AST that evaluates on scalars
or numpy arrays. The grammar:

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom
    atom   := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')'

Variables are ``x``, ``y``, ``z``; functions are ``sin``, ``cos``, ``exp``.
Unary minus binds tighter than ``*`` and ``/``; binary operators associate
left. There is no implicit multiplication: ``4xy`` must be written
``4*x*y``.
"""

import math

import numpy as np

from .errors import ExpressionError

_FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_VARIABLES = ("x", "y", "z")


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------

class _Node:
    __slots__ = ()

    def evaluate(self, x, y, z):
        raise NotImplementedError

    def to_text(self):
        raise NotImplementedError

    # precedence used when pretty-printing: higher binds tighter
    prec = 4


class _Num(_Node):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = float(value)

    def evaluate(self, x, y, z):
        return self.value

    def to_text(self):
        return format(self.value, ".17g")


class _Var(_Node):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def evaluate(self, x, y, z):
        return {"x": x, "y": y, "z": z}[self.name]

    def to_text(self):
        return self.name


class _Neg(_Node):
    __slots__ = ("operand",)
    prec = 3

    def __init__(self, operand):
        self.operand = operand

    def evaluate(self, x, y, z):
        return -self.operand.evaluate(x, y, z)

    def to_text(self):
        inner = self.operand.to_text()
        if self.operand.prec < self.prec:
            inner = f"({inner})"
        return f"-{inner}"


class _BinOp(_Node):
    __slots__ = ("op", "left", "right")

    def __init__(self, op, left, right):
        self.op = op
        self.left = left
        self.right = right

    @property
    def prec(self):
        return 1 if self.op in "+-" else 2

    def evaluate(self, x, y, z):
        a = self.left.evaluate(x, y, z)
        b = self.right.evaluate(x, y, z)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.divide(a, b)      # inf/nan instead of ZeroDivisionError

    def to_text(self):
        lhs = self.left.to_text()
        rhs = self.right.to_text()
        if self.left.prec < self.prec:
            lhs = f"({lhs})"
        # left associativity: parenthesize right operand at equal precedence
        if self.right.prec <= self.prec:
            rhs = f"({rhs})"
        return f"{lhs} {self.op} {rhs}"


class _Call(_Node):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        self.name = name
        self.arg = arg

    def evaluate(self, x, y, z):
        return _FUNCTIONS[self.name](self.arg.evaluate(x, y, z))

    def to_text(self):
        return f"{self.name}({self.arg.to_text()})"


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

class _Tokenizer:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return ("end", "", self.pos)
        ch = self.text[self.pos]
        if ch in "+-*/()":
            return ("op", ch, self.pos)
        if ch.isdigit() or ch == ".":
            j = self.pos
            seen_dot = False
            while j < len(self.text) and (self.text[j].isdigit() or self.text[j] == "."):
                seen_dot |= self.text[j] == "."
                j += 1
            if j < len(self.text) and self.text[j] in "eE":
                k = j + 1
                if k < len(self.text) and self.text[k] in "+-":
                    k += 1
                if k < len(self.text) and self.text[k].isdigit():
                    j = k
                    while j < len(self.text) and self.text[j].isdigit():
                        j += 1
            word = self.text[self.pos:j]
            try:
                float(word)
            except ValueError:
                raise ExpressionError(f"bad numeric literal {word!r}", self.pos)
            return ("num", word, self.pos)
        if ch.isalpha() or ch == "_":
            j = self.pos
            while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
                j += 1
            return ("ident", self.text[self.pos:j], self.pos)
        raise ExpressionError(f"unexpected character {ch!r}", self.pos)

    def next(self):
        kind, word, pos = self.peek()
        self.pos = pos + len(word) if kind != "end" else self.pos
        return kind, word, pos


class _Parser:
    def __init__(self, text):
        self.tok = _Tokenizer(text)

    def parse(self):
        node = self._expr()
        kind, word, pos = self.tok.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected token {word!r}", pos)
        return node

    def _expr(self):
        node = self._term()
        while True:
            kind, word, _ = self.tok.peek()
            if kind == "op" and word in "+-":
                self.tok.next()
                node = _BinOp(word, node, self._term())
            else:
                return node

    def _term(self):
        node = self._factor()
        while True:
            kind, word, _ = self.tok.peek()
            if kind == "op" and word in "*/":
                self.tok.next()
                node = _BinOp(word, node, self._factor())
            else:
                return node

    def _factor(self):
        kind, word, pos = self.tok.peek()
        if kind == "op" and word == "-":
            self.tok.next()
            return _Neg(self._factor())
        return self._atom()

    def _atom(self):
        kind, word, pos = self.tok.next()
        if kind == "num":
            return _Num(word)
        if kind == "ident":
            if word in _VARIABLES:
                return _Var(word)
            if word in _FUNCTIONS:
                k2, w2, p2 = self.tok.next()
                if (k2, w2) != ("op", "("):
                    raise ExpressionError(f"expected '(' after {word!r}", p2)
                arg = self._expr()
                k3, w3, p3 = self.tok.next()
                if (k3, w3) != ("op", ")"):
                    raise ExpressionError("expected ')'", p3)
                return _Call(word, arg)
            raise ExpressionError(f"unknown identifier {word!r}", pos)
        if kind == "op" and word == "(":
            node = self._expr()
            k2, w2, p2 = self.tok.next()
            if (k2, w2) != ("op", ")"):
                raise ExpressionError("expected ')'", p2)
            return node
        raise ExpressionError(f"unexpected token {word!r}" if word else "unexpected end of input", pos)


# ---------------------------------------------------------------------------
# Public interface
# ---------------------------------------------------------------------------

class RefractiveIndex:
    """A parsed coefficient expression, evaluable at points of the domain.

    Instances are immutable; evaluation has no side effects and is safe to
    call concurrently.
    """

    def __init__(self, root, source):
        self._root = root
        self._source = source

    @property
    def source(self):
        return self._source

    def __call__(self, x, y, z=0.0):
        """Evaluate at coordinates (scalars or broadcastable arrays)."""
        out = self._root.evaluate(x, y, z)
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return np.broadcast_to(np.asarray(out, float), np.shape(x)).copy() \
            if np.ndim(out) == 0 else np.asarray(out, float)

    def is_constant(self):
        """True when the expression contains no coordinate variables."""
        def walk(node):
            if isinstance(node, _Var):
                return False
            if isinstance(node, _Neg):
                return walk(node.operand)
            if isinstance(node, _BinOp):
                return walk(node.left) and walk(node.right)
            if isinstance(node, _Call):
                return walk(node.arg)
            return True
        return walk(self._root)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("expression is not constant")
        return float(self._root.evaluate(0.0, 0.0, 0.0))

    def to_text(self):
        """Pretty-print; re-parsing the result evaluates identically."""
        return self._root.to_text()

    def __repr__(self):
        return f"RefractiveIndex({self._source!r})"


def parse_index(text: str) -> RefractiveIndex:
    """Parse a coefficient expression.

    Parameters
    ----------
    text : str
        Expression over x, y, z with ``+ - * /``, unary minus, parentheses
        and the functions sin, cos, exp.

    Raises
    ------
    ExpressionError
        On a syntax error or unknown identifier; the exception carries the
        character position.
    """
    if not text or not text.strip():
        raise ExpressionError("empty expression")
    return RefractiveIndex(_Parser(text).parse(), text)


def eval_index(n: RefractiveIndex, p) -> float:
    """Evaluate the coefficient at a single point (2D or 3D).

    Raises
    ------
    ExpressionError
        If the result is not finite (e.g. division by zero).
    """
    p = np.asarray(p, float)
    z = p[2] if p.shape[0] > 2 else 0.0
    val = n(float(p[0]), float(p[1]), float(z))
    if not math.isfinite(val):
        raise ExpressionError(f"expression {n.source!r} is not finite at {tuple(p)}")
    return val
