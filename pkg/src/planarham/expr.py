"""Scalar expressions in two variables: parsing, printing, first-order jets.

The expression language is deliberately small: constants, the variables
``x`` and ``y``, unary ``neg/exp/sin/cos/sqrt`` and binary
``add/sub/mul/div/powi``.  ``powi`` only accepts a literal non-negative
integer exponent, so every expression is smooth wherever it is defined
and the forward-mode jet rules below stay total.

Three evaluation paths exist on purpose:

* :func:`eval_jet` -- reference tree walk, raises :class:`DomainError`
  naming the offending subexpression,
* :func:`compile_jet_pair` -- generated straight-line code for the hot
  integration loops (falls back to the tree walk to diagnose failures),
* :func:`eval_grid` -- vectorised numpy walk for grids, ``nan`` where the
  evaluation leaves the real domain.

All nodes are frozen dataclasses, so structural equality and hashing are
free and compiled callables can be cached per tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

UNARY_OPS = ("neg", "exp", "sin", "cos", "sqrt")
BINARY_OPS = ("add", "sub", "mul", "div", "powi")

OVERFLOW_LIMIT = 1e150


class ParseError(ValueError):
    """Syntax error with a character position into the source text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DomainError(ArithmeticError):
    """Real evaluation failed (sqrt of a negative, division by zero, ...).

    Carries the offending subexpression and the evaluation point so that
    callers can report exactly what left the domain.
    """

    def __init__(self, message: str, subexpr: "Expr", point: tuple[float, float]):
        super().__init__(f"{message} in '{print_expr(subexpr)}' at {point}")
        self.subexpr = subexpr
        self.point = point


# ===== AST ===== #


@dataclass(frozen=True)
class Expr:
    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True)
class Constant(Expr):
    value: float


@dataclass(frozen=True)
class Variable(Expr):
    name: str  # 'x' or 'y'


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    child: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


X = Variable("x")
Y = Variable("y")


def powi(base: Expr, n: int) -> Binary:
    if n < 0 or n != int(n):
        raise ValueError("powi exponent must be a non-negative integer")
    return Binary("powi", base, Constant(float(n)))


def powi_exponent(node: Binary) -> int:
    """Exponent of a powi node, validated to be a non-negative integer literal."""
    if not (isinstance(node.right, Constant) and node.right.value >= 0
            and float(node.right.value).is_integer()):
        raise ValueError(f"malformed powi exponent: {node.right!r}")
    return int(node.right.value)


@dataclass(frozen=True)
class Jet1:
    """Value and first partials of a scalar at a point."""

    value: float
    dx: float
    dy: float


# ===== Parser ===== #

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<sym>[()+\-*/^]))"
)

_FUNCS = {"exp", "sin", "cos", "sqrt"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("sym", m.group("sym"), m.start("sym")))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_sym(self, sym: str) -> None:
        kind, val, pos = self.peek()
        if kind != "sym" or val != sym:
            raise ParseError(f"expected {sym!r}", pos)
        self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {val!r}", pos)
        return e

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "sym" and val in "+-":
                self.advance()
                rhs = self.term()
                node = Binary("add" if val == "+" else "sub", node, rhs)
            else:
                return node

    def term(self) -> Expr:
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "sym" and val in "*/":
                self.advance()
                rhs = self.factor()
                node = Binary("mul" if val == "*" else "div", node, rhs)
            else:
                return node

    def factor(self) -> Expr:
        kind, val, _ = self.peek()
        negate = False
        if kind == "sym" and val == "-":
            self.advance()
            negate = True
        node = self.atom()
        kind, val, pos = self.peek()
        if kind == "sym" and val == "^":
            self.advance()
            kind, val, pos = self.peek()
            if kind != "num" or not re.fullmatch(r"\d+", val):
                raise ParseError("exponent must be a non-negative integer literal", pos)
            self.advance()
            node = powi(node, int(val))
        if negate:
            if isinstance(node, Constant):
                node = Constant(-node.value)
            else:
                node = Unary("neg", node)
        return node

    def atom(self) -> Expr:
        kind, val, pos = self.advance()
        if kind == "num":
            return Constant(float(val))
        if kind == "ident":
            if val in ("x", "y"):
                return Variable(val)
            if val in _FUNCS:
                self.expect_sym("(")
                inner = self.expr()
                self.expect_sym(")")
                return Unary(val, inner)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if kind == "sym" and val == "(":
            inner = self.expr()
            self.expect_sym(")")
            return inner
        raise ParseError(f"unexpected token {val!r}" if val else "unexpected end of input", pos)


def parse_expr(text: str) -> Expr:
    """Parse source text into an expression tree.

    Grammar (whitespace insignificant)::

        expr   := term (('+'|'-') term)*
        term   := factor (('*'|'/') factor)*
        factor := ['-'] atom ['^' INTEGER]
        atom   := NUMBER | 'x' | 'y' | FUNC '(' expr ')' | '(' expr ')'

    A leading minus on a numeric literal folds into the constant, so
    ``parse_expr(print_expr(e)) == e`` structurally for every tree this
    module can produce.
    """
    return _Parser(text).parse()


# ===== Printer ===== #

# precedence levels used for minimal parenthesisation
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 2  # a unary-minus factor binds like a term element
_PREC_POW = 3
_PREC_ATOM = 4


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        if e.op in ("add", "sub"):
            return _PREC_ADD
        if e.op in ("mul", "div"):
            return _PREC_MUL
        return _PREC_POW
    if isinstance(e, Unary):
        return _PREC_NEG if e.op == "neg" else _PREC_ATOM
    if isinstance(e, Constant) and e.value < 0:
        return _PREC_NEG
    return _PREC_ATOM


def _fmt_const(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def _wrap(e: Expr, min_prec: int) -> str:
    s = print_expr(e)
    if _prec(e) < min_prec:
        return f"({s})"
    return s


def print_expr(e: Expr) -> str:
    """Canonical source form; reparsing reproduces the tree structurally."""
    if isinstance(e, Constant):
        return _fmt_const(e.value)
    if isinstance(e, Variable):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + _wrap(e.child, _PREC_ATOM)
        return f"{e.op}({print_expr(e.child)})"
    if isinstance(e, Binary):
        if e.op == "add":
            return f"{_wrap(e.left, _PREC_ADD)} + {_wrap(e.right, _PREC_ADD + 1)}"
        if e.op == "sub":
            return f"{_wrap(e.left, _PREC_ADD)} - {_wrap(e.right, _PREC_ADD + 1)}"
        if e.op == "mul":
            return f"{_wrap(e.left, _PREC_MUL)}*{_wrap(e.right, _PREC_MUL + 1)}"
        if e.op == "div":
            return f"{_wrap(e.left, _PREC_MUL)}/{_wrap(e.right, _PREC_MUL + 1)}"
        if e.op == "powi":
            return f"{_wrap(e.left, _PREC_ATOM)}^{powi_exponent(e)}"
    raise TypeError(f"not an expression node: {e!r}")


# ===== Reference jet evaluation ===== #


def eval_jet(e: Expr, point: tuple[float, float]) -> Jet1:
    """Value and exact first partials at ``point`` by forward-mode rules.

    Raises :class:`DomainError` identifying the subexpression that first
    left the real domain.  No finite differences anywhere.
    """
    x, y = point

    def rec(node: Expr) -> tuple[float, float, float]:
        if isinstance(node, Constant):
            return node.value, 0.0, 0.0
        if isinstance(node, Variable):
            return (x, 1.0, 0.0) if node.name == "x" else (y, 0.0, 1.0)
        if isinstance(node, Unary):
            v, dx, dy = rec(node.child)
            if node.op == "neg":
                return -v, -dx, -dy
            if node.op == "exp":
                try:
                    w = math.exp(v)
                except OverflowError:
                    raise DomainError("exp overflow", node, point) from None
                return w, w * dx, w * dy
            if node.op in ("sin", "cos"):
                # upstream arithmetic can overflow to inf silently; the
                # circular functions are where that surfaces as a bare
                # ValueError, so flag it as the domain failure it is
                if not math.isfinite(v):
                    raise DomainError(f"{node.op} of a non-finite value",
                                      node, point)
                s, c = math.sin(v), math.cos(v)
                if node.op == "sin":
                    return s, c * dx, c * dy
                return c, -s * dx, -s * dy
            if node.op == "sqrt":
                if v < 0:
                    raise DomainError("sqrt of a negative value", node, point)
                w = math.sqrt(v)
                if w == 0.0 and (dx != 0.0 or dy != 0.0):
                    raise DomainError("sqrt derivative singular at zero", node, point)
                ddx = dx / (2.0 * w) if dx != 0.0 else 0.0
                ddy = dy / (2.0 * w) if dy != 0.0 else 0.0
                return w, ddx, ddy
        if isinstance(node, Binary):
            if node.op == "powi":
                n = powi_exponent(node)
                v, dx, dy = rec(node.left)
                if n == 0:
                    return 1.0, 0.0, 0.0
                w = v ** n
                g = n * v ** (n - 1)
                return w, g * dx, g * dy
            a, adx, ady = rec(node.left)
            b, bdx, bdy = rec(node.right)
            if node.op == "add":
                return a + b, adx + bdx, ady + bdy
            if node.op == "sub":
                return a - b, adx - bdx, ady - bdy
            if node.op == "mul":
                return a * b, a * bdx + b * adx, a * bdy + b * ady
            if node.op == "div":
                if b == 0.0:
                    raise DomainError("division by zero", node, point)
                w = a / b
                return w, (adx - w * bdx) / b, (ady - w * bdy) / b
        raise TypeError(f"not an expression node: {node!r}")

    v, dx, dy = rec(e)
    return Jet1(v, dx, dy)


def eval_value(e: Expr, x: float, y: float) -> float:
    return eval_jet(e, (x, y)).value


# ===== Compiled jets ===== #


def _codegen(exprs: tuple[Expr, ...]) -> str:
    """Straight-line source computing (value, dx, dy) for each tree.

    Shared subtrees are emitted once (structural memoisation), and
    derivative terms that are identically zero or one fold away at the
    string level, which keeps the generated code close to what one would
    write by hand.
    """
    lines: list[str] = []
    memo: dict[Expr, tuple[str, str, str]] = {}
    counter = [0]

    def tmp(rhs: str) -> str:
        name = f"t{counter[0]}"
        counter[0] += 1
        lines.append(f"    {name} = {rhs}")
        return name

    def add_s(a: str, b: str) -> str:
        if a == "0.0":
            return b
        if b == "0.0":
            return a
        return tmp(f"{a} + {b}")

    def sub_s(a: str, b: str) -> str:
        if b == "0.0":
            return a
        if a == "0.0":
            return neg_s(b)
        return tmp(f"{a} - {b}")

    def neg_s(a: str) -> str:
        if a == "0.0":
            return "0.0"
        return tmp(f"-{a}")

    def mul_s(a: str, b: str) -> str:
        if a == "0.0" or b == "0.0":
            return "0.0"
        if a == "1.0":
            return b
        if b == "1.0":
            return a
        return tmp(f"{a}*{b}")

    def div_s(a: str, b: str) -> str:
        if a == "0.0":
            return "0.0"
        return tmp(f"{a}/{b}")

    def rec(node: Expr) -> tuple[str, str, str]:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Constant):
            out = (repr(float(node.value)), "0.0", "0.0")
        elif isinstance(node, Variable):
            out = ("x", "1.0", "0.0") if node.name == "x" else ("y", "0.0", "1.0")
        elif isinstance(node, Unary):
            v, dx, dy = rec(node.child)
            if node.op == "neg":
                out = (neg_s(v), neg_s(dx), neg_s(dy))
            elif node.op == "exp":
                w = tmp(f"exp({v})")
                out = (w, mul_s(w, dx), mul_s(w, dy))
            elif node.op == "sin":
                s = tmp(f"sin({v})")
                if dx == "0.0" and dy == "0.0":
                    out = (s, "0.0", "0.0")
                else:
                    c = tmp(f"cos({v})")
                    out = (s, mul_s(c, dx), mul_s(c, dy))
            elif node.op == "cos":
                c = tmp(f"cos({v})")
                if dx == "0.0" and dy == "0.0":
                    out = (c, "0.0", "0.0")
                else:
                    s = tmp(f"sin({v})")
                    out = (c, neg_s(mul_s(s, dx)), neg_s(mul_s(s, dy)))
            elif node.op == "sqrt":
                w = tmp(f"sqrt({v})")
                if dx == "0.0" and dy == "0.0":
                    out = (w, "0.0", "0.0")
                else:
                    tw = tmp(f"2.0*{w}")
                    out = (w, div_s(dx, tw), div_s(dy, tw))
            else:
                raise TypeError(node.op)
        elif isinstance(node, Binary):
            if node.op == "powi":
                n = powi_exponent(node)
                v, dx, dy = rec(node.left)
                if n == 0:
                    out = ("1.0", "0.0", "0.0")
                elif n == 1:
                    out = (v, dx, dy)
                else:
                    # parens: a bare negative literal would otherwise bind
                    # as -(v**n)
                    w = tmp(f"({v})**{n}")
                    if dx == "0.0" and dy == "0.0":
                        out = (w, "0.0", "0.0")
                    else:
                        g = tmp(f"{float(n)!r}*({v})**{n - 1}" if n > 2 else f"{float(n)!r}*{v}")
                        out = (w, mul_s(g, dx), mul_s(g, dy))
            else:
                a, adx, ady = rec(node.left)
                b, bdx, bdy = rec(node.right)
                if node.op == "add":
                    out = (add_s(a, b), add_s(adx, bdx), add_s(ady, bdy))
                elif node.op == "sub":
                    out = (sub_s(a, b), sub_s(adx, bdx), sub_s(ady, bdy))
                elif node.op == "mul":
                    out = (mul_s(a, b), add_s(mul_s(a, bdx), mul_s(b, adx)),
                           add_s(mul_s(a, bdy), mul_s(b, ady)))
                elif node.op == "div":
                    w = div_s(a, b)
                    out = (w,
                           div_s(sub_s(adx, mul_s(w, bdx)), b),
                           div_s(sub_s(ady, mul_s(w, bdy)), b))
                else:
                    raise TypeError(node.op)
        else:
            raise TypeError(f"not an expression node: {node!r}")
        memo[node] = out
        return out

    results = [rec(e) for e in exprs]
    ret = ", ".join(", ".join(triple) for triple in results)
    header = "def _jet(x, y):\n"
    return header + "\n".join(lines) + f"\n    return {ret}\n"


@lru_cache(maxsize=256)
def compile_jet_pair(f1: Expr, f2: Expr):
    """Compiled ``(x, y) -> (v1, dx1, dy1, v2, dx2, dy2)``.

    The generated code raises the raw arithmetic exceptions
    (``ValueError``/``ZeroDivisionError``/``OverflowError``); callers that
    need a located :class:`DomainError` should re-run :func:`eval_jet`.
    """
    src = _codegen((f1, f2))
    namespace = {"exp": math.exp, "sin": math.sin, "cos": math.cos, "sqrt": math.sqrt}
    exec(compile(src, "<planarham-jet>", "exec"), namespace)
    return namespace["_jet"]


def located_domain_error(f1: Expr, f2: Expr, point: tuple[float, float]) -> DomainError:
    """Re-evaluate slowly to pin down which subexpression failed."""
    for tree in (f1, f2):
        try:
            eval_jet(tree, point)
        except DomainError as err:
            return err
        except OverflowError:
            continue  # the compiled and tree walks can hit errors in different order
    return DomainError("evaluation failed", f1, point)


# ===== numpy grid evaluation ===== #


def eval_grid(e: Expr, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorised values on arrays; ``nan`` where evaluation leaves the domain."""

    def rec(node: Expr):
        if isinstance(node, Constant):
            return np.full(np.broadcast(xs, ys).shape, node.value)
        if isinstance(node, Variable):
            arr = xs if node.name == "x" else ys
            return np.broadcast_to(arr, np.broadcast(xs, ys).shape).astype(float)
        if isinstance(node, Unary):
            v = rec(node.child)
            if node.op == "neg":
                return -v
            if node.op == "exp":
                return np.exp(v)
            if node.op == "sin":
                return np.sin(v)
            if node.op == "cos":
                return np.cos(v)
            if node.op == "sqrt":
                return np.where(v < 0, np.nan, np.sqrt(np.maximum(v, 0.0)))
        if isinstance(node, Binary):
            if node.op == "powi":
                return rec(node.left) ** powi_exponent(node)
            a, b = rec(node.left), rec(node.right)
            if node.op == "add":
                return a + b
            if node.op == "sub":
                return a - b
            if node.op == "mul":
                return a * b
            if node.op == "div":
                with np.errstate(divide="ignore", invalid="ignore"):
                    return np.where(b == 0, np.nan, a / np.where(b == 0, 1.0, b))
        raise TypeError(f"not an expression node: {node!r}")

    with np.errstate(all="ignore"):
        out = rec(e)
    return np.asarray(out, dtype=float)


# ===== Polynomials ===== #


@dataclass(frozen=True)
class Poly2:
    """Bivariate polynomial in canonical form.

    ``terms`` is a tuple of ``(coeff, i, j)`` for monomials ``x^i y^j``,
    sorted by ``(i, j)`` with zero coefficients dropped, so structural
    equality is decidable and hashing works.
    """

    terms: tuple[tuple[float, int, int], ...]

    @staticmethod
    def from_dict(d: dict[tuple[int, int], float]) -> "Poly2":
        items = tuple(sorted(((float(c), i, j) for (i, j), c in d.items() if c != 0.0),
                             key=lambda t: (t[1], t[2])))
        return Poly2(items)

    @staticmethod
    def zero() -> "Poly2":
        return Poly2(())

    @staticmethod
    def const(c: float) -> "Poly2":
        return Poly2.from_dict({(0, 0): c})

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {(i, j): c for c, i, j in self.terms}

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(i + j for _, i, j in self.terms)

    def top_form(self) -> "Poly2":
        d = self.degree()
        return Poly2.from_dict({(i, j): c for c, i, j in self.terms if i + j == d})

    def __add__(self, other: "Poly2") -> "Poly2":
        d = self.as_dict()
        for c, i, j in other.terms:
            d[(i, j)] = d.get((i, j), 0.0) + c
        return Poly2.from_dict(d)

    def __sub__(self, other: "Poly2") -> "Poly2":
        d = self.as_dict()
        for c, i, j in other.terms:
            d[(i, j)] = d.get((i, j), 0.0) - c
        return Poly2.from_dict(d)

    def __neg__(self) -> "Poly2":
        return Poly2(tuple((-c, i, j) for c, i, j in self.terms))

    def __mul__(self, other: "Poly2") -> "Poly2":
        d: dict[tuple[int, int], float] = {}
        for c1, i1, j1 in self.terms:
            for c2, i2, j2 in other.terms:
                key = (i1 + i2, j1 + j2)
                d[key] = d.get(key, 0.0) + c1 * c2
        return Poly2.from_dict(d)

    def scale(self, a: float) -> "Poly2":
        return Poly2.from_dict({(i, j): a * c for c, i, j in self.terms})

    def pow_int(self, n: int) -> "Poly2":
        if n < 0:
            raise ValueError("negative exponent")
        out = Poly2.const(1.0)
        for _ in range(n):
            out = out * self
        return out

    def dx(self) -> "Poly2":
        return Poly2.from_dict({(i - 1, j): c * i for c, i, j in self.terms if i > 0})

    def dy(self) -> "Poly2":
        return Poly2.from_dict({(i, j - 1): c * j for c, i, j in self.terms if j > 0})

    def eval(self, x, y):
        """Evaluate at scalars or numpy arrays."""
        out = 0.0
        for c, i, j in self.terms:
            out = out + c * x ** i * y ** j
        return out

    def to_expr(self) -> Expr:
        """Expression tree with the same canonical term order."""
        node: Expr | None = None
        for c, i, j in self.terms:
            mono: Expr = Constant(c)
            if i:
                mono = Binary("mul", mono, powi(X, i) if i > 1 else X)
            if j:
                mono = Binary("mul", mono, powi(Y, j) if j > 1 else Y)
            node = mono if node is None else Binary("add", node, mono)
        return node if node is not None else Constant(0.0)


def compile_poly_pair(p: Poly2, q: Poly2):
    """Compiled ``(x, y) -> (p(x,y), q(x,y))`` for polynomial planar fields."""
    jet = compile_jet_pair(p.to_expr(), q.to_expr())

    def pair(x: float, y: float) -> tuple[float, float]:
        v1, _, _, v2, _, _ = jet(x, y)
        return v1, v2

    return pair


def to_poly(e: Expr) -> Poly2 | None:
    """Exact polynomial form, or ``None`` for trees that are not
    structurally polynomial (division and the transcendental unaries make
    it fail; no symbolic simplification is attempted)."""
    if isinstance(e, Constant):
        return Poly2.const(e.value)
    if isinstance(e, Variable):
        return Poly2.from_dict({(1, 0) if e.name == "x" else (0, 1): 1.0})
    if isinstance(e, Unary):
        if e.op != "neg":
            return None
        inner = to_poly(e.child)
        return None if inner is None else -inner
    if isinstance(e, Binary):
        if e.op == "div":
            return None
        if e.op == "powi":
            base = to_poly(e.left)
            return None if base is None else base.pow_int(powi_exponent(e))
        a = to_poly(e.left)
        b = to_poly(e.right)
        if a is None or b is None:
            return None
        if e.op == "add":
            return a + b
        if e.op == "sub":
            return a - b
        if e.op == "mul":
            return a * b
    raise TypeError(f"not an expression node: {e!r}")
