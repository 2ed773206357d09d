"""
===============================================================================
Module: expr.py
Purpose:
    Parse Lagrangian strings L(t, u, v, w) and evaluate them together with their
    exact first and second partial derivatives in (u, v, w).

-------------------------------------------------------------------------------
Grammar
-------------------------------------------------------------------------------
    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?           # right associative, binds tighter than "-"
    atom    := number | variable | name "(" expr ")" | "(" expr ")"

    number     decimal literal with optional exponent: 2, 0.5, .5, 1e-3, 2.5E+2
    variable   t, u, v, w  (t is passive: never differentiated)
    name       sin, cos, exp, log, sqrt, abs

-------------------------------------------------------------------------------
Evaluation
-------------------------------------------------------------------------------
    eval_jet_batch() walks the tree once per call, carrying for every grid point
    the value, the gradient (3 entries) and the upper Hessian triangle
    (uu, uv, uw, vv, vw, ww). Integer exponents work for any base; other
    exponents need a positive base. abs uses the subgradient 0 at 0.
===============================================================================
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from logs.logging_setup import get_logger

LOG = get_logger(
    "expr",
    file_name="fracvar.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)

VARIABLES = ("t", "u", "v", "w")
ACTIVE = {"u": 0, "v": 1, "w": 2}
FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")
# (p, q) -> slot in the stored upper triangle
HESS_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, position: int, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(f"{message} at position {position}" + (f": {source!r}" if source else ""))


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class ArityError(ExpressionSyntaxError):
    pass


class ExpressionDomainError(ArithmeticError):
    def __init__(self, message: str, subexpression: str, index: int):
        self.subexpression = subexpression
        self.index = index
        super().__init__(f"{message} in '{subexpression}' (point #{index})")


# ------------ AST ------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
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


Node = Union[Num, Var, Neg, BinOp, Call]


# ------------ tokenizer ------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[a-z]+)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str    # "num" | "name" | "op" | "end"
    text: str
    pos: int


def tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(src, pos)
        if not m or m.end() == pos:
            bad = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {src[bad]!r}", bad, src)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", len(src)))
    return tokens


# ------------ parser ------------

class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.take()
        if tok.text != text or tok.kind != "op":
            raise ExpressionSyntaxError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos, self.src)
        return tok

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.pos, self.src)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.take()
        if tok.kind == "num":
            value = float(tok.text)
            if not np.isfinite(value):
                raise ExpressionSyntaxError(f"numeric literal {tok.text!r} is not finite", tok.pos, self.src)
            return Num(value)
        if tok.kind == "name":
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                return self.call(tok)
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.pos, self.src)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.pos, self.src)

    def call(self, name_tok: _Token) -> Node:
        self.expect("(")
        if self.peek().kind == "op" and self.peek().text == ")":
            raise ArityError(f"{name_tok.text}() takes exactly 1 argument, got 0", name_tok.pos, self.src)
        args = [self.expr()]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            raise ArityError(
                f"{name_tok.text}() takes exactly 1 argument, got {len(args)}", name_tok.pos, self.src
            )
        return Call(name_tok.text, args[0])


def parse(src: str) -> Node:
    return _Parser(src).parse()


# ------------ printer ------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def to_source(node: Node) -> str:
    """Print with the minimal parentheses that re-parse to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        return f"-({inner})" if _prec(node.operand) < 3 else f"-{inner}"
    p = _PREC[node.op]
    left = to_source(node.left)
    right = to_source(node.right)
    if node.op == "^":
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def free_variables(node: Node) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Num):
        return frozenset()
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, Call):
        return free_variables(node.arg)
    return free_variables(node.left) | free_variables(node.right)


# ------------ jets ------------

@dataclass(frozen=True)
class LagrangianJet:
    value: float
    grad: tuple[float, float, float]                             # L_u, L_v, L_w
    hess: tuple[float, float, float, float, float, float]        # uu, uv, uw, vv, vw, ww


@dataclass(frozen=True, eq=False)
class JetBatch:
    value: np.ndarray     # (n,)
    grad: np.ndarray      # (3, n)
    hess: np.ndarray      # (6, n)

    @property
    def L_u(self) -> np.ndarray:
        return self.grad[0]

    @property
    def L_v(self) -> np.ndarray:
        return self.grad[1]

    @property
    def L_w(self) -> np.ndarray:
        return self.grad[2]

    def second(self, p: str, q: str) -> np.ndarray:
        key = tuple(sorted((ACTIVE[p], ACTIVE[q])))
        return self.hess[HESS_PAIRS.index(key)]


def _const(c, n: int) -> JetBatch:
    return JetBatch(np.broadcast_to(np.asarray(c, dtype=float), (n,)).copy(), np.zeros((3, n)), np.zeros((6, n)))


def _outer(ga: np.ndarray, gb: np.ndarray) -> np.ndarray:
    """Symmetrised ga ⊗ gb + gb ⊗ ga on the stored triangle."""
    return np.stack([ga[p] * gb[q] + ga[q] * gb[p] for p, q in HESS_PAIRS])


def _chain(x: JetBatch, f0: np.ndarray, f1: np.ndarray, f2: np.ndarray) -> JetBatch:
    return JetBatch(f0, f1 * x.grad, f1 * x.hess + 0.5 * f2 * _outer(x.grad, x.grad))


def _mul(a: JetBatch, b: JetBatch) -> JetBatch:
    return JetBatch(
        a.value * b.value,
        a.grad * b.value + b.grad * a.value,
        a.hess * b.value + b.hess * a.value + _outer(a.grad, b.grad),
    )


def _first_bad(mask: np.ndarray) -> int:
    return int(np.flatnonzero(mask)[0])


def _recip(x: JetBatch, node: Node) -> JetBatch:
    bad = x.value == 0
    if bad.any():
        raise ExpressionDomainError("division by zero", to_source(node), _first_bad(bad))
    inv = 1.0 / x.value
    return _chain(x, inv, -inv * inv, 2.0 * inv * inv * inv)


def _is_constant(j: JetBatch) -> bool:
    return not j.grad.any() and not j.hess.any()


def _power(a: JetBatch, b: JetBatch, node: BinOp) -> JetBatch:
    x = a.value
    if _is_constant(b):
        p = b.value
        integral = p == np.round(p)
        bad = (~integral) & (x <= 0)
        if bad.any():
            raise ExpressionDomainError("non-integer power of a nonpositive base", to_source(node), _first_bad(bad))
        zero_neg = (x == 0) & (p < 0)
        if zero_neg.any():
            raise ExpressionDomainError("division by zero", to_source(node), _first_bad(zero_neg))
        with np.errstate(divide="ignore", invalid="ignore"):
            f0 = np.power(x, p)
            f1 = np.where(p == 0, 0.0, p * np.power(x, p - 1))
            f2 = np.where((p == 0) | (p == 1), 0.0, p * (p - 1) * np.power(x, p - 2))
        return _chain(a, f0, f1, f2)
    bad = x <= 0
    if bad.any():
        raise ExpressionDomainError("variable exponent needs a positive base", to_source(node), _first_bad(bad))
    log_a = _chain(a, np.log(x), 1.0 / x, -1.0 / (x * x))
    e = _mul(b, log_a)
    ev = np.exp(e.value)
    return _chain(e, ev, ev, ev)


def _call(name: str, x: JetBatch, node: Call) -> JetBatch:
    v = x.value
    if name == "sin":
        s, c = np.sin(v), np.cos(v)
        return _chain(x, s, c, -s)
    if name == "cos":
        s, c = np.sin(v), np.cos(v)
        return _chain(x, c, -s, -c)
    if name == "exp":
        e = np.exp(v)
        return _chain(x, e, e, e)
    if name == "log":
        bad = v <= 0
        if bad.any():
            raise ExpressionDomainError("log of a nonpositive value", to_source(node), _first_bad(bad))
        return _chain(x, np.log(v), 1.0 / v, -1.0 / (v * v))
    if name == "sqrt":
        bad = v <= 0
        if bad.any():
            raise ExpressionDomainError("sqrt needs a positive argument", to_source(node), _first_bad(bad))
        r = np.sqrt(v)
        return _chain(x, r, 0.5 / r, -0.25 / (r * v))
    if name == "abs":
        kink = v == 0
        if kink.any():
            LOG.warning(f"[expr] abs evaluated at its kink in '{to_source(node)}' (point #{_first_bad(kink)}); using 0")
        return _chain(x, np.abs(v), np.sign(v), np.zeros_like(v))
    raise UnknownIdentifierError(f"unknown function {name!r}", 0, to_source(node))


def _eval(node: Node, env: dict[str, np.ndarray], n: int) -> JetBatch:
    if isinstance(node, Num):
        return _const(node.value, n)
    if isinstance(node, Var):
        if node.name == "t":
            return _const(env["t"], n)
        j = _const(env[node.name], n)
        j.grad[ACTIVE[node.name]] = 1.0
        return j
    if isinstance(node, Neg):
        x = _eval(node.operand, env, n)
        return JetBatch(-x.value, -x.grad, -x.hess)
    if isinstance(node, Call):
        return _call(node.func, _eval(node.arg, env, n), node)

    a = _eval(node.left, env, n)
    b = _eval(node.right, env, n)
    if node.op == "+":
        return JetBatch(a.value + b.value, a.grad + b.grad, a.hess + b.hess)
    if node.op == "-":
        return JetBatch(a.value - b.value, a.grad - b.grad, a.hess - b.hess)
    if node.op == "*":
        return _mul(a, b)
    if node.op == "/":
        return _mul(a, _recip(b, node.right))
    return _power(a, b, node)


def eval_jet_batch(ast: Node, t, u, v, w) -> JetBatch:
    """Evaluate L and its (u, v, w) derivatives at every point of the broadcast inputs."""
    arrays = np.broadcast_arrays(*(np.atleast_1d(np.asarray(x, dtype=float)) for x in (t, u, v, w)))
    n = arrays[0].shape[0]
    env = dict(zip(VARIABLES, arrays))
    jet = _eval(ast, env, n)
    finite = np.isfinite(jet.value) & np.isfinite(jet.grad).all(axis=0) & np.isfinite(jet.hess).all(axis=0)
    if not finite.all():
        raise ExpressionDomainError("non-finite value or derivative", to_source(ast), _first_bad(~finite))
    return jet


def eval_jet(ast: Node, t: float, u: float, v: float, w: float) -> LagrangianJet:
    jet = eval_jet_batch(ast, t, u, v, w)
    return LagrangianJet(
        float(jet.value[0]),
        tuple(float(g) for g in jet.grad[:, 0]),
        tuple(float(hh) for hh in jet.hess[:, 0]),
    )
