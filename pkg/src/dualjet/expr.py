"""Small expression language for scalar fields on the dual bundle.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | factor
    factor := atom ('^' int)?
    atom   := number | ident | func '(' expr ')' | '(' expr ')'

Identifiers are ``x<i>``, ``y<a>_<i>`` and ``p<i>`` (1-based); functions are
sqrt, exp, log, sin, cos.  Unary minus is a convenience on top of the core
grammar.
"""

import re
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import taylor

FUNCS = ("sqrt", "exp", "log", "sin", "cos")


class ExprError(ValueError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.message = message


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifier(ExprError):
    pass


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    block: str  # 'x', 'y' or 'p'
    alpha: int  # jet order for y, 0 otherwise
    index: int  # 1-based component


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)

_IDENT = re.compile(r"^(?:x(\d+)|p(\d+)|y(\d+)_(\d+))$")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src):
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", line, col)
        text = m.group(0)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    toks.append(_Tok("end", "", line, col))
    return toks


class _Parser:
    def __init__(self, src):
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.peek()
        if t.text != text:
            got = "end of input" if t.kind == "end" else repr(t.text)
            raise ExprSyntaxError(f"expected {text!r}, got {got}", t.line, t.col)
        return self.take()

    def parse(self):
        if self.peek().kind == "end":
            t = self.peek()
            raise ExprSyntaxError("empty expression", t.line, t.col)
        node = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ExprSyntaxError(f"unexpected {t.text!r}", t.line, t.col)
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek().text == "-":
            self.take()
            return Neg(self.unary())
        return self.factor()

    def factor(self):
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            t = self.take()
            if t.kind != "num" or not t.text.isdigit():
                got = "end of input" if t.kind == "end" else repr(t.text)
                raise ExprSyntaxError(f"exponent must be an integer literal, got {got}", t.line, t.col)
            return Pow(base, int(t.text))
        return base

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return Num(float(t.text))
        if t.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "ident":
            if t.text in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            m = _IDENT.match(t.text)
            if m is None:
                raise UnknownIdentifier(f"unknown identifier {t.text!r}", t.line, t.col)
            if m.group(1):
                var = Var("x", 0, int(m.group(1)))
            elif m.group(2):
                var = Var("p", 0, int(m.group(2)))
            else:
                var = Var("y", int(m.group(3)), int(m.group(4)))
            if var.index < 1 or (var.block == "y" and var.alpha < 1):
                raise UnknownIdentifier(f"indices are 1-based in {t.text!r}", t.line, t.col)
            return var
        got = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {got}", t.line, t.col)


# -- printer -----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node):
    if isinstance(node, Bin):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def _fmt_num(v):
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def to_string(node):
    if isinstance(node, Num):
        s = _fmt_num(node.value)
        return f"({s})" if node.value < 0 else s
    if isinstance(node, Var):
        if node.block == "y":
            return f"y{node.alpha}_{node.index}"
        return f"{node.block}{node.index}"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    if isinstance(node, Pow):
        b = to_string(node.base)
        if _prec(node.base) < 5:
            b = f"({b})"
        return f"{b}^{node.exponent}"
    if isinstance(node, Neg):
        a = to_string(node.arg)
        if _prec(node.arg) < 3:
            a = f"({a})"
        return f"-{a}"
    if isinstance(node, Bin):
        p = _PREC[node.op]
        left = to_string(node.left)
        if _prec(node.left) < p:
            left = f"({left})"
        right = to_string(node.right)
        if _prec(node.right) <= p:
            right = f"({right})"
        sep = f" {node.op} " if p == 1 else node.op
        return f"{left}{sep}{right}"
    raise TypeError(f"not an expression node: {node!r}")


# -- evaluation ----------------------------------------------------------------

_FUNC_IMPL = {
    "sqrt": taylor.sqrt,
    "exp": taylor.exp,
    "log": taylor.log,
    "sin": taylor.sin,
    "cos": taylor.cos,
}


def _eval(node, x, ys, p):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.block == "x":
            return x[node.index - 1]
        if node.block == "p":
            return p[node.index - 1]
        return ys[node.alpha - 1][node.index - 1]
    if isinstance(node, Bin):
        a = _eval(node.left, x, ys, p)
        b = _eval(node.right, x, ys, p)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if not taylor.is_jet(b) and b == 0:
            raise taylor.DomainError("division by zero")
        return a / b
    if isinstance(node, Neg):
        return -_eval(node.arg, x, ys, p)
    if isinstance(node, Pow):
        return taylor.ipow(_eval(node.base, x, ys, p), node.exponent)
    if isinstance(node, Call):
        return _FUNC_IMPL[node.func](_eval(node.arg, x, ys, p))
    raise TypeError(f"not an expression node: {node!r}")


def _walk(node):
    yield node
    for attr in ("arg", "left", "right", "base"):
        child = getattr(node, attr, None)
        if child is not None:
            yield from _walk(child)


class Expr:
    """Parsed expression with a canonical text form."""

    def __init__(self, root, source=None):
        self.root = root
        self.source = source

    def __eq__(self, other):
        return isinstance(other, Expr) and self.root == other.root

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"Expr({self.to_string()!r})"

    def to_string(self):
        return to_string(self.root)

    __str__ = to_string

    def variables(self):
        return sorted({n for n in _walk(self.root) if isinstance(n, Var)},
                      key=lambda v: (v.block, v.alpha, v.index))

    def check_shape(self, n, k):
        for v in self.variables():
            if v.index > n:
                raise UnknownIdentifier(f"component {to_string(v)} exceeds n = {n}")
            if v.block == "y" and v.alpha > k - 1:
                raise UnknownIdentifier(f"jet order of {to_string(v)} exceeds k - 1 = {k - 1}")

    def evaluate(self, x, ys=(), p=()):
        out = _eval(self.root, x, ys, p)
        if not taylor.is_jet(out):
            out = float(np.asarray(out))
        return out


def parse_expr(src):
    """Parse ``src`` into an :class:`Expr`."""
    if not isinstance(src, str) or not src.strip():
        raise ExprSyntaxError("empty expression", 1, 1)
    return Expr(_Parser(src).parse(), src)
