"""Surface syntax for differential equations: tokenizer, AST, parser, printer.

Grammar (whitespace-insensitive)::

    equation := expr ("=" expr)?
    expr     := term (("+"|"-") term)*
    term     := factor (("*"|"/") factor)*
    factor   := "-" factor | base ("^" exponent)?
    exponent := integer | "(" "-"? integer ("/" integer)? ")"
    base     := number | name | "(" expr ")" | "sqrt(" expr ")"
              | "root(" expr "," integer ")" | deriv
    deriv    := unknown "'"* | "diff(" unknown ("," name ("$" integer)?)+ ")"

The printer emits text that reparses to a structurally identical tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction


class ParseError(SyntaxError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownSymbol(ParseError):
    pass


@dataclass(frozen=True)
class Declarations:
    """Names of independent variables, unknown functions and parameters."""

    variables: tuple = ("x",)
    unknowns: tuple = ("y",)
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "unknowns", tuple(self.unknowns))
        object.__setattr__(self, "params", tuple(self.params))
        names = list(self.variables) + list(self.unknowns) + list(self.params)
        if len(names) != len(set(names)):
            raise ValueError("variable, unknown and parameter names must be distinct")
        bad = [n for n in names if n in RESERVED or not NAME_RE.fullmatch(n)]
        if bad:
            raise ValueError(f"invalid or reserved names: {bad}")
        if not self.variables:
            raise ValueError("at least one independent variable is required")


RESERVED = {"sqrt", "root", "diff"}
NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


# ---------------------------------------------------------------------------
# AST


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: int


@dataclass(frozen=True)
class Sym(Expr):
    name: str
    kind: str  # "var" or "param"


@dataclass(frozen=True)
class Deriv(Expr):
    unknown: int
    index: tuple  # sorted variable indices, () for the unknown itself


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


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
    exp: Fraction


@dataclass(frozen=True)
class Sqrt(Expr):
    arg: Expr


@dataclass(frozen=True)
class Root(Expr):
    arg: Expr
    k: int


@dataclass(frozen=True)
class Equation:
    lhs: Expr
    rhs: Expr | None = None

    def as_expr(self) -> Expr:
        return self.lhs if self.rhs is None else Sub(self.lhs, self.rhs)


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


@dataclass
class Token:
    kind: str  # num, name, op, end
    text: str
    pos: int


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m.group(0).strip() == "":
            break
        if m.group(1):
            tokens.append(Token("num", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(Token("name", m.group(2), m.start(2)))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()=,'$":
                raise ParseError(f"unexpected character {ch!r}", m.start(3))
            tokens.append(Token("op", ch, m.start(3)))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text, decl: Declarations):
        self.text = text
        self.decl = decl
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.text != text or t.kind == "end":
            what = "end of input" if t.kind == "end" else repr(t.text)
            raise ParseError(f"expected {text!r}, found {what}", t.pos)
        return self.advance()

    def fail(self, msg=None):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(msg or f"unexpected {what}", t.pos)

    def equation(self):
        lhs = self.expr()
        rhs = None
        if self.tok.text == "=" and self.tok.kind == "op":
            self.advance()
            rhs = self.expr()
        if self.tok.kind != "end":
            self.fail()
        return Equation(lhs, rhs)

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            right = self.term()
            node = Add(node, right) if op == "+" else Sub(node, right)
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            right = self.factor()
            node = Mul(node, right) if op == "*" else Div(node, right)
        return node

    def factor(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.factor())
        node = self.base()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            node = Pow(node, self.exponent())
        return node

    def integer(self):
        if self.tok.kind != "num":
            self.fail("expected an integer")
        return int(self.advance().text)

    def exponent(self):
        if self.tok.kind == "num":
            return Fraction(self.integer())
        self.expect("(")
        sign = 1
        if self.tok.text == "-" and self.tok.kind == "op":
            self.advance()
            sign = -1
        p = self.integer()
        q = 1
        if self.tok.text == "/" and self.tok.kind == "op":
            self.advance()
            pos = self.tok.pos
            q = self.integer()
            if q == 0:
                raise ParseError("zero denominator in exponent", pos)
        self.expect(")")
        return Fraction(sign * p, q)

    def base(self):
        t = self.tok
        if t.kind == "num":
            return Num(self.integer())
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "name":
            name = t.text
            if name == "sqrt":
                self.advance()
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Sqrt(arg)
            if name == "root":
                self.advance()
                self.expect("(")
                arg = self.expr()
                self.expect(",")
                pos = self.tok.pos
                k = self.integer()
                if k < 2:
                    raise ParseError("root index must be at least 2", pos)
                self.expect(")")
                return Root(arg, k)
            if name == "diff":
                return self.diff()
            if name in self.decl.unknowns:
                self.advance()
                order = 0
                while self.tok.kind == "op" and self.tok.text == "'":
                    self.advance()
                    order += 1
                if order and len(self.decl.variables) != 1:
                    raise ParseError("primes are only allowed for ordinary equations", t.pos)
                return Deriv(self.decl.unknowns.index(name), (0,) * order)
            if name in self.decl.variables:
                self.advance()
                return Sym(name, "var")
            if name in self.decl.params:
                self.advance()
                return Sym(name, "param")
            raise UnknownSymbol(f"undeclared name {name!r}", t.pos)
        self.fail()

    def diff(self):
        self.advance()
        self.expect("(")
        t = self.tok
        if t.kind != "name" or t.text not in self.decl.unknowns:
            if t.kind == "name":
                raise UnknownSymbol(f"{t.text!r} is not a declared unknown", t.pos)
            self.fail("expected an unknown function")
        unknown = self.decl.unknowns.index(self.advance().text)
        index = []
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            v = self.tok
            if v.kind != "name" or v.text not in self.decl.variables:
                if v.kind == "name":
                    raise UnknownSymbol(f"{v.text!r} is not an independent variable", v.pos)
                self.fail("expected a variable name")
            self.advance()
            times = 1
            if self.tok.kind == "op" and self.tok.text == "$":
                self.advance()
                times = self.integer()
            index += [self.decl.variables.index(v.text)] * times
        if not index:
            self.fail("diff needs at least one variable")
        self.expect(")")
        return Deriv(unknown, tuple(sorted(index)))


def parse_equation(text: str, decl: Declarations) -> Equation:
    """Parse ``lhs = rhs`` (or a bare ``lhs``, meaning ``= 0``)."""
    return _Parser(text, decl).equation()


def parse_expr(text: str, decl: Declarations) -> Expr:
    """Parse a single expression (no ``=``); used for substitutions."""
    p = _Parser(text, decl)
    node = p.expr()
    if p.tok.kind != "end":
        p.fail()
    return node


# ---------------------------------------------------------------------------
# printer

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(node):
    return _PREC.get(type(node), 5)


def format_deriv(unknown_name, index, var_names):
    if not index:
        return unknown_name
    if len(var_names) == 1:
        k = len(index)
        if k <= 3:
            return unknown_name + "'" * k
        return f"diff({unknown_name}, {var_names[0]}${k})"
    return "diff(" + ", ".join([unknown_name] + [var_names[i] for i in index]) + ")"


def to_text(node, decl: Declarations) -> str:
    """Render an AST in the input grammar."""

    def wrap(child, min_prec):
        s = go(child)
        return f"({s})" if _prec(child) < min_prec else s

    def go(n):
        if isinstance(n, Num):
            return str(n.value)
        if isinstance(n, Sym):
            return n.name
        if isinstance(n, Deriv):
            return format_deriv(decl.unknowns[n.unknown], n.index, decl.variables)
        if isinstance(n, Neg):
            return "-" + wrap(n.arg, 3)
        if isinstance(n, (Add, Sub)):
            op = " + " if isinstance(n, Add) else " - "
            return wrap(n.left, 1) + op + wrap(n.right, 2)
        if isinstance(n, (Mul, Div)):
            op = "*" if isinstance(n, Mul) else "/"
            return wrap(n.left, 2) + op + wrap(n.right, 3)
        if isinstance(n, Pow):
            base = wrap(n.base, 5)
            if isinstance(n.base, Deriv) and n.base.index and len(decl.variables) == 1:
                base = f"({base})"
            e = n.exp
            if e.denominator == 1 and e >= 0:
                return f"{base}^{e.numerator}"
            return f"{base}^({e.numerator}/{e.denominator})" if e.denominator != 1 \
                else f"{base}^({e.numerator})"
        if isinstance(n, Sqrt):
            return f"sqrt({go(n.arg)})"
        if isinstance(n, Root):
            return f"root({go(n.arg)}, {n.k})"
        raise TypeError(f"not an expression node: {n!r}")

    if isinstance(node, Equation):
        s = go(node.lhs)
        return s if node.rhs is None else f"{s} = {go(node.rhs)}"
    return go(node)


def walk(node):
    """Pre-order traversal of an AST."""
    yield node
    for name in ("left", "right", "arg", "base"):
        child = getattr(node, name, None)
        if isinstance(child, Expr):
            yield from walk(child)


def count_radicals(node) -> int:
    n = 0
    for sub in walk(node):
        if isinstance(sub, (Sqrt, Root)):
            n += 1
        elif isinstance(sub, Pow) and sub.exp.denominator != 1:
            n += 1
    return n
