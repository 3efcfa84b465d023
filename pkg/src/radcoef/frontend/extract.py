"""From a parsed equation to (radical tower, differential polynomial).

Radicals are collected bottom-up: every ``sqrt``, ``root`` and rational
power becomes a tower step whose radicand is the normal form of its argument
over the steps found so far. The tower is then simplified and the
coefficients are rewritten over the simplified tower.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from ..kernel import VarRegistry, eval_numeric, fresh_names, substitute
from .expr import (Add, Deriv, Div, Equation, Mul, Neg, Num, Pow, Root, Sqrt, Sub,
                   Sym, count_radicals)
from .radicals import RadicalTower, radical_degree_check, simplify_radicals


class UnsupportedRadicand(ValueError):
    """A radical or fractional power is applied to an expression with jets."""


class NotPolynomial(ValueError):
    """The equation is not polynomial in the unknowns and their derivatives."""


# ---------------------------------------------------------------------------
# jets and differential polynomials


def jet_key(jet):
    unknown, index = jet
    return (len(index), unknown, index)


def jet_order(jet):
    return len(jet[1])


def _mono_mul(a, b):
    exps = dict(a)
    for j, e in b:
        exps[j] = exps.get(j, 0) + e
    return tuple(sorted(exps.items(), key=lambda t: jet_key(t[0])))


def monomial_degree(mono):
    return sum(e for _, e in mono)


def monomial_key(mono):
    """Sort key placing the canonical first monomial first.

    Higher total degree first; ties broken by the exponent vector read from
    the highest jet down.
    """
    ordered = sorted(mono, key=lambda t: jet_key(t[0]), reverse=True)
    vec = tuple((jet_key(j), e) for j, e in ordered)
    return (-monomial_degree(mono), _Desc(vec))


class _Desc:
    """Wrapper inverting comparison, for descending sub-keys."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return self.v > other.v

    def __eq__(self, other):
        return self.v == other.v


class DiffPoly:
    """Polynomial in jet variables with coefficients in a fraction field.

    ``terms`` maps a jet monomial, a sorted tuple of ``((unknown, index), exp)``
    pairs, to a nonzero coefficient. The empty monomial is the constant term.
    """

    __slots__ = ("field", "n_unknowns", "n_vars", "terms")

    def __init__(self, field, n_unknowns, n_vars, terms=None):
        self.field = field
        self.n_unknowns = n_unknowns
        self.n_vars = n_vars
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def constant(cls, field, n_unknowns, n_vars, c):
        return cls(field, n_unknowns, n_vars, {(): c})

    @classmethod
    def jet(cls, field, n_unknowns, n_vars, unknown, index):
        return cls(field, n_unknowns, n_vars, {(((unknown, tuple(index)), 1),): field.one})

    def _new(self, terms):
        return DiffPoly(self.field, self.n_unknowns, self.n_vars, terms)

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, self.field.zero) + c
        return self._new(out)

    def __neg__(self):
        return self._new({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, self.field.zero) + c1 * c2
        return self._new(out)

    def __pow__(self, k):
        result = self.constant(self.field, self.n_unknowns, self.n_vars, self.field.one)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, DiffPoly) and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"DiffPoly({self.sorted_terms()!r})"

    def map_coeffs(self, fn):
        return self._new({m: fn(c) for m, c in self.terms.items()})

    def is_constant(self):
        return all(m == () for m in self.terms)

    def constant_value(self):
        return self.terms.get((), self.field.zero)

    def jets(self):
        found = {j for m in self.terms for j, _ in m}
        return sorted(found, key=jet_key)

    @property
    def order(self):
        return max((jet_order(j) for j in self.jets()), default=0)

    def monomials(self):
        return sorted(self.terms, key=monomial_key)

    def sorted_terms(self):
        return [(m, self.terms[m]) for m in self.monomials()]

    def is_linear(self):
        return all(monomial_degree(m) <= 1 for m in self.terms)


# ---------------------------------------------------------------------------
# registry and extraction


def fresh_variable_names(decl, n=None):
    n = len(decl.variables) if n is None else n
    taken = set(decl.variables) | set(decl.unknowns) | set(decl.params)
    if n == 1 and "z" not in taken:
        return ["z"]
    return fresh_names("z", taken, n)


def radical_prefix(decl):
    taken = set(decl.variables) | set(decl.unknowns) | set(decl.params)
    for prefix in ("d", "delta", "_d"):
        if not any(n.startswith(prefix) and n[len(prefix):].isdigit() for n in taken):
            return prefix
    raise ValueError("declared names leave no prefix for radical symbols")


def build_registry(decl, n_radicals, n_aux=None):
    n = len(decl.variables)
    if n_aux is None:
        n_aux = n * max(n_radicals, 1) + 2
    return VarRegistry.build(
        params=decl.params,
        base=decl.variables,
        n_radicals=n_radicals,
        fresh=fresh_variable_names(decl),
        n_aux=n_aux,
        radical_prefix=radical_prefix(decl),
    )


class _Builder:
    def __init__(self, decl, registry):
        self.decl = decl
        self.registry = registry
        self.field = registry.field
        self.tower = RadicalTower(registry)
        self.nu = len(decl.unknowns)
        self.nv = len(decl.variables)

    def const(self, c):
        return DiffPoly.constant(self.field, self.nu, self.nv, c)

    def scalar(self, node, what):
        value = self.build(node)
        if not value.is_constant():
            raise UnsupportedRadicand(f"{what} contains the unknown or its derivatives")
        return value.constant_value()

    def radical(self, radicand, k):
        alpha = self.tower.reduce(radicand)
        if not alpha:
            return self.field.zero
        step = self.tower.find_step(k, alpha)
        if step is None:
            step = self.tower._append(k, alpha)
        return self.field.gens[step.symbol]

    def build(self, node):
        F = self.field
        if isinstance(node, Num):
            return self.const(F(node.value))
        if isinstance(node, Sym):
            return self.const(self.registry.var(node.name))
        if isinstance(node, Deriv):
            return DiffPoly.jet(F, self.nu, self.nv, node.unknown, node.index)
        if isinstance(node, Neg):
            return -self.build(node.arg)
        if isinstance(node, Add):
            return self.build(node.left) + self.build(node.right)
        if isinstance(node, Sub):
            return self.build(node.left) - self.build(node.right)
        if isinstance(node, Mul):
            return self.build(node.left) * self.build(node.right)
        if isinstance(node, Div):
            num = self.build(node.left)
            den = self.build(node.right)
            if not den.is_constant():
                raise NotPolynomial("division by an expression containing the unknown")
            c = den.constant_value()
            if not c:
                raise ZeroDivisionError("division by zero in the equation")
            inv = self.tower.inverse(c)
            return num.map_coeffs(lambda a: self.tower.reduce(a * inv))
        if isinstance(node, Sqrt):
            return self.const(self.radical(self.scalar(node.arg, "radicand"), 2))
        if isinstance(node, Root):
            return self.const(self.radical(self.scalar(node.arg, "radicand"), node.k))
        if isinstance(node, Pow):
            return self.power(node)
        raise TypeError(f"unexpected node {node!r}")

    def power(self, node):
        exp = node.exp
        if exp.denominator == 1 and exp >= 0:
            base = self.build(node.base)
            return (base ** int(exp)).map_coeffs(self.tower.reduce)
        if exp.denominator == 1:
            base = self.build(node.base)
            if not base.is_constant():
                raise NotPolynomial("negative power of an expression containing the unknown")
            c = base.constant_value()
            if not c:
                raise ZeroDivisionError("negative power of zero")
            return self.const(self.tower.inverse(self.tower.reduce(c ** (-int(exp)))))
        c = self.scalar(node.base, "base of a fractional power")
        d = self.radical(c, exp.denominator)
        if not d:
            if exp < 0:
                raise ZeroDivisionError("negative power of zero")
            return self.const(self.field.zero)
        p = abs(exp.numerator)
        value = self.tower.reduce(d ** p)
        if exp < 0:
            value = self.tower.inverse(value)
        return self.const(value)


def extract_tower(exprs, decl):
    """Tower and differential polynomials for one equation or a system.

    Returns ``(tower, polys, registry)``; ``polys`` has one entry per input.
    The registry holds exactly one radical symbol per tower step.
    """
    single = not isinstance(exprs, (list, tuple))
    if single:
        exprs = [exprs]
    exprs = [e.as_expr() if isinstance(e, Equation) else e for e in exprs]
    scratch = build_registry(decl, sum(count_radicals(e) for e in exprs), n_aux=0)
    b = _Builder(decl, scratch)
    raw = [b.build(e) for e in exprs]
    tower, rewrite = simplify_radicals(b.tower)
    radical_degree_check(tower)
    reduced = []
    for p in raw:
        if rewrite:
            p = p.map_coeffs(lambda c: tower.reduce(substitute(c, rewrite)))
        reduced.append(p)
    # drop steps no coefficient depends on, renumbering the rest
    used = set()
    for p in reduced:
        for c in p.terms.values():
            used.update(tower.radicals_in(c))
    for i in range(len(tower) - 1, -1, -1):
        if i in used:
            used.update(tower.radicals_in(tower.steps[i].radicand))
    keep = sorted(used)
    registry = build_registry(decl, len(keep))
    prefix = radical_prefix(decl)
    rename = {tower.steps[i].name: f"{prefix}{k + 1}" for k, i in enumerate(keep)}
    final = RadicalTower(registry)
    for i in keep:
        final._append(tower.steps[i].index, registry.transfer(tower.steps[i].radicand, rename))
    polys = [DiffPoly(registry.field, p.n_unknowns, p.n_vars,
                      {m: registry.transfer(c, rename) for m, c in p.terms.items()})
             for p in reduced]
    return final, (polys[0] if single else polys), registry


# ---------------------------------------------------------------------------
# numeric evaluation of the surface syntax (principal branches)


def eval_expr(node, decl, point, jets=None, ctx=None):
    """Evaluate an AST numerically with principal-branch radicals.

    ``point`` maps variable and parameter names to numbers; ``jets`` maps
    ``(unknown, index)`` to numbers.
    """
    ctx = ctx or mpmath.mp
    jets = jets or {}

    def num(v):
        if isinstance(v, Fraction):
            return ctx.mpf(v.numerator) / v.denominator
        return ctx.mpmathify(v)

    def go(n):
        if isinstance(n, Num):
            return ctx.mpf(n.value)
        if isinstance(n, Sym):
            return num(point[n.name])
        if isinstance(n, Deriv):
            return num(jets[(n.unknown, n.index)])
        if isinstance(n, Neg):
            return -go(n.arg)
        if isinstance(n, Add):
            return go(n.left) + go(n.right)
        if isinstance(n, Sub):
            return go(n.left) - go(n.right)
        if isinstance(n, Mul):
            return go(n.left) * go(n.right)
        if isinstance(n, Div):
            return go(n.left) / go(n.right)
        if isinstance(n, Sqrt):
            return ctx.sqrt(ctx.mpc(go(n.arg)))
        if isinstance(n, Root):
            return ctx.root(ctx.mpc(go(n.arg)), n.k)
        if isinstance(n, Pow):
            base = go(n.base)
            e = n.exp
            if e.denominator == 1:
                return base ** int(e)
            return ctx.root(ctx.mpc(base), e.denominator) ** e.numerator
        raise TypeError(f"unexpected node {n!r}")

    if isinstance(node, Equation):
        node = node.as_expr()
    return go(node)


def principal_radicals(tower, point, ctx=None):
    """Principal-branch numeric values of the tower generators at ``point``."""
    ctx = ctx or mpmath.mp
    values = dict(point)
    out = {}
    for s in tower.steps:
        a = eval_numeric(s.radicand, values, precision=ctx.prec)
        r = ctx.root(ctx.mpc(a), s.index)
        values[s.symbol] = r
        out[s.symbol] = r
    return out


def rational_value(node, registry):
    """Field element of a radical-free, jet-free expression."""
    F = registry.field

    def go(n):
        if isinstance(n, Num):
            return F(n.value)
        if isinstance(n, Sym):
            if n.name not in registry:
                raise KeyError(f"unknown name {n.name!r}")
            return registry.var(n.name)
        if isinstance(n, Neg):
            return -go(n.arg)
        if isinstance(n, Add):
            return go(n.left) + go(n.right)
        if isinstance(n, Sub):
            return go(n.left) - go(n.right)
        if isinstance(n, Mul):
            return go(n.left) * go(n.right)
        if isinstance(n, Div):
            den = go(n.right)
            if not den:
                raise ZeroDivisionError("division by zero")
            return go(n.left) / den
        if isinstance(n, Pow) and n.exp.denominator == 1:
            base = go(n.base)
            if n.exp < 0 and not base:
                raise ZeroDivisionError("negative power of zero")
            return base ** int(n.exp)
        raise ValueError("substitutions must be rational expressions without radicals "
                         "or derivatives")

    return go(node)


__all__ = ["DiffPoly", "UnsupportedRadicand", "NotPolynomial", "extract_tower", "rational_value",
           "build_registry", "fresh_variable_names", "eval_expr", "principal_radicals",
           "jet_key", "jet_order", "monomial_key", "monomial_degree"]
