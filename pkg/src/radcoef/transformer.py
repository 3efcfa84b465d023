"""Change of variables in differential equations and the end-to-end pipeline."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import gcd, lcm

from sympy import QQ, grlex
from sympy.polys.fields import FracField

from .frontend.expr import Declarations, parse_equation, parse_expr
from .frontend.extract import (DiffPoly, extract_tower, fresh_variable_names,
                               monomial_degree, rational_value)
from .frontend.printing import format_diffpoly, format_ratfunc
from .kernel import (differentiate, field_det, field_inverse, move_to_field,
                     ratfunc_root, substitute, to_fraction, variables_of)
from .parametrizer import (FOUND, NON_RATIONAL, NotProper, Parametrization,
                           invert_parametrization, parametrize_tower)
from .tower import tracing_index, verify_parametrization

log = logging.getLogger(__name__)

TRANSFORMED = "Transformed"
IMPOSSIBLE = "ProvenImpossible"
NO_ANSWER = "NoAnswer"


class SingularJacobian(ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# jet tables


def _sorted_add(index, i):
    return tuple(sorted(index + (i,)))


def multi_indices(n, order):
    """Sorted multi-indices over ``range(n)`` of total order ``<= order``."""
    out = [()]
    frontier = [()]
    for _ in range(order):
        nxt = []
        for idx in frontier:
            start = idx[-1] if idx else 0
            for i in range(start, n):
                nxt.append(idx + (i,))
        out += nxt
        frontier = nxt
    return out


@dataclass
class JetSubstitutionTable:
    """x-jets as linear forms in z-jets and the forward (z-jets in x-jets) map.

    ``inverse[alpha]`` and ``forward[beta]`` are dicts from multi-indices to
    rational functions of the fresh variables; the maps do not depend on the
    unknown and are applied to each unknown alike.
    """

    order: int
    n: int
    fresh: list
    jacobian: list
    inverse: dict
    forward: dict
    target: object = None  # field the caller works in; entries live in a smaller one

    @property
    def field(self):
        return self.jacobian[0][0].field

    def lift(self, f):
        if self.target is None or self.target is f.field:
            return f
        return move_to_field(f, self.target)

    def matrix(self):
        """Rows: x-jets, columns: z-jets, both in multi-index order."""
        idx = multi_indices(self.n, self.order)
        F = self.jacobian[0][0].field
        return [[self.inverse[a].get(b, F.zero) for b in idx] for a in idx]

    def compose(self):
        """Forward table with every x-jet replaced by its inverse image."""
        F = self.jacobian[0][0].field
        out = {}
        for beta, form in self.forward.items():
            acc = {}
            for alpha, c in form.items():
                for gamma, k in self.inverse[alpha].items():
                    acc[gamma] = acc.get(gamma, F.zero) + c * k
            out[beta] = {g: c for g, c in acc.items() if c}
        return out


def _total_derivative(form, j, fresh, shift):
    """``d/dz_j`` of ``sum c_alpha * J_alpha``; ``shift(alpha, j)`` gives the
    derivative of the jet itself as a linear form."""
    out = {}
    z = fresh[j]
    for alpha, c in form.items():
        dc = differentiate(c, z)
        if dc:
            out[alpha] = out.get(alpha, c.field.zero) + dc
        for beta, k in shift(alpha, j).items():
            out[beta] = out.get(beta, c.field.zero) + c * k
    return {a: c for a, c in out.items() if c}


def jet_substitution_table(rbar, fresh, order) -> JetSubstitutionTable:
    """x-jets up to ``order`` as linear forms in the z-jets of ``Y = y(rbar)``.

    The table is built in a fraction field over just the variables that
    occur in ``rbar`` (sympy's gcd cost grows with every extra generator);
    :meth:`JetSubstitutionTable.lift` maps entries back.
    """
    n = len(rbar)
    if len(fresh) != n:
        raise ValueError("need as many fresh variables as components")
    big = rbar[0].field
    used = set(fresh)
    for r in rbar:
        used |= variables_of(r)
    if len(used) < len(big.gens):
        names = [str(g) for g in big.ring.gens]
        small = FracField([names[i] for i in sorted(used)], QQ, grlex)
        pos = {names[i]: k for k, i in enumerate(sorted(used))}
        table = _jet_table([move_to_field(r, small) for r in rbar],
                           [pos[names[z]] for z in fresh], order)
        table.target = big
        return table
    return _jet_table(rbar, fresh, order)


def _jet_table(rbar, fresh, order):
    n = len(rbar)
    J = [[differentiate(r, z) for z in fresh] for r in rbar]
    if not field_det(J):
        raise SingularJacobian("Jacobian of the substitution vanishes identically")
    F = rbar[0].field
    JT = [[J[i][j] for i in range(n)] for j in range(n)]
    N = field_inverse(JT)  # grad_x y = N grad_z Y

    def z_shift(alpha, j):
        return {_sorted_add(alpha, j): F.one}

    inverse = {(): {(): F.one}}
    for alpha in multi_indices(n, order)[1:]:
        parent, i = alpha[:-1], alpha[-1]
        acc = {}
        for j in range(n):
            if not N[i][j]:
                continue
            part = _total_derivative(inverse[parent], j, fresh, z_shift)
            for b, c in part.items():
                acc[b] = acc.get(b, F.zero) + N[i][j] * c
        inverse[alpha] = {b: c for b, c in acc.items() if c}

    def x_shift(alpha, j):
        return {_sorted_add(alpha, i): J[i][j] for i in range(n) if J[i][j]}

    forward = {(): {(): F.one}}
    for beta in multi_indices(n, order)[1:]:
        parent, j = beta[:-1], beta[-1]
        forward[beta] = _total_derivative(forward[parent], j, fresh, x_shift)
    return JetSubstitutionTable(order, n, list(fresh), J, inverse, forward)


# ---------------------------------------------------------------------------
# transforming differential polynomials


def _bindings(tower, q):
    reg = tower.registry
    out = {}
    for name, comp in zip(reg.names_of("base"), q.x):
        out[reg.index[name]] = comp
    for step, comp in zip(tower.steps, q.d):
        if comp is not None:
            out[step.symbol] = comp
    return out


def _apply(f: DiffPoly, tower, q, table) -> DiffPoly:
    F = f.field
    binding = _bindings(tower, q)
    cache = {}

    def image(jet):
        if jet not in cache:
            u, alpha = jet
            terms = {(((u, beta), 1),): table.lift(c) for beta, c in table.inverse[alpha].items()}
            cache[jet] = DiffPoly(F, f.n_unknowns, f.n_vars, terms)
        return cache[jet]

    total = DiffPoly(F, f.n_unknowns, f.n_vars)
    for mono, c in f.terms.items():
        term = DiffPoly.constant(F, f.n_unknowns, f.n_vars, substitute(c, binding))
        for jet, e in mono:
            term = term * image(jet) ** e
        total = total + term
    return total


@dataclass
class Normalization:
    """``normalized = unit * raw``."""

    unit: object
    raw: DiffPoly
    normalized: DiffPoly


def normalize(g: DiffPoly) -> Normalization:
    """Clear denominators, remove the polynomial content, fix the sign."""
    F = g.field
    if not g.terms:
        return Normalization(F.one, g, g)
    lcm_poly = F.ring.one
    for c in g.terms.values():
        d = c.denom
        lcm_poly = lcm_poly * d.exquo(lcm_poly.gcd(d))
    nums = {m: (c * F(lcm_poly)).numer for m, c in g.terms.items()}
    content = None
    for p in nums.values():
        content = p if content is None else content.gcd(p)
    nums = {m: p.exquo(content) for m, p in nums.items()}
    # integer content over all coefficients at once
    fracs = [to_fraction(c) for p in nums.values() for c in p.values()]
    den = lcm(*(c.denominator for c in fracs))
    num = gcd(*(c.numerator * (den // c.denominator) for c in fracs))
    lead = nums[g.monomials()[0]]
    sign = 1 if to_fraction(lead.LC) > 0 else -1
    factor = F.ring.domain.convert(sign * den) / F.ring.domain.convert(num)
    normalized = {m: F(p.mul_ground(factor)) for m, p in nums.items()}
    unit = F(lcm_poly) / F(content) * factor
    return Normalization(unit, g, DiffPoly(F, g.n_unknowns, g.n_vars, normalized))


def ode_transform(f: DiffPoly, tower, q: Parametrization, table=None) -> Normalization:
    if f.n_vars != 1:
        raise ValueError("ode_transform needs one independent variable")
    table = table or jet_substitution_table(q.x, q.z, f.order)
    return normalize(_apply(f, tower, q, table))


def pde_transform(f: DiffPoly, tower, q: Parametrization, table=None) -> Normalization:
    table = table or jet_substitution_table(q.x, q.z, f.order)
    return normalize(_apply(f, tower, q, table))


def admissibility_warnings(fs):
    """Monomials mixing derivatives of different unknowns."""
    out = []
    for k, f in enumerate(fs):
        for mono in f.terms:
            unknowns = {u for (u, _), _ in mono}
            if len(unknowns) > 1 and monomial_degree(mono) > 1:
                out.append(f"equation {k + 1}: a monomial multiplies derivatives of "
                           f"different unknowns; rational coefficients are only "
                           f"guaranteed for systems without such products")
                break
    return out


def system_transform(fs, tower, q: Parametrization):
    order = max(f.order for f in fs)
    table = jet_substitution_table(q.x, q.z, order)
    results = [normalize(_apply(f, tower, q, table)) for f in fs]
    return results, admissibility_warnings(fs)


def rationality_check(g: DiffPoly, tower) -> bool:
    syms = set(tower.symbols)
    return all(not (variables_of(c) & syms) for c in g.terms.values())


# ---------------------------------------------------------------------------
# rendering


def radical_texts(tower):
    """Surface text of every tower generator with nested radicals expanded."""
    reg = tower.registry
    names = list(reg.names)
    for s in tower.steps:
        body = format_ratfunc(s.radicand, names)
        names[s.symbol] = f"sqrt({body})" if s.index == 2 else f"root({body}, {s.index})"
    return names


def back_substitution(h, tower):
    """``z = h(x, d(x))`` rendered with the original radicals."""
    names = radical_texts(tower)
    return [format_ratfunc(c, names) for c in h]


def output_declarations(decl: Declarations, fresh):
    taken = set(fresh) | set(decl.params)
    unknowns = []
    for u in decl.unknowns:
        up = u[:1].upper() + u[1:]
        while up in taken or up in unknowns or up == u and u[:1].isupper():
            up = up + "_"
        unknowns.append(up)
    return Declarations(tuple(fresh), tuple(unknowns), tuple(decl.params))


def format_equation(g: DiffPoly, registry, out_decl):
    return format_diffpoly(g, list(registry.names), out_decl.unknowns, out_decl.variables)


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class TransformResult:
    status: str
    decl: Declarations
    registry: object
    tower: object
    equations: list
    out_decl: Declarations
    coefficients: list
    parametrization: Parametrization | None = None
    param_status: str | None = None
    witness: str | None = None
    inverse: list | None = None
    raw_inverse: list | None = None
    normalizations: list = field(default_factory=list)
    back_substitution: list | None = None
    tracing: object = None
    rational: bool | None = None
    verdict: object = None
    supplied: bool = False
    warnings: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def transformed(self):
        return [n.normalized for n in self.normalizations]

    @property
    def units(self):
        return [n.unit for n in self.normalizations]

    def transformed_text(self):
        return [format_equation(g, self.registry, self.out_decl) for g in self.transformed]


def radical_coefficients(tower, polys):
    """Coefficients involving radicals, in canonical term order."""
    out = []
    for f in polys:
        for _, c in f.sorted_terms():
            if tower.radicals_in(c) and c not in out:
                out.append(c)
    return out


def parse_substitution(text, decl, tower, registry):
    """``x=...; d1=...`` into a parametrization over the fresh variables.

    Missing radical components are derived when the radicand becomes a
    perfect power; otherwise they stay symbolic (and the result is not
    rational).
    """
    fresh = registry.names_of("fresh")
    sub_decl = Declarations(tuple(fresh), (), tuple(decl.params))
    parts = [p.strip() for p in text.replace("\n", ";").split(";") if p.strip()]
    given = {}
    for part in parts:
        if "=" not in part:
            raise ValueError(f"substitution item {part!r} is not of the form name=expression")
        name, rhs = (s.strip() for s in part.split("=", 1))
        if name not in registry or registry.kind(name) not in ("base", "radical"):
            raise ValueError(f"substitution target {name!r} is not a variable or radical")
        if registry.kind(name) == "radical" and registry.index[name] not in tower.symbols:
            raise ValueError(f"substitution target {name!r} is not a tower radical")
        given[name] = rational_value(parse_expr(rhs, sub_decl), registry)
    base = registry.names_of("base")
    missing = [b for b in base if b not in given]
    if missing:
        raise ValueError(f"substitution lacks components for {missing}")
    x = [given[b] for b in base]
    binding = {registry.index[b]: v for b, v in zip(base, x)}
    d = []
    notes = []
    for s in tower.steps:
        if s.name in given:
            comp = given[s.name]
        else:
            alpha = substitute(s.radicand, binding)
            comp = ratfunc_root(alpha, s.index)
            if comp is None:
                notes.append(f"{s.name}: radicand {alpha.as_expr()} is not a perfect power "
                             f"under the substitution; left symbolic")
            else:
                notes.append(f"{s.name} = {comp.as_expr()} derived from the substitution")
        d.append(comp)
        if comp is not None:
            binding[s.symbol] = comp
    z = [registry.index[n] for n in fresh]
    return Parametrization(x, d, z, None, None, ["supplied substitution"]), notes


def run_pipeline(equations, decl: Declarations, substitution=None, seed=0) -> TransformResult:
    """Parse, build the tower, parametrize, transform and classify."""
    if isinstance(equations, str):
        equations = [equations]
    exprs = [parse_equation(text, decl) for text in equations]
    tower, polys, registry = extract_tower(list(exprs), decl)
    fresh = registry.names_of("fresh")
    out_decl = output_declarations(decl, fresh)
    coeffs = radical_coefficients(tower, polys)
    result = TransformResult(NO_ANSWER, decl, registry, tower, polys, out_decl, coeffs)
    if coeffs:
        result.tracing = tracing_index(tower, coeffs, seed=seed)

    if substitution is not None:
        q, notes = parse_substitution(substitution, decl, tower, registry)
        result.supplied = True
        result.notes += notes
        complete = all(c is not None for c in q.d)
        if complete:
            result.verdict = verify_parametrization(tower, q, check_inverse=False)
            if result.verdict:
                try:
                    raw, reduced = invert_parametrization(
                        q.components, [registry.index[n] for n in registry.names_of("base")]
                        + list(tower.symbols), q.z, registry.field, tower)
                    q.raw_inverse, q.inverse = raw, reduced
                except NotProper as exc:
                    result.notes.append(f"no rational inverse found: {exc}")
            else:
                result.notes += result.verdict.failures
        param_ok = complete and bool(result.verdict)
        result.param_status = FOUND if param_ok else None
    else:
        outcome = parametrize_tower(tower)
        q = outcome.parametrization
        result.param_status = outcome.status
        result.witness = outcome.witness
        result.notes += outcome.notes
        param_ok = outcome.status == FOUND

    result.parametrization = q
    if q is not None:
        result.inverse = q.inverse
        result.raw_inverse = q.raw_inverse
        try:
            if len(polys) > 1:
                norms, warns = system_transform(polys, tower, q)
                result.warnings += warns
            elif len(decl.variables) == 1:
                norms = [ode_transform(polys[0], tower, q)]
            else:
                norms = [pde_transform(polys[0], tower, q)]
        except SingularJacobian as exc:
            result.notes.append(str(exc))
            norms = []
        result.normalizations = norms
        result.rational = bool(norms) and all(rationality_check(g, tower)
                                              for g in result.transformed)
        if result.raw_inverse is not None:
            result.back_substitution = back_substitution(result.raw_inverse, tower)

    if param_ok and result.rational:
        result.status = TRANSFORMED
    elif result.param_status == NON_RATIONAL and result.tracing is not None \
            and result.tracing.certified and result.tracing.index == 1:
        result.status = IMPOSSIBLE
    else:
        result.status = NO_ANSWER
        if result.tracing is not None and result.tracing.index > 1:
            result.notes.append(f"tracing index {result.tracing.index} > 1: non-rationality of "
                                f"the tower variety would not be conclusive")
    return result


__all__ = ["JetSubstitutionTable", "SingularJacobian", "jet_substitution_table", "multi_indices",
           "ode_transform", "pde_transform", "system_transform", "rationality_check",
           "back_substitution", "normalize", "Normalization", "run_pipeline", "TransformResult",
           "parse_substitution", "radical_coefficients", "output_declarations",
           "format_equation", "TRANSFORMED", "IMPOSSIBLE", "NO_ANSWER", "fresh_variable_names"]
