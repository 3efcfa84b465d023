"""Rational parametrization of tower varieties.

Steps of the tower are parametrized one at a time. A running map sends the
original coordinates (base variables and radicals) to rational functions of
the current *free parameters*; each free parameter owns one slot
``0..n-1`` (eventually renamed to ``z_{slot}``) and carries its inverse, an
expression in the original coordinates. Strategies, tried in order per step:

* perfect power: the radicand is already an e-th power in the free parameters;
* solve-for (S1): the radicand is linear in a free parameter ``v``, so
  ``v = (den * w**e - B) / A`` and the radical itself becomes a parameter;
* conic (S2): ``e = 2`` and the radicand depends on a single free parameter;
  ``d = beta * Y`` with ``Y**2 = S(t)`` squarefree, parametrized by lines when
  ``deg S <= 2``;
* homogeneity (S3): the radicand is homogeneous of degree ``k`` (``e | k``) in
  several free parameters; one of them becomes a scaling variable ``s`` and
  ``d = s**(k/e) * d'`` with ``d'`` handled recursively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .frontend.radicals import RadicalTower
from .kernel import (coeffs_in, degree_in, power_split, ratfunc_root, subresultant_prs,
                     substitute, variables_of)
from .tower import verify_parametrization

FOUND = "Found"
NON_RATIONAL = "ProvenNonRational"
UNKNOWN = "Unknown"

POINT_SEARCH_BOUND = 100


class NotProper(ArithmeticError):
    """The parametrization has no rational inverse (or none was found)."""


class NoRationalPointFound(ArithmeticError):
    """No point on the conic was found over Q(params)."""


@dataclass
class Parametrization:
    """Components of ``Q(z) = (r(z), d(r(z)))`` plus inverse and trace.

    ``x`` and ``d`` are rational functions of the fresh generators ``z``;
    ``inverse`` holds one expression per fresh variable in the base variables
    and radicals, in tower normal form, and ``raw_inverse`` the same maps as
    they were constructed (used for display).
    """

    x: list
    d: list
    z: list
    inverse: list | None = None
    raw_inverse: list | None = None
    trace: list = field(default_factory=list)

    @property
    def components(self):
        return list(self.x) + list(self.d)


@dataclass
class ParamOutcome:
    status: str
    parametrization: Parametrization | None = None
    witness: str | None = None
    notes: list = field(default_factory=list)


class _Stop(Exception):
    def __init__(self, status, message):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class _Param:
    sym: int
    slot: int
    inv: object
    base: bool
    serial: int


class _State:
    def __init__(self, tower: RadicalTower):
        self.tower = tower
        self.reg = tower.registry
        self.field = tower.field
        base = [self.reg.index[n] for n in self.reg.names_of("base")]
        self.n = len(base)
        self.coords = {i: self.field.gens[i] for i in base}
        self.free = [_Param(i, k, self.field.gens[i], True, k) for k, i in enumerate(base)]
        # the last auxiliary symbol is reserved for the tracing index
        self._aux = [self.reg.index[n] for n in self.reg.names_of("aux")][:-1]
        self._serial = self.n
        self.trace = []

    def name(self, sym):
        return self.reg.names[sym]

    def new_aux(self):
        if not self._aux:
            raise _Stop(UNKNOWN, "ran out of auxiliary symbols")
        return self._aux.pop(0)

    def param(self, sym):
        return next(p for p in self.free if p.sym == sym)

    def add(self, sym, slot, inv):
        self.free.append(_Param(sym, slot, inv, False, self._serial))
        self._serial += 1

    def bind(self, sym, expr):
        """Eliminate free parameter ``sym`` in favour of ``expr``."""
        self.free = [p for p in self.free if p.sym != sym]
        self.coords = {k: substitute(v, {sym: expr}) for k, v in self.coords.items()}

    def involved(self, f):
        used = variables_of(f)
        return [p for p in self.free if p.sym in used]

    def s1_order(self, params):
        """Eligibility order for solve-for: introduced parameters (latest
        first), then base variables in declared order."""
        extra = sorted((p for p in params if not p.base), key=lambda p: -p.serial)
        base = sorted((p for p in params if p.base), key=lambda p: p.slot)
        return extra + base


def _fmt(f):
    return str(f.as_expr())


def _solve(state: _State, alpha, e, d_inv, label):
    """Express a radical with ``d**e = alpha`` in the free parameters."""
    F = state.field
    root = ratfunc_root(alpha, e)
    if root is not None:
        state.trace.append(f"{label}: radicand is a perfect power, {label} = {_fmt(root)}")
        return root
    involved = state.involved(alpha)
    if not involved:
        raise _Stop(UNKNOWN, f"{label}: radicand {_fmt(alpha)} is a constant that is not "
                             f"a perfect power over the ground field")
    num, den = alpha.numer, alpha.denom
    # S1: solve for a parameter occurring linearly
    for p in state.s1_order(involved):
        if degree_in(den, p.sym) == 0 and degree_in(num, p.sym) == 1:
            B, A = coeffs_in(num, p.sym)
            w = state.new_aux()
            W = F.gens[w]
            expr = (F(den) * W**e - F(B)) / F(A)
            state.trace.append(f"S1: {state.name(p.sym)} = {_fmt(expr)} with {label} = "
                               f"{state.name(w)}")
            state.bind(p.sym, expr)
            state.add(w, p.slot, d_inv)
            return W
    # S2: square root over a curve
    if e == 2 and len(involved) == 1:
        return _conic_step(state, alpha, involved[0], d_inv, label)
    # S3: homogeneity
    if len(involved) >= 2:
        out = _homogeneous_step(state, alpha, e, involved, d_inv, label)
        if out is not None:
            return out
    raise _Stop(UNKNOWN, f"{label}: no strategy applies to {label}^{e} = {_fmt(alpha)}")


def _conic_step(state, alpha, t, d_inv, label):
    F = state.field
    num, den = alpha.numer, alpha.denom
    outer, S = power_split(num * den, 2)
    beta = F(outer) / F(den)
    deg = degree_in(S, t.sym)
    tname = state.name(t.sym)
    if deg == 0:
        root = ratfunc_root(F(S), 2)
        if root is None:
            raise _Stop(UNKNOWN, f"{label}: needs the square root of the constant {_fmt(F(S))}")
        state.trace.append(f"S2: {label} = {_fmt(beta * root)}")
        return beta * root
    if deg >= 3:
        msg = (f"{label}: {label}^2 = {_fmt(alpha)} reduces to Y^2 = {S.as_expr()} with "
               f"squarefree degree {deg} in {tname} (genus >= 1)")
        raise _Stop(NON_RATIONAL if state.n == 1 else UNKNOWN, msg)
    Ysym = state.new_aux()
    w = state.new_aux()
    v = F.gens[Ysym]
    conic = F(v.numer**2) - F(S)
    try:
        U, V, L = parametrize_conic(conic, t.sym, Ysym, w)
    except NoRationalPointFound as exc:
        raise _Stop(UNKNOWN, f"{label}: conic Y^2 = {S.as_expr()} has no rational point "
                             f"found over the ground field ({exc})")
    # inverse of the new parameter in original coordinates
    beta_orig = substitute(beta, {t.sym: t.inv})
    y_orig = d_inv / beta_orig
    inv_w = substitute(L, {t.sym: t.inv, Ysym: y_orig})
    d_expr = substitute(beta, {t.sym: U}) * V
    state.trace.append(f"S2: {label}^2 = {_fmt(alpha)}, conic Y^2 = {S.as_expr()} "
                       f"parametrized by {tname} = {_fmt(U)}, Y = {_fmt(V)}, "
                       f"{state.name(w)} = {_fmt(L)}")
    state.bind(t.sym, U)
    state.add(w, t.slot, inv_w)
    return d_expr


def _homogeneous_step(state, alpha, e, involved, d_inv, label):
    F = state.field
    syms = [p.sym for p in involved]

    def hdeg(poly):
        degs = {sum(m[i] for i in syms) for m in poly.itermonoms()}
        return degs.pop() if len(degs) == 1 else None

    kn, kd = hdeg(alpha.numer), hdeg(alpha.denom)
    if kn is None or kd is None:
        return None
    k = kn - kd
    if k % e:
        return None
    ordered = sorted(involved, key=lambda p: p.slot)
    s = ordered[-1]
    S = F.gens[s.sym]
    sub = {}
    for p in ordered[:-1]:
        t = state.new_aux()
        sub[p.sym] = S * F.gens[t]
        inv_t = p.inv / s.inv
        state.trace.append(f"S3: {state.name(p.sym)} = {state.name(s.sym)}*{state.name(t)}")
        slot = p.slot
        state.bind(p.sym, sub[p.sym])
        state.add(t, slot, inv_t)
    m = k // e
    reduced = substitute(alpha, sub) / S**k
    if s.sym in variables_of(reduced):
        raise _Stop(UNKNOWN, f"{label}: homogeneous split left the scaling variable behind")
    inner = _solve(state, reduced, e, d_inv / s.inv**m, f"{label}'")
    return S**m * inner


def parametrize_tower(tower: RadicalTower, ideal=None) -> ParamOutcome:
    """Proper rational parametrization of the tower variety, if one is found."""
    state = _State(tower)
    if not tower.steps:
        state.trace.append("S0: empty tower, identity map")
    try:
        for step in tower.steps:
            alpha = substitute(step.radicand, state.coords)
            d_inv = state.field.gens[step.symbol]
            state.coords[step.symbol] = _solve(state, alpha, step.index, d_inv, step.name)
    except _Stop as stop:
        return ParamOutcome(stop.status, None, stop.message if stop.status == NON_RATIONAL
                            else None, state.trace + [stop.message])
    q = _finish(state)
    verdict = verify_parametrization(tower, q)
    if not verdict:
        raise RuntimeError("constructed parametrization failed verification: "
                           + "; ".join(verdict.failures))
    return ParamOutcome(FOUND, q, None, list(state.trace))


def compose_inverse(state_free, tower, fresh):
    """Per-slot inverses of the free parameters, in tower normal form."""
    by_slot = sorted(state_free, key=lambda p: p.slot)
    return [tower.reduce(p.inv) for p in by_slot]


def _finish(state):
    reg = state.reg
    F = state.field
    fresh = [reg.index[n] for n in reg.names_of("fresh")]
    rename = {p.sym: F.gens[fresh[p.slot]] for p in state.free}
    x = [substitute(state.coords[reg.index[n]], rename) for n in reg.names_of("base")]
    d = [substitute(state.coords[s.symbol], rename) for s in state.tower.steps]
    raw = [p.inv for p in sorted(state.free, key=lambda p: p.slot)]
    inverse = compose_inverse(state.free, state.tower, fresh)
    return Parametrization(x, d, fresh, inverse, raw, list(state.trace))


# ---------------------------------------------------------------------------
# conics


def _conic_coeffs(conic, u, v):
    """Coefficients of ``a u^2 + b uv + c v^2 + d u + e v + f``."""
    F = conic.field
    ring = F.ring
    out = {}
    num = conic.numer
    for monom, c in num.iterterms():
        key = (monom[u], monom[v])
        rest = list(monom)
        rest[u] = rest[v] = 0
        out.setdefault(key, {})[tuple(rest)] = c
    if any(i + j > 2 for i, j in out):
        raise ValueError("not a conic: total degree in (u, v) exceeds 2")
    den = F(conic.denom)

    def get(i, j):
        return F(ring.from_dict(out[(i, j)])) / den if (i, j) in out else F.zero

    return {k: get(*k) for k in [(2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)]}


def _line_param(conic, u, v, w, lam1, lam2):
    """Lines ``lam1*u + lam2*v = w`` through a point at infinity."""
    F = conic.field
    U, V, W = F.gens[u], F.gens[v], F.gens[w]
    if lam2:
        g = substitute(conic, {v: (W - lam1 * U) / lam2})
        var, other = u, lambda a: (W - lam1 * a) / lam2
    else:
        g = substitute(conic, {u: W / lam1})
        var, other = v, None
    cs = coeffs_in(g.numer, var)
    if len(cs) != 2 or not cs[1]:
        return None
    root = -F(cs[0]) / F(cs[1])
    if lam2:
        pu, pv = root, other(root)
    else:
        pu, pv = W / lam1, root
    if not (variables_of(pu) | variables_of(pv)) & {w}:
        return None
    return pu, pv, lam1 * U + lam2 * V


def _point_param(conic, u, v, w, u0, v0):
    """Lines of slope ``w`` through the rational point ``(u0, v0)``."""
    F = conic.field
    U, V, W = F.gens[u], F.gens[v], F.gens[w]
    s = F.gens[u]  # reuse u as the distance along the line
    g = substitute(conic, {u: u0 + s, v: v0 + W * s})
    cs = coeffs_in(g.numer, u)
    if len(cs) != 3 or not cs[2] or cs[0]:
        return None
    step = -F(cs[1]) / F(cs[2])
    if not step:
        return None
    pu, pv = u0 + step, v0 + W * step
    return pu, pv, (V - v0) / (U - u0)


def _infinite_points(c):
    """Line forms ``(lam1, lam2)`` through rational points at infinity."""
    F = c[(2, 0)].field
    a, b, cc = c[(2, 0)], c[(1, 1)], c[(0, 2)]
    directions = []
    if not cc:
        directions.append((F.zero, F.one))
    if not a:
        directions.append((F.one, F.zero))
    if cc:
        disc = b * b - 4 * a * cc
        r = ratfunc_root(disc, 2)
        if r is not None:
            for root in ([r, -r] if r else [r]):
                directions.append((F.one, (-b + root) / (2 * cc)))
    forms = []
    for p, q in directions:
        lam1, lam2 = q, -p
        scale = lam1 if lam1 else lam2
        lam1, lam2 = lam1 / scale, lam2 / scale
        if (lam1, lam2) not in forms:
            forms.append((lam1, lam2))
    # prefer a positive second coefficient (u + v before u - v)
    forms.sort(key=lambda f: 0 if _positive(f[1]) else 1)
    return forms


def _positive(f):
    if not f:
        return False
    return f.numer.LC * f.denom.LC > 0


def _axis_points(c):
    """Rational points on the lines u = 0 and v = 0."""
    F = c[(2, 0)].field
    pts = []
    for axis in ("u", "v"):
        if axis == "u":
            qa, qb, qc = c[(0, 2)], c[(0, 1)], c[(0, 0)]
        else:
            qa, qb, qc = c[(2, 0)], c[(1, 0)], c[(0, 0)]
        roots = []
        if qa:
            r = ratfunc_root(qb * qb - 4 * qa * qc, 2)
            if r is not None:
                roots = [(-qb + r) / (2 * qa), (-qb - r) / (2 * qa)]
        elif qb:
            roots = [-qc / qb]
        for t in roots:
            pts.append((F.zero, t) if axis == "u" else (t, F.zero))
    return pts


def _search_points(conic, u, v, bound):
    F = conic.field
    c = _conic_coeffs(conic, u, v)
    for k in range(bound + 1):
        for val in ([k, -k] if k else [0]):
            x0 = F(val)
            # fix u = val and solve for v, then the symmetric case
            qa = c[(0, 2)]
            qb = c[(1, 1)] * x0 + c[(0, 1)]
            qc = c[(2, 0)] * x0**2 + c[(1, 0)] * x0 + c[(0, 0)]
            for pt in _quadratic_points(qa, qb, qc):
                yield (x0, pt)
            qa = c[(2, 0)]
            qb = c[(1, 1)] * x0 + c[(1, 0)]
            qc = c[(0, 2)] * x0**2 + c[(0, 1)] * x0 + c[(0, 0)]
            for pt in _quadratic_points(qa, qb, qc):
                yield (pt, x0)


def _quadratic_points(qa, qb, qc):
    if qa:
        r = ratfunc_root(qb * qb - 4 * qa * qc, 2)
        if r is not None:
            return [(-qb + r) / (2 * qa)]
        return []
    if qb:
        return [-qc / qb]
    return []


def parametrize_conic(conic, u, v, w, bound=POINT_SEARCH_BOUND):
    """Parametrize ``conic(u, v) = 0`` by lines through a rational point.

    ``u``, ``v``, ``w`` are generator indices; ``conic`` is a field element
    whose numerator has total degree 2 in ``(u, v)``. Returns
    ``(U(w), V(w), L(u, v))`` with ``L`` the inverse (the line parameter).
    """
    c = _conic_coeffs(conic, u, v)
    if not (c[(2, 0)] or c[(1, 1)] or c[(0, 2)]):
        raise ValueError("not a conic: no quadratic part")
    candidates = []
    for lam1, lam2 in _infinite_points(c):
        candidates.append(("infinity",
                           lambda l1=lam1, l2=lam2: _line_param(conic, u, v, w, l1, l2)))
    for u0, v0 in _axis_points(c):
        candidates.append(("axis", lambda a=u0, b=v0: _point_param(conic, u, v, w, a, b)))
    for _, make in candidates:
        out = make()
        if out is not None and _check_conic(conic, u, v, out):
            return out
    for u0, v0 in _search_points(conic, u, v, bound):
        out = _point_param(conic, u, v, w, u0, v0)
        if out is not None and _check_conic(conic, u, v, out):
            return out
    raise NoRationalPointFound("no rational point at infinity, on the axes, or of "
                               f"height <= {bound}")


def _check_conic(conic, u, v, out):
    pu, pv, _ = out
    return not substitute(conic, {u: pu, v: pv})


# ---------------------------------------------------------------------------
# inversion of a given parametrization


def invert_parametrization(components, coords, fresh, field, tower=None):
    """Rational inverse of ``coords = components(fresh)``.

    ``components`` are rational functions of the ``fresh`` generators,
    ``coords`` the generator indices they stand for. Linear relations are
    solved first; otherwise the degree-one member of a subresultant sequence
    of two relations is used. Every candidate is checked by composition.
    Returns ``(raw, reduced)``; raises :class:`NotProper` when nothing works.
    """
    F = field
    ring = F.ring
    rels = [comp.numer - ring.gens[c] * comp.denom for comp, c in zip(components, coords)]
    binding = dict(zip(coords, components))
    tried = 0
    for result in _eliminate(rels, list(fresh), F):
        tried += 1
        if all(substitute(h, binding) == F.gens[z] for z, h in zip(fresh, result)):
            reduced = [tower.reduce(h) for h in result] if tower is not None else list(result)
            return list(result), reduced
        if tried >= MAX_INVERSE_CANDIDATES:
            break
    raise NotProper(f"none of {tried} inverse candidates recovers the fresh variables")


MAX_INVERSE_CANDIDATES = 50


def _eliminate(rels, unknowns, F):
    """Yield candidate solutions ``[expr per unknown]`` in the coordinates."""
    rels = [r for r in rels if r]
    if not unknowns:
        yield []
        return
    # a relation linear in an unknown and free of the others
    for r in rels:
        used = [z for z in unknowns if degree_in(r, z) > 0]
        if len(used) == 1 and degree_in(r, used[0]) == 1:
            yield from _solve_linear(rels, r, used[0], unknowns, F)
    # the degree-one member of a subresultant sequence
    for z in unknowns:
        single = [r for r in rels
                  if degree_in(r, z) > 0 and all(degree_in(r, o) == 0 for o in unknowns if o != z)]
        for a, b in combinations(single, 2):
            if degree_in(a, z) < degree_in(b, z):
                a, b = b, a
            for member in subresultant_prs(a, b, z)[2:]:
                if degree_in(member, z) == 1:
                    yield from _solve_linear(rels, member, z, unknowns, F)
    # linear in one unknown with others present
    for r in rels:
        for z in unknowns:
            if degree_in(r, z) == 1:
                yield from _solve_linear(rels, r, z, unknowns, F)


def _solve_linear(rels, r, z, unknowns, F):
    B, A = coeffs_in(r, z)
    if not A:
        return
    expr = -F(B) / F(A)
    rest = [o for o in unknowns if o != z]
    new = []
    for s in rels:
        if s == r:
            continue
        t = substitute(F(s), {z: expr}).numer
        if t:
            new.append(t)
    for sub in _eliminate(new, rest, F):
        solved = dict(zip(rest, sub))
        value = substitute(expr, solved) if solved else expr
        yield [value if o == z else solved[o] for o in unknowns]


def invert_curve_parametrization(q: Parametrization, tower: RadicalTower):
    """Inverse of a curve parametrization (``len(q.z) == 1``)."""
    if len(q.z) != 1:
        raise ValueError("curve inversion needs exactly one fresh variable")
    reg = tower.registry
    coords = [reg.index[n] for n in reg.names_of("base")] + list(tower.symbols)
    comps = q.components
    if all(not variables_of(c) & set(q.z) for c in comps):
        raise NotProper("all components are constant")
    return invert_parametrization(comps, coords, q.z, tower.field, tower)


__all__ = ["Parametrization", "ParamOutcome", "parametrize_tower", "parametrize_conic",
           "invert_parametrization", "invert_curve_parametrization", "compose_inverse",
           "NotProper", "NoRationalPointFound", "FOUND", "NON_RATIONAL", "UNKNOWN"]
