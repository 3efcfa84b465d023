"""Numeric cross-checks of the symbolic layer.

Sample points are random rationals, so the jets of polynomial test functions
and every rational component are exact; the only approximation is the
numeric value of the radicals, evaluated with mpmath at a fixed precision.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import factorial

import mpmath

from .kernel import (DenominatorVanishes, PrecisionLoss, _eval_poly_numeric, eval_exact,
                     eval_numeric, to_fraction)

DEFAULT_PRECISION = 128
DEFAULT_SAMPLES = 20
DEFAULT_DEGREE = 4
DEFAULT_THRESHOLD = 1e-20
SAMPLE_BOUND = 10**4


class BranchAmbiguous(ArithmeticError):
    """Candidate roots are not separated at the working precision."""


@dataclass
class BranchAssignment:
    indices: list  # per step, k in d = principal_root * exp(2 pi i k / e)
    values: dict  # radical symbol -> mpc


@dataclass
class OracleReport:
    samples: int
    max_residual: float
    precision: int
    threshold: float
    passed: bool
    rejected: int = 0
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {
            "samples": self.samples,
            "max_relative_residual": float(self.max_residual),
            "precision_bits": self.precision,
            "threshold": self.threshold,
            "passed": self.passed,
            "rejected_samples": self.rejected,
        }


def random_rational(rng, bound=SAMPLE_BOUND, positive=False):
    num = rng.randint(1 if positive else -bound, bound)
    den = rng.randint(1, bound)
    return Fraction(num, den)


def _ctx(precision):
    ctx = mpmath.MPContext()
    ctx.prec = precision
    return ctx


def _roots(ctx, value, e):
    r = ctx.root(ctx.mpc(value), e)
    return [r * ctx.expjpi(ctx.mpf(2 * k) / e) for k in range(e)]


def _exact_point(registry, q, z0, params):
    """Exact base and radical components at a fresh-variable point."""
    point = dict(params)
    for zi, v in zip(q.z, z0):
        point[zi] = v
    x0 = [eval_exact(c, point) for c in q.x]
    d0 = [None if c is None else eval_exact(c, point) for c in q.d]
    return point, x0, d0


def branch_resolve(tower, q, z0, params=None, precision=DEFAULT_PRECISION):
    """Branches of the tower radicals matching the parametrization at ``z0``."""
    ctx = _ctx(precision)
    reg = tower.registry
    params = params or {}
    _, x0, d0 = _exact_point(reg, q, z0, params)
    base = {reg.index[n]: v for n, v in zip(reg.names_of("base"), x0)}
    point = dict(params)
    point.update(base)
    indices = []
    values = {}
    tol = ctx.mpf(2) ** (-(precision // 2))
    for step, target in zip(tower.steps, d0):
        if target is None:
            raise BranchAmbiguous(f"{step.name} has no rational component to match")
        alpha = eval_numeric(step.radicand, point, precision)
        if alpha == 0:
            indices.append(0)
            values[step.symbol] = ctx.mpc(0)
            point[step.symbol] = 0
            continue
        cands = _roots(ctx, alpha, step.index)
        t = ctx.mpf(target.numerator) / target.denominator
        dist = [abs(c - t) for c in cands]
        k = min(range(len(cands)), key=lambda i: dist[i])
        sep = abs(cands[0]) * 2 * ctx.sin(ctx.pi / step.index)
        if sep <= tol * max(1, abs(t)) or dist[k] * 4 > sep:
            raise BranchAmbiguous(f"{step.name}: candidate roots not separated at "
                                  f"{precision} bits")
        indices.append(k)
        values[step.symbol] = cands[k]
        point[step.symbol] = cands[k]
    return BranchAssignment(indices, values)


def numeric_tower_check(tower, q, samples=DEFAULT_SAMPLES, precision=DEFAULT_PRECISION,
                        threshold=DEFAULT_THRESHOLD, seed=0, params=None):
    """Residuals of the tower equations under ``q`` at random points."""
    rng = random.Random(seed)
    ctx = _ctx(precision)
    reg = tower.registry
    worst = ctx.mpf(0)
    done = rejected = 0
    eqs = tower.equations()
    names = list(reg.names)
    while done < samples and rejected < 10 * samples:
        pv = params or {reg.index[n]: random_rational(rng) for n in reg.names_of("param")}
        z0 = [random_rational(rng) for _ in q.z]
        try:
            _, x0, d0 = _exact_point(reg, q, z0, pv)
        except DenominatorVanishes:
            rejected += 1
            continue
        vals = {i: ctx.mpf(v.numerator) / v.denominator for i, v in pv.items()}
        for n, v in zip(reg.names_of("base"), x0):
            vals[reg.index[n]] = ctx.mpf(v.numerator) / v.denominator
        for s, v in zip(tower.steps, d0):
            vals[s.symbol] = ctx.mpf(v.numerator) / v.denominator
        for g in eqs:
            total, scale = _eval_poly_numeric(ctx, g, vals, names)
            if scale:
                worst = max(worst, abs(total) / scale)
        done += 1
    return OracleReport(done, float(worst), precision, threshold, worst <= threshold, rejected)


# ---------------------------------------------------------------------------
# truncated Taylor series


class _Series:
    """Truncated multivariate power series with Fraction coefficients."""

    __slots__ = ("n", "order", "c")

    def __init__(self, n, order, c=None):
        self.n = n
        self.order = order
        self.c = {k: v for k, v in (c or {}).items() if v}

    @classmethod
    def const(cls, n, order, v):
        return cls(n, order, {(0,) * n: Fraction(v)})

    def __add__(self, o):
        c = dict(self.c)
        for k, v in o.c.items():
            c[k] = c.get(k, 0) + v
        return _Series(self.n, self.order, c)

    def __sub__(self, o):
        return self + o.scale(-1)

    def scale(self, a):
        return _Series(self.n, self.order, {k: v * a for k, v in self.c.items()})

    def __mul__(self, o):
        c = {}
        for k1, v1 in self.c.items():
            d1 = sum(k1)
            for k2, v2 in o.c.items():
                if d1 + sum(k2) > self.order:
                    continue
                k = tuple(a + b for a, b in zip(k1, k2))
                c[k] = c.get(k, 0) + v1 * v2
        return _Series(self.n, self.order, c)

    def const_term(self):
        return self.c.get((0,) * self.n, Fraction(0))

    def inverse(self):
        a0 = self.const_term()
        if a0 == 0:
            raise DenominatorVanishes("series has zero constant term")
        h = (self - _Series.const(self.n, self.order, a0)).scale(-1 / a0)
        out = _Series.const(self.n, self.order, 1)
        power = _Series.const(self.n, self.order, 1)
        for _ in range(self.order):
            power = power * h
            out = out + power
        return out.scale(1 / a0)

    def derivative_at_zero(self, index):
        """``d^index`` at the expansion point (``index`` a sorted variable tuple)."""
        m = [0] * self.n
        for i in index:
            m[i] += 1
        mult = 1
        for k in m:
            mult *= factorial(k)
        return self.c.get(tuple(m), Fraction(0)) * mult


def _poly_series(p, shifts, consts, n, order):
    """Series of a polynomial with fresh generators shifted to ``z0 + eps``."""
    cache = {}

    def power(j, k):
        key = (j, k)
        if key not in cache:
            z0 = shifts[j][1]
            unit = [0] * n
            unit[j] = 1
            lin = _Series(n, order, {(0,) * n: z0, tuple(unit): Fraction(1)})
            s = _Series.const(n, order, 1)
            for _ in range(k):
                s = s * lin
            cache[key] = s
        return cache[key]

    fresh_pos = {gen: j for j, (gen, _) in enumerate(shifts)}
    total = _Series(n, order)
    for monom, c in p.iterterms():
        coef = to_fraction(c)
        term = _Series.const(n, order, 1)
        for g, e in enumerate(monom):
            if not e:
                continue
            if g in fresh_pos:
                term = term * power(fresh_pos[g], e)
            elif g in consts:
                coef *= consts[g] ** e
            else:
                raise ValueError(f"no value for generator {g}")
        total = total + term.scale(coef)
    return total


def _ratfunc_series(f, shifts, consts, n, order):
    num = _poly_series(f.numer, shifts, consts, n, order)
    den = _poly_series(f.denom, shifts, consts, n, order)
    return num * den.inverse()


def random_test_polynomial(rng, n, degree, bound=9):
    """Dense random polynomial in ``n`` variables as ``{exponents: int}``."""
    out = {}
    for exps in product(range(degree + 1), repeat=n):
        if sum(exps) <= degree:
            c = rng.randint(-bound, bound)
            if c:
                out[exps] = c
    if not out:
        out[(0,) * n] = 1
    return out


def poly_jet(poly, x0, index):
    """Exact ``d^index`` of a dict polynomial at ``x0``."""
    n = len(x0)
    m = [0] * n
    for i in index:
        m[i] += 1
    total = Fraction(0)
    for exps, c in poly.items():
        term = Fraction(c)
        for j in range(n):
            if exps[j] < m[j]:
                term = 0
                break
            k = exps[j] - m[j]
            term *= factorial(exps[j]) // factorial(k)
            term *= x0[j] ** k
        total += term
    return total


def _compose_series(poly, comps):
    n, order = comps[0].n, comps[0].order
    total = _Series(n, order)
    pows = {}
    for exps, c in poly.items():
        term = _Series.const(n, order, c)
        for j, e in enumerate(exps):
            if e:
                if (j, e) not in pows:
                    s = _Series.const(n, order, 1)
                    for _ in range(e):
                        s = s * comps[j]
                    pows[(j, e)] = s
                term = term * pows[(j, e)]
        total = total + term
    return total


def _diffpoly_value(ctx, g, coeff_value, jets):
    total = ctx.mpc(0)
    scale = ctx.mpf(0)
    for mono, c in g.terms.items():
        v = coeff_value(c)
        for jet, e in mono:
            v = v * jets[jet] ** e
        total += v
        scale = max(scale, abs(v))
    return total, scale


def numeric_chain_check(fs, gs, tower, q, degree=DEFAULT_DEGREE, samples=DEFAULT_SAMPLES,
                        precision=DEFAULT_PRECISION, threshold=DEFAULT_THRESHOLD, seed=0,
                        max_rejects=200):
    """Compare original and transformed equations on random test functions.

    ``fs`` are the original differential polynomials (radical coefficients),
    ``gs`` the transformed ones before normalization.
    """
    if not isinstance(fs, (list, tuple)):
        fs, gs = [fs], [gs]
    rng = random.Random(seed)
    ctx = _ctx(precision)
    reg = tower.registry
    n = len(q.z)
    order = max([f.order for f in fs] + [g.order for g in gs] + [0])
    n_unknowns = fs[0].n_unknowns
    param_syms = [reg.index[p] for p in reg.names_of("param")]
    worst = ctx.mpf(0)
    done = rejected = 0
    notes = []
    while done < samples:
        if rejected > max_rejects:
            notes.append("too many rejected samples")
            break
        pv = {p: random_rational(rng) for p in param_syms}
        z0 = [random_rational(rng) for _ in range(n)]
        try:
            point, x0, d0 = _exact_point(reg, q, z0, pv)
            branches = branch_resolve(tower, q, z0, pv, precision)
            shifts = list(zip(q.z, z0))
            comps = [_ratfunc_series(c, shifts, pv, n, order) for c in q.x]
        except (DenominatorVanishes, PrecisionLoss, BranchAmbiguous):
            rejected += 1
            continue
        tests = [random_test_polynomial(rng, n, degree) for _ in range(n_unknowns)]
        xjets, zjets = {}, {}
        for u, poly in enumerate(tests):
            comp_series = _compose_series(poly, comps)
            for f, g in zip(fs, gs):
                for (uu, idx) in f.jets():
                    if uu == u:
                        xjets[(u, idx)] = poly_jet(poly, x0, idx)
                for (uu, idx) in g.jets():
                    if uu == u:
                        zjets[(u, idx)] = comp_series.derivative_at_zero(idx)
        fpoint = dict(pv)
        for name, v in zip(reg.names_of("base"), x0):
            fpoint[reg.index[name]] = v
        fpoint.update(branches.values)
        gpoint = dict(pv)
        gpoint.update({zi: v for zi, v in zip(q.z, z0)})
        try:
            for f, g in zip(fs, gs):
                fv, fs_ = _diffpoly_value(
                    ctx, f, lambda c: ctx.mpc(eval_numeric(c, fpoint, precision)),
                    {k: ctx.mpf(v.numerator) / v.denominator for k, v in xjets.items()})
                gv, gs_ = _diffpoly_value(
                    ctx, g, lambda c: _mpq(ctx, eval_exact(c, gpoint)),
                    {k: ctx.mpf(v.numerator) / v.denominator for k, v in zjets.items()})
                scale = max(fs_, gs_)
                if scale:
                    worst = max(worst, abs(fv - gv) / scale)
        except (DenominatorVanishes, PrecisionLoss):
            rejected += 1
            continue
        done += 1
    passed = done == samples and worst <= threshold
    return OracleReport(done, float(worst), precision, threshold, passed, rejected, notes)


def _mpq(ctx, v):
    return ctx.mpf(v.numerator) / v.denominator


# ---------------------------------------------------------------------------
# conjugates


def conjugate_count(tower, coeffs, point, precision=DEFAULT_PRECISION, tol_bits=None):
    """Number of conjugate radical tuples giving the same coefficient values.

    Brute force over all ``prod e_i`` branch choices at a base point; the
    principal-branch tuple is the reference. This is the size of the fibre
    that the tracing index counts.
    """
    ctx = _ctx(precision)
    tol = ctx.mpf(2) ** (-(tol_bits or precision // 2))

    def tuples(i, pt):
        if i == len(tower.steps):
            yield dict(pt)
            return
        s = tower.steps[i]
        alpha = eval_numeric(s.radicand, pt, precision)
        for r in _roots(ctx, alpha, s.index):
            pt2 = dict(pt)
            pt2[s.symbol] = r
            yield from tuples(i + 1, pt2)

    all_tuples = list(tuples(0, dict(point)))
    ref_pt = dict(point)
    for s in tower.steps:
        a = eval_numeric(s.radicand, ref_pt, precision)
        ref_pt[s.symbol] = ctx.root(ctx.mpc(a), s.index)
    ref = [eval_numeric(c, ref_pt, precision) for c in coeffs]
    count = 0
    for pt in all_tuples:
        vals = [eval_numeric(c, pt, precision) for c in coeffs]
        if all(abs(v - r) <= tol * max(1, abs(r)) for v, r in zip(vals, ref)):
            count += 1
    return count


__all__ = ["BranchAmbiguous", "BranchAssignment", "OracleReport", "branch_resolve",
           "numeric_tower_check", "numeric_chain_check", "conjugate_count",
           "random_test_polynomial", "poly_jet", "random_rational"]
