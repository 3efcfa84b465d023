from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st, HealthCheck

from radcoef.kernel import (DenominatorVanishes, PrecisionLoss, VarRegistry, degree_in,
                            differentiate, eval_exact, eval_numeric, poly_gcd,
                            primitive_integer, power_split, ratfunc_root, resultant,
                            squarefree_part, substitute)

REG = VarRegistry.build(params=("c",), base=("x", "y"), n_radicals=1, fresh=("z", "t"))
F, R = REG.field, REG.ring
X, Y, Z, T, C, D = (REG.pvar(n) for n in ("x", "y", "z", "t", "c", "d1"))
XI, ZI, DI = REG.index["x"], REG.index["z"], REG.index["d1"]

def props(n):
    return settings(max_examples=n, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def P(text):
    return REG.parse_poly(text)


# --- examples ---------------------------------------------------------------

def test_gcd_examples():
    assert poly_gcd(Z**2 - 1, Z**2 - 2*Z + 1) == Z - 1
    assert poly_gcd(X**2 + X, X + 1) == X + 1
    assert poly_gcd(3*X**3 + Y, R.one) == 1
    assert poly_gcd(R.zero, R.zero) == 0


def test_differentiate_examples():
    r = P("(z**2-1)**2/(4*z**2)")
    assert differentiate(r, ZI) == P("(z**2-1)*(z**2+1)/(2*z**3)")
    assert differentiate(P("z**2"), ZI) == P("2*z")
    assert differentiate(P("c"), ZI) == 0


def test_differentiate_against_finite_differences(rng):
    r = P("(z**2-1)**2/(4*z**2)")
    dr = differentiate(r, ZI)
    mp = mpmath.MPContext()
    mp.prec = 400  # the difference quotient cancels ~130 bits
    for _ in range(10):
        z0 = Fraction(rng.randint(1, 400), rng.randint(1, 60))
        f = lambda v: eval_numeric(r, {"z": v}, 400).real
        h = mp.mpf(10) ** -40
        approx = (f(mp.mpf(z0.numerator) / z0.denominator + h)
                  - f(mp.mpf(z0.numerator) / z0.denominator - h)) / (2 * h)
        exact = eval_exact(dr, {"z": z0})
        assert abs(approx - mp.mpf(exact.numerator) / exact.denominator) \
            <= mp.mpf(10) ** -20 * max(1, abs(exact))


def test_substitute_examples():
    assert substitute(P("x+1"), {"x": P("t**2")}) == P("t**2+1")
    r = P("(z**2-1)**2/(4*z**2)")
    assert substitute(P("x"), {XI: r}) == r
    with pytest.raises(DenominatorVanishes):
        substitute(P("1/x"), {"x": F.zero})


def test_resultant_examples():
    assert resultant(D**2 - X, D - 1, DI) in (1 - X, X - 1)
    assert resultant(D**2 - X, D**2 - X - 1, DI) in (1, -1)
    assert resultant(D**2 - X, D**2 - X, DI) == 0


def test_resultant_matches_sylvester():
    import sympy
    p = D**3 + X*D - 2
    q = 2*D**2 - X*D + 3
    want = sympy.resultant(p.as_expr(), q.as_expr(), sympy.Symbol("d1"))
    got = resultant(p, q, DI).as_expr()
    assert sympy.expand(got - want) == 0 or sympy.expand(got + want) == 0


def test_squarefree_examples():
    assert squarefree_part(X * (X + 1)**2, XI) == X**2 + X
    assert squarefree_part(T**2 + 1, REG.index["t"]) == T**2 + 1
    assert squarefree_part((Z - 1)**4, ZI) == Z - 1


def test_eval_numeric_examples():
    assert eval_numeric(P("(z**2+1)/(2*z)"), {"z": 1}) == 1
    assert eval_numeric(P("(z**2-1)**2/(4*z**2)"), {"z": 2}) == mpmath.mpf(9) / 16
    with pytest.raises(PrecisionLoss):
        eval_numeric(P("1/z"), {"z": 0})


def test_power_split_and_roots():
    outer, inner = power_split(4 * X**2 * (X + 1), 2)
    assert outer**2 * inner == 4 * X**2 * (X + 1)
    assert inner == X + 1
    assert ratfunc_root(P("(x+1)**2/(4*x**4)"), 2) in (P("(x+1)/(2*x**2)"), P("-(x+1)/(2*x**2)"))
    assert ratfunc_root(P("x**3"), 2) is None


def test_primitive_integer_scales():
    p = X / 3 + Y / 6
    scaled, factor = primitive_integer(p)
    assert scaled == factor * p
    assert scaled == 2 * X + Y


# --- properties ---------------------------------------------------------------

coef = st.integers(-5, 5)


@st.composite
def polys(draw, max_terms=4, max_deg=3):
    n = draw(st.integers(0, max_terms))
    p = R.zero
    for _ in range(n):
        c = draw(coef)
        ex = draw(st.integers(0, max_deg))
        ey = draw(st.integers(0, max_deg - ex))
        p += c * X**ex * Y**ey
    return p


@st.composite
def ratfuncs(draw):
    num = draw(polys())
    den = draw(polys(max_terms=3, max_deg=2))
    if not den:
        den = R.one
    return F.new(num, den)


@props(1000)
@given(polys(), polys(), polys(max_terms=2, max_deg=2))
def test_gcd_divides_and_cofactors_coprime(a, b, g):
    check_gcd(a, b, g)


def check_gcd(a, b, g):
    p, q = a * g, b * g
    h = poly_gcd(p, q)
    if not p and not q:
        assert h == 0
        return
    assert p.rem(h) == 0 and q.rem(h) == 0
    assert poly_gcd(p.quo(h), q.quo(h)).is_ground


@props(200)
@given(ratfuncs(), ratfuncs())
def test_leibniz(f, g):
    check_leibniz(f, g)


def check_leibniz(f, g):
    assert differentiate(f * g, XI) == differentiate(f, XI) * g + f * differentiate(g, XI)


@props(200)
@given(ratfuncs(), polys(max_terms=3, max_deg=3), st.fractions(-20, 20, max_denominator=20))
def test_chain_rule_numeric(f, rnum, z0):
    check_chain_rule(f, rnum, z0)


def check_chain_rule(f, rnum, z0):
    # r in z; compare d/dz f(r(z)) with f'(r(z)) r'(z) at z0
    r = substitute(F(rnum), {"x": F.gens[ZI], "y": F.gens[ZI]})
    try:
        lhs = differentiate(substitute(f, {XI: r}), ZI)
        rhs = substitute(differentiate(f, XI), {XI: r}) * differentiate(r, ZI)
        point = {"z": z0, "y": Fraction(1, 3)}
        a = eval_numeric(lhs, point)
        b = eval_numeric(rhs, point)
    except (DenominatorVanishes, PrecisionLoss):
        return
    assert abs(a - b) <= mpmath.mpf(10) ** -20 * max(1, abs(a), abs(b))


@props(200)
@given(polys(max_terms=3, max_deg=2), polys(max_terms=3, max_deg=2),
       st.integers(0, 2), st.booleans())
def test_resultant_vanishes_iff_common_factor(a, b, k, share):
    check_resultant(a, b, k, share)


def check_resultant(a, b, k, share):
    common = (D + X + k) if share else R.one
    p = (D**2 + a) * common
    q = (D + b + 1) * common
    res = resultant(p, q, DI)
    shared = degree_in(poly_gcd(p, q), DI) > 0
    assert (res == 0) == shared


@props(200)
@given(st.lists(st.tuples(polys(max_terms=2, max_deg=1), st.integers(1, 3)),
                min_size=1, max_size=3))
def test_squarefree_part_is_squarefree(factors):
    check_squarefree(factors)


def check_squarefree(factors):
    p = R.one
    for f, m in factors:
        f = f + Z  # positive degree in z
        p *= f**m
    s = squarefree_part(p, ZI)
    assert degree_in(poly_gcd(s, s.diff(Z)), ZI) == 0
    assert p.rem(s) == 0
