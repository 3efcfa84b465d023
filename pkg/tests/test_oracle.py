import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from radcoef.frontend.extract import DiffPoly
from radcoef.oracle import (BranchAmbiguous, branch_resolve, conjugate_count, numeric_chain_check,
                            numeric_tower_check, poly_jet, random_test_polynomial)
from radcoef.parametrizer import Parametrization
from radcoef.transformer import run_pipeline

from conftest import (DECL_A, DECL_ABC, DECL_PDE3, DECL_X, HALF_POWER, HYPERBOLA, NESTED_PDE,
                      SQRT_PAIR, make_tower)


@pytest.fixture(scope="module")
def pair():
    return run_pipeline(SQRT_PAIR, DECL_X)


def test_branch_resolve_positive_components(pair):
    got = branch_resolve(pair.tower, pair.parametrization, [Fraction(2)])
    assert got.indices == [0, 0]
    d1 = got.values[pair.tower.steps[0].symbol]
    assert abs(d1 - Fraction(3, 4)) < 1e-30


def test_branch_resolve_negative_component(pair):
    # at z = 1/2 the first component (z^2-1)/(2z) is -3/4
    assert branch_resolve(pair.tower, pair.parametrization, [Fraction(1, 2)]).indices == [1, 0]


def test_branch_resolve_zero_radicand(pair):
    assert branch_resolve(pair.tower, pair.parametrization, [Fraction(1)]).indices == [0, 0]


def test_branch_resolve_near_collision():
    t = make_tower(["x"])
    reg = t.registry
    q = Parametrization([reg.parse_poly("z**2")], [reg.var("z")], [reg.index["z"]])
    with pytest.raises(BranchAmbiguous):
        branch_resolve(t, q, [Fraction(1, 10**50)])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10**6).filter(lambda k: k != 10**3), st.integers(-20, 20))
def test_branch_choice_stable_nearby(k, eps):
    res = run_pipeline(SQRT_PAIR, DECL_X)
    z0 = Fraction(k, 1000)
    a = branch_resolve(res.tower, res.parametrization, [z0]).indices
    b = branch_resolve(res.tower, res.parametrization, [z0 + Fraction(eps, 10**9)]).indices
    assert a == b


def test_tower_check_nested():
    res = run_pipeline(NESTED_PDE, DECL_PDE3)
    rep = numeric_tower_check(res.tower, res.parametrization)
    assert rep.passed and rep.max_residual < 1e-30


def test_tower_check_with_fixed_parameter():
    res = run_pipeline(HYPERBOLA, DECL_ABC)
    c = res.registry.index["c"]
    rep = numeric_tower_check(res.tower, res.parametrization, params={c: Fraction(3)})
    assert rep.passed and rep.max_residual < 1e-30


def test_tower_check_rejects_corrupted_parametrization(pair):
    q = pair.parametrization
    bad = Parametrization(q.x, [q.d[0] + 1, q.d[1]], q.z)
    assert not numeric_tower_check(pair.tower, bad).passed


def test_chain_check_half_power():
    res = run_pipeline(HALF_POWER, DECL_A)
    rep = numeric_chain_check(res.equations, [n.raw for n in res.normalizations], res.tower,
                              res.parametrization)
    assert rep.passed and rep.samples == 20


def test_chain_check_identity_map():
    res = run_pipeline("y'' + x*y", DECL_X)
    rep = numeric_chain_check(res.equations, [n.raw for n in res.normalizations], res.tower,
                              res.parametrization)
    assert rep.passed and rep.max_residual < 1e-30


def test_chain_check_catches_perturbed_output(pair):
    (g,) = [n.raw for n in pair.normalizations]
    mono = g.monomials()[0]
    terms = dict(g.terms)
    terms[mono] = terms[mono] * 2
    bad = DiffPoly(g.field, g.n_unknowns, g.n_vars, terms)
    rep = numeric_chain_check(pair.equations, [bad], pair.tower, pair.parametrization, samples=5)
    assert not rep.passed


def test_conjugate_count_small_cases():
    t = make_tower(["x", "x+1"])
    reg = t.registry
    d1, d2 = reg.var("d1"), reg.var("d2")
    x = {reg.index["x"]: Fraction(2)}
    assert conjugate_count(t, [d1 * d2], x) == 2
    assert conjugate_count(t, [d1 + d2], x) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 10**6))
def test_poly_jet_matches_sympy(n, order, seed):
    rng = random.Random(seed)
    poly = random_test_polynomial(rng, n, 4)
    xs = sympy.symbols(f"x1:{n + 1}")
    expr = sum(c * sympy.prod([v**e for v, e in zip(xs, m)]) for m, c in poly.items())
    x0 = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(n)]
    index = tuple(sorted(rng.randrange(n) for _ in range(order)))
    want = sympy.diff(expr, *[xs[i] for i in index]) if index else expr
    want = want.subs({v: sympy.Rational(a.numerator, a.denominator) for v, a in zip(xs, x0)})
    assert poly_jet(poly, x0, index) == Fraction(int(want.p), int(want.q))
