import random

import pytest
from hypothesis import given, settings, strategies as st

from radcoef.frontend.radicals import DegenerateTower
from radcoef.oracle import conjugate_count
from radcoef.parametrizer import Parametrization
from radcoef.tower import field_degree, tower_equations, tracing_index, verify_parametrization
from radcoef.transformer import radical_coefficients

from conftest import DECL_X, SQRT_PAIR, extracted, make_tower


def _q(tower, x, d):
    reg = tower.registry
    z = [reg.index[n] for n in reg.names_of("fresh")]
    conv = lambda t: reg.parse_poly(t)
    return Parametrization([conv(t) for t in x], [conv(t) for t in d], z)


def test_tower_equations_nested():
    t = make_tower(["x2", "x1 + d1"], base=("x1", "x2", "x3"))
    gens = [str(g.as_expr()) for g in tower_equations(t).generators]
    assert gens == ["d1**2 - x2", "-d1 + d2**2 - x1"]


def test_tower_equations_hyperbola_and_empty():
    t = make_tower(["c**2 + x**2"], params=("c",))
    assert [str(g.as_expr()) for g in tower_equations(t).generators] == ["-c**2 + d1**2 - x**2"]
    assert len(tower_equations(make_tower([]))) == 0


def test_field_degree():
    assert field_degree(make_tower(["x"])) == 2
    assert field_degree(make_tower(["x", "x+1"])) == 4
    assert field_degree(make_tower([(3, "x"), (2, "x+1")])) == 6
    with pytest.raises(DegenerateTower):
        field_degree(make_tower(["x", "4*x"]))


def test_field_degree_matches_conjugate_count():
    # at x=2 the four sign pairs (+-sqrt2, +-sqrt3) are distinct
    t = make_tower(["x", "x+1"])
    d1, d2 = (t.registry.var(n) for n in ("d1", "d2"))
    assert conjugate_count(t, [d1, d2], {t.registry.index["x"]: 2}) == 1
    assert conjugate_count(t, [t.field.one], {t.registry.index["x"]: 2}) == field_degree(t)


def test_tracing_examples():
    tower, p, reg = extracted(SQRT_PAIR, DECL_X)
    coeffs = radical_coefficients(tower, [p])
    rep = tracing_index(tower, coeffs)
    assert (rep.index, rep.certified, rep.total_degree) == (1, True, 4)
    d1, d2 = reg.var("d1"), reg.var("d2")
    rep2 = tracing_index(tower, [d1 * d2])
    assert (rep2.index, rep2.certified) == (2, True)
    assert rep2.index * rep2.image_degree == rep2.total_degree
    one = make_tower(["x"])
    assert tracing_index(one, [one.registry.var("d1")]).index == 1


def test_tracing_invariant_under_generators_of_same_field():
    tower, p, reg = extracted(SQRT_PAIR, DECL_X)
    x, d1, d2 = (reg.var(n) for n in ("x", "d1", "d2"))
    a1, a2 = (14 * x + 12) * d1, (13 * x + 4) * d2
    base = tracing_index(tower, [a1, a2]).index
    assert tracing_index(tower, [a2, a1]).index == base
    assert tracing_index(tower, [a1 + a2, tower.reduce(a1 * a2), a1]).index == base


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(-4, 6), min_size=1, max_size=3), st.integers(0, 10**6))
def test_tracing_one_when_all_radicals_are_coefficients(shifts, seed):
    tower = make_tower([f"x + {k}" for k in sorted(shifts)])
    reg = tower.registry
    coeffs = [reg.var(s.name) for s in tower.steps]
    rnd = random.Random(seed)
    coeffs.append(reg.var("x") * rnd.randint(1, 5) + coeffs[0])
    rep = tracing_index(tower, coeffs, seed=seed)
    assert rep.index == 1


def test_verify_parametrization_examples():
    t = make_tower(["x", "x+1"])
    q = _q(t, ["(z**2-1)**2/(4*z**2)"], ["(z**2-1)/(2*z)", "(z**2+1)/(2*z)"])
    assert verify_parametrization(t, q)
    nested = make_tower(["x2", "x1 + d1"], base=("x1", "x2", "x3"))
    q2 = _q(nested, ["z1", "(z2**2-z1)**2", "z3"], ["z2**2 - z1", "z2"])
    assert verify_parametrization(nested, q2)
    bad = make_tower(["x+1"])
    verdict = verify_parametrization(bad, _q(bad, ["z**2"], ["z"]))
    assert not verdict
    assert "does not vanish" in verdict.failures[0]


def test_verify_catches_bad_inverse_and_singular_jacobian():
    t = make_tower(["x+1"])
    q = _q(t, ["z**2 - 1"], ["z"])
    q.inverse = [t.registry.var("x")]
    verdict = verify_parametrization(t, q)
    assert any("inverse" in f for f in verdict.failures)
    c = make_tower(["x+1"])
    q = _q(c, ["3"], ["2"])
    assert any("Jacobian" in f for f in verify_parametrization(c, q).failures)
