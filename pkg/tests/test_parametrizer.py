import pytest
from hypothesis import assume, given, settings, strategies as st

from radcoef.frontend.radicals import (DegenerateTower, RadicalTower, radical_degree_check,
                                       simplify_radicals)
from radcoef.kernel import substitute
from radcoef.parametrizer import (FOUND, NON_RATIONAL, UNKNOWN, NoRationalPointFound,
                                  NotProper, Parametrization, invert_curve_parametrization,
                                  parametrize_conic, parametrize_tower)
from radcoef.tower import verify_parametrization
from radcoef.transformer import run_pipeline

from conftest import DECL_CONE, CONE, CONE_SUBST, make_registry, make_tower


def test_sqrt_pair_tower():
    t = make_tower(["x", "x+1"])
    out = parametrize_tower(t)
    assert out.status == FOUND
    q = out.parametrization
    reg = t.registry
    assert q.x == [reg.parse_poly("(z**2-1)**2/(4*z**2)")]
    assert q.d == [reg.parse_poly("(z**2-1)/(2*z)"), reg.parse_poly("(z**2+1)/(2*z)")]
    assert q.inverse == [reg.parse_poly("d1 + d2")]


def test_shifted_square_root():
    t = make_tower(["x+1"])
    q = parametrize_tower(t).parametrization
    reg = t.registry
    assert (q.x, q.d) == ([reg.parse_poly("z**2 - 1")], [reg.var("z")])
    assert q.inverse == [reg.var("d1")]


def test_elliptic_step_is_non_rational():
    out = parametrize_tower(make_tower(["x**3 - 1"]))
    assert out.status == NON_RATIONAL
    assert out.witness


def test_quintic_root_unknown():
    out = parametrize_tower(make_tower([(5, "x**5 + x + 1")]))
    assert out.status == UNKNOWN


def test_nested_pde_tower_and_inverse():
    t = make_tower(["x2", "x1 + d1"], base=("x1", "x2", "x3"))
    out = parametrize_tower(t)
    assert out.status == FOUND
    assert [str(h.as_expr()) for h in out.parametrization.inverse] == ["x1", "d2", "x3"]


def test_supplied_cone_inverse():
    res = run_pipeline(CONE, DECL_CONE, CONE_SUBST)
    reg = res.registry
    assert res.raw_inverse == [reg.parse_poly("x1/(d1 - x2)"), reg.var("d1")]
    assert res.inverse[0] == res.tower.reduce(res.raw_inverse[0])


def _conic_registry(params=()):
    return make_registry(base=("u", "v"), params=params, n_radicals=0, fresh=("w",), n_aux=0)


def _conic(reg, text):
    return reg.parse_poly(text), reg.index["u"], reg.index["v"], reg.index["w"]


def test_conic_unit_hyperbola():
    reg = _conic_registry()
    U, V, L = parametrize_conic(*_conic(reg, "v**2 - u**2 - 1"))
    assert U == reg.parse_poly("(w**2-1)/(2*w)")
    assert V == reg.parse_poly("(w**2+1)/(2*w)")
    assert L == reg.parse_poly("u + v")


def test_conic_with_parameter():
    reg = _conic_registry(("c",))
    U, V, L = parametrize_conic(*_conic(reg, "v**2 - u**2 - c**2"))
    assert U == reg.parse_poly("(w**2-c**2)/(2*w)")
    assert V == reg.parse_poly("(w**2+c**2)/(2*w)")


def test_conic_without_rational_points():
    reg = _conic_registry()
    with pytest.raises(NoRationalPointFound):
        parametrize_conic(*_conic(reg, "u**2 + v**2 + 1"))


small = st.integers(-6, 6)


@settings(max_examples=50, deadline=None)
@given(small, small, small, small, small, small, small)
def test_planted_conics(a, b, c, d, e, u0, v0):
    reg = _conic_registry()
    u, v, w = reg.var("u"), reg.var("v"), reg.var("w")
    quad = a * u**2 + b * u * v + c * v**2
    assume(quad)
    f = -(a * u0**2 + b * u0 * v0 + c * v0**2 + d * u0 + e * v0)
    conic = quad + d * u + e * v + f
    # irreducible iff the 3x3 symmetric matrix is nonsingular
    M = [[2 * a, b, d], [b, 2 * c, e], [d, e, 2 * f]]
    det = (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
           - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
           + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))
    assume(det != 0)
    U, V, L = parametrize_conic(conic, reg.index["u"], reg.index["v"], reg.index["w"])
    assert not substitute(conic, {"u": U, "v": V})
    assert substitute(L, {"u": U, "v": V}) == w


def test_curve_inversion_examples():
    t = make_tower(["x+1"])
    reg = t.registry
    z = [reg.index["z"]]
    q = Parametrization([reg.parse_poly("z**2-1")], [reg.var("z")], z)
    raw, reduced = invert_curve_parametrization(q, t)
    assert reduced == [reg.var("d1")]
    cube = RadicalTower.from_radicands(make_registry(n_radicals=1), [(2, "x**3")])
    reg = cube.registry
    q = Parametrization([reg.parse_poly("z**2")], [reg.parse_poly("z**3")], [reg.index["z"]])
    raw, _ = invert_curve_parametrization(q, cube)
    assert substitute(raw[0], {"x": q.x[0], "d1": q.d[0]}) == reg.var("z")
    assert raw[0] == reg.parse_poly("d1/x")


def test_improper_parametrization_rejected():
    t = make_tower(["x"])
    reg = t.registry
    q = Parametrization([reg.parse_poly("z**4")], [reg.parse_poly("z**2")], [reg.index["z"]])
    with pytest.raises(NotProper):
        invert_curve_parametrization(q, t)


coef = st.integers(-4, 4)


@settings(max_examples=40, deadline=None)
@given(coef, coef, coef, st.integers(1, 3))
def test_planted_rational_towers_never_non_rational(a, b, c, k):
    # sqrt(x + k) then a radicand quadratic in the first radical: a rational curve
    assume(a or b)
    t, _ = simplify_radicals(make_tower([f"x + {k}", f"{a}*d1**2 + {b}*d1 + {c}"]))
    try:
        radical_degree_check(t)
    except DegenerateTower:
        assume(False)
    out = parametrize_tower(t)
    assert out.status in (FOUND, UNKNOWN)
    if out.status == FOUND:
        assert verify_parametrization(t, out.parametrization)


@settings(max_examples=30, deadline=None)
@given(st.integers(-5, 5), st.integers(1, 4), st.integers(-5, 5))
def test_planted_square_factor(s, m, k):
    # (x + s)^2 * (quadratic) is genus zero whatever the square factor
    t, _ = simplify_radicals(make_tower([f"(x + {s})**{2 * m} * (x**2 + {k})"]))
    out = parametrize_tower(t)
    assert out.status in (FOUND, UNKNOWN)
