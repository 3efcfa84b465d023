import random
from fractions import Fraction

import mpmath
import pytest

from radcoef.frontend.expr import Declarations, parse_equation
from radcoef.frontend.extract import extract_tower
from radcoef.frontend.radicals import RadicalTower
from radcoef.kernel import VarRegistry, eval_numeric

SQRT_PAIR = "((14*x+12)*sqrt(x)+(13*x+4)*sqrt(x+1))*y+4*(x^2+x)*(y')^2"
HALF_POWER = "8*(y')^3*(x+1)^(3/2) - 2*a*(x+1)*y*y' + 2*a*y^2"
HYPERBOLA = "a*y*y''+b*(y')^2-y*y'/sqrt(c^2+x^2)"
NESTED_PDE = ("(-sqrt(x2)*diff(y,x3)+2*diff(y,x1))*sqrt(x1+sqrt(x2)) "
              "+ 2*sqrt(x2)*diff(y,x2) - y^2 - diff(y,x1)")
CONE = "diff(u,x1)^2 + diff(u,x2)^2 = 1/sqrt(x1^2+x2^2)"
CONE_SUBST = "x1=2*z1*z2/(z1^2+1); x2=z2*(z1^2-1)/(z1^2+1); d1=z2"
GENUS_ONE = "y' - y*sqrt(x^3-1)"
QUINTIC = "y' - y*root(x^5+x+1,5)"

DECL_X = Declarations(("x",), ("y",), ())
DECL_A = Declarations(("x",), ("y",), ("a",))
DECL_ABC = Declarations(("x",), ("y",), ("a", "b", "c"))
DECL_PDE3 = Declarations(("x1", "x2", "x3"), ("y",), ())
DECL_CONE = Declarations(("x1", "x2"), ("u",), ())


def make_registry(base=("x",), params=(), n_radicals=2, fresh=None, n_aux=6):
    if fresh is None:
        fresh = ("z",) if len(base) == 1 else tuple(f"z{i + 1}" for i in range(len(base)))
    return VarRegistry.build(params=params, base=base, n_radicals=n_radicals, fresh=fresh,
                             n_aux=n_aux)


def make_tower(radicands, base=("x",), params=(), index=2):
    """Tower with one step per radicand string, all of the same index unless
    given as ``(e, text)`` pairs."""
    reg = make_registry(base, params, n_radicals=len(radicands))
    steps = [r if isinstance(r, tuple) else (index, r) for r in radicands]
    return RadicalTower.from_radicands(reg, steps)


def extracted(text, decl):
    if isinstance(text, list):
        return extract_tower([parse_equation(t, decl) for t in text], decl)
    return extract_tower(parse_equation(text, decl), decl)


def eval_diffpoly(p, point, jets, precision=128):
    """Numeric value of a DiffPoly; ``point`` keyed by generator index."""
    ctx = mpmath.MPContext()
    ctx.prec = precision
    total = ctx.mpc(0)
    for mono, c in p.terms.items():
        v = ctx.mpc(eval_numeric(c, point, precision))
        for jet, e in mono:
            v *= ctx.mpmathify(jets[jet]) ** e
        total += v
    return total


def rand_frac(rng, bound=50, positive=False):
    num = rng.randint(1 if positive else -bound, bound)
    return Fraction(num, rng.randint(1, bound))


@pytest.fixture
def rng():
    return random.Random(20261016)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(f"criterion {n}: {mod.RESULTS[n]}")
