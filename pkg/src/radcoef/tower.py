"""Tower variety equations, field degree, tracing index, parametrization checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .frontend.radicals import DegenerateTower, RadicalTower, radical_degree_check
from .kernel import (coeffs_in, degree_in, differentiate, field_det, primitive_integer,
                     resultant, squarefree_part, substitute, variables_of)

LAMBDA_RANGE = 9
RETRY_BUDGET = 5


@dataclass(frozen=True)
class TowerIdeal:
    generators: tuple  # PolyElements, one per step
    base: tuple  # generator indices of the base variables
    radicals: tuple  # generator indices of d_1..d_m

    def __len__(self):
        return len(self.generators)


def tower_equations(tower: RadicalTower) -> TowerIdeal:
    """``d_i**e_i * den(alpha_i) - num(alpha_i)``, content-normalized."""
    gens = []
    for step, g in zip(tower.steps, tower.equations()):
        g, _ = primitive_integer(g)
        lead = coeffs_in(g, step.symbol)[-1]
        if lead.LC < 0:
            g = -g
        gens.append(g)
    reg = tower.registry
    base = tuple(reg.index[n] for n in reg.names_of("base"))
    return TowerIdeal(tuple(gens), base, tuple(tower.symbols))


def field_degree(tower: RadicalTower) -> int:
    """``[F_m : Q(params, x)]`` for a simplified tower.

    Each step ``d**e = alpha`` is a binomial extension; it has full degree
    ``e`` unless ``alpha`` is a ``p``-th power below it for a prime ``p | e``
    (or ``-4`` times a fourth power when ``4 | e``). A step failing that test
    raises :class:`DegenerateTower`.
    """
    degree = 1
    for e in radical_degree_check(tower):
        degree *= e
    return degree


@dataclass
class TracingReport:
    total_degree: int
    image_degree: int
    index: int
    certified: bool
    retries: int
    draws: list = field(default_factory=list)

    def as_dict(self):
        return {
            "total_degree": self.total_degree,
            "image_degree": self.image_degree,
            "tracing_index": self.index,
            "certified": self.certified,
            "retries": self.retries,
        }


def element_degree(tower: RadicalTower, u, aux_symbol) -> int:
    """Degree over Q(params, x) of the minimal polynomial of a tower element.

    The norm of ``U - u`` down the tower is obtained by successive resultants
    against the step equations; its squarefree part in ``U`` is the minimal
    polynomial up to a factor free of ``U``.
    """
    ring = tower.registry.ring
    U = ring.gens[aux_symbol]
    u = tower.reduce(u)
    p = U * u.denom - u.numer
    eqs = tower.equations()
    for i in range(len(tower) - 1, -1, -1):
        sym = tower.steps[i].symbol
        if degree_in(p, sym) > 0:
            p = resultant(p, eqs[i], sym)
    if degree_in(p, aux_symbol) <= 0:
        raise ArithmeticError("norm elimination lost the auxiliary variable")
    return degree_in(squarefree_part(p, aux_symbol), aux_symbol)


def tracing_index(tower: RadicalTower, coeffs, seed=0, budget=RETRY_BUDGET) -> TracingReport:
    """Tracing index ``T = D / [Q(x)(a) : Q(x)]`` of a coefficient list.

    The image field is generated by a random integer combination of the
    coefficients; draws repeat until the largest degree seen has been seen
    twice (certified) or the retry budget runs out.
    """
    if not coeffs:
        raise ValueError("tracing index needs at least one coefficient")
    D = field_degree(tower)
    reg = tower.registry
    aux = reg.index[reg.names_of("aux")[-1]]
    rng = random.Random(seed)
    draws = []
    best = 0
    hits = 0
    certified = False
    tries = 0
    while tries < budget:
        tries += 1
        lam = [rng.randint(-LAMBDA_RANGE, LAMBDA_RANGE) for _ in coeffs]
        if not any(lam):
            lam[0] = 1
        u = sum((l * c for l, c in zip(lam, coeffs) if l), tower.field.zero)
        deg = element_degree(tower, u, aux) if u else 1
        draws.append((tuple(lam), deg))
        if deg > best:
            best, hits = deg, 1
        elif deg == best:
            hits += 1
        if hits >= 2:
            certified = True
            break
    if D % best:
        raise ArithmeticError(f"image degree {best} does not divide tower degree {D}")
    return TracingReport(D, best, D // best, certified, tries - 1, draws)


# ---------------------------------------------------------------------------
# parametrization checks


@dataclass
class Verdict:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _bindings(tower, q):
    reg = tower.registry
    out = {}
    for name, comp in zip(reg.names_of("base"), q.x):
        out[reg.index[name]] = comp
    for step, comp in zip(tower.steps, q.d):
        out[step.symbol] = comp
    return out


def jacobian(components, fresh):
    return [[differentiate(c, z) for z in fresh] for c in components]


def verify_parametrization(tower: RadicalTower, q, check_inverse=True) -> Verdict:
    """Symbolic check that ``q`` parametrizes the tower variety.

    ``q`` supplies ``x`` (base components), ``d`` (radical components),
    ``z`` (fresh generator indices) and optionally ``inverse``.
    """
    failures = []
    reg = tower.registry
    if len(q.x) != len(reg.names_of("base")) or len(q.d) != len(tower):
        return Verdict(False, ["parametrization has the wrong number of components"])
    binding = _bindings(tower, q)
    for step, g in zip(tower.steps, tower.equations()):
        value = substitute(tower.field(g), binding)
        if value:
            failures.append(f"{step.name}^{step.index} - ({step.radicand.as_expr()}) "
                            f"does not vanish: {value.as_expr()}")
    if len(q.z) == len(q.x):
        det = field_det(jacobian(q.x, q.z))
        if not det:
            failures.append("Jacobian of the base components is singular")
    else:
        failures.append("number of fresh variables differs from the number of base variables")
    if check_inverse and q.inverse is not None:
        for k, (h, z) in enumerate(zip(q.inverse, q.z)):
            back = substitute(h, binding)
            if back != tower.field.gens[z]:
                failures.append(f"inverse component {k + 1} does not recover "
                                f"{reg.names[z]}: got {back.as_expr()}")
    return Verdict(not failures, failures)


def is_radical_free(tower: RadicalTower, f) -> bool:
    return not (variables_of(f) & set(tower.symbols))


__all__ = ["TowerIdeal", "TracingReport", "Verdict", "tower_equations", "field_degree",
           "tracing_index", "element_degree", "verify_parametrization", "jacobian",
           "DegenerateTower", "is_radical_free"]
