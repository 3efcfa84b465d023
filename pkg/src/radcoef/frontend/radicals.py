"""Radical towers and arithmetic in tower normal form.

A tower is a list of steps ``d_i**e_i = alpha_i`` where ``alpha_i`` involves
the base variables, the parameters and earlier ``d_j`` only. Elements are
rational functions in the registry field kept in *tower normal form*: every
``d_i`` exponent is below ``e_i`` and the denominator is free of radicals.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from ..kernel import (coeffs_in, degree_in, power_split, primitive_integer,
                      ratfunc_root, substitute, variables_of)


class DegenerateTower(ZeroDivisionError):
    """A step does not enlarge the field (its radicand is already a power)."""


@dataclass(frozen=True)
class Step:
    symbol: int
    name: str
    index: int
    radicand: object  # FracElement in tower normal form w.r.t. earlier steps


class RadicalTower:
    """Chain of radical extensions over QQ(params, base variables).

    Steps are appended only while a tower is being built (extraction and
    simplification); afterwards a tower is treated as immutable.
    """

    def __init__(self, registry, steps=()):
        self.registry = registry
        self.field = registry.field
        self._radicals = [registry.index[n] for n in registry.names_of("radical")]
        self.steps = list(steps)

    # -- construction -----------------------------------------------------

    def _append(self, index, radicand):
        k = len(self.steps)
        if k >= len(self._radicals):
            raise RuntimeError("registry has no radical symbol left for a new step")
        sym = self._radicals[k]
        step = Step(sym, self.registry.names[sym], index, radicand)
        self.steps.append(step)
        return step

    @classmethod
    def from_radicands(cls, registry, steps):
        """Tower from ``[(e, radicand), ...]``; radicands may be strings."""
        tower = cls(registry)
        for e, alpha in steps:
            if isinstance(alpha, str):
                alpha = registry.parse_poly(alpha)
            tower._append(e, tower.reduce(alpha))
        return tower

    def prefix(self, k):
        return RadicalTower(self.registry, self.steps[:k])

    def copy(self):
        return RadicalTower(self.registry, self.steps)

    def __len__(self):
        return len(self.steps)

    def __repr__(self):
        body = ", ".join(f"{s.name}^{s.index} = {s.radicand.as_expr()}" for s in self.steps)
        return f"RadicalTower([{body}])"

    @property
    def symbols(self):
        return [s.symbol for s in self.steps]

    def step_of(self, symbol):
        for i, s in enumerate(self.steps):
            if s.symbol == symbol:
                return i
        raise KeyError(symbol)

    def gen(self, i):
        return self.field.gens[self.steps[i].symbol]

    def find_step(self, index, radicand):
        for s in self.steps:
            if s.index == index and s.radicand == radicand:
                return s
        return None

    # -- normal form --------------------------------------------------------

    def radicals_in(self, f):
        used = variables_of(f)
        return [i for i, s in enumerate(self.steps) if s.symbol in used]

    def is_rational(self, f):
        return not self.radicals_in(f)

    def reduce(self, f):
        """Tower normal form of a field element."""
        field = self.field
        if not self.steps:
            return f
        den_used = variables_of(f.denom) & set(self.symbols)
        if den_used:
            num = self._reduce_exponents(field(f.numer))
            den = self._reduce_exponents(field(f.denom))
            return self._reduce_exponents(num * self.inverse(den))
        return self._reduce_exponents(f)

    def _reduce_exponents(self, f):
        field = self.field
        for i in range(len(self.steps) - 1, -1, -1):
            step = self.steps[i]
            num = f.numer
            if degree_in(num, step.symbol) < step.index:
                continue
            e = step.index
            d = field.gens[step.symbol]
            powers = {}
            total = field.zero
            for k, c in enumerate(coeffs_in(num, step.symbol)):
                if not c:
                    continue
                q, r = divmod(k, e)
                if q not in powers:
                    powers[q] = step.radicand**q
                total += field(c) * d**r * powers[q]
            f = total / field(f.denom)
        return f

    def inverse(self, f):
        """Multiplicative inverse of a nonzero element, in normal form."""
        field = self.field
        if not f:
            raise ZeroDivisionError("inverse of zero in a radical tower")
        f = self._reduce_exponents(f) if not (variables_of(f.denom) & set(self.symbols)) \
            else self.reduce(f)
        num, den = f.numer, f.denom
        present = self.radicals_in(field(num))
        if not present:
            return field(den) / field(num)
        top = max(present)
        step = self.steps[top]
        e = step.index
        b = [field(c) for c in coeffs_in(num, step.symbol)]
        b += [field.zero] * (e - len(b))
        # column c holds the coordinates of num * d**c in the basis 1, d, ..., d**(e-1)
        M = [[field.zero] * e for _ in range(e)]
        for c in range(e):
            for k in range(e):
                if not b[k]:
                    continue
                s = k + c
                if s < e:
                    M[s][c] += b[k]
                else:
                    M[s - e][c] += b[k] * step.radicand
        lower = self.prefix(top)
        M = [[lower.reduce(a) for a in row] for row in M]
        rhs = [field.one] + [field.zero] * (e - 1)
        x = lower._solve(M, rhs)
        d = field.gens[step.symbol]
        result = sum((xj * d**j for j, xj in enumerate(x)), field.zero)
        return self._reduce_exponents(result * field(den))

    def _solve(self, M, rhs):
        n = len(M)
        A = [list(row) + [r] for row, r in zip(M, rhs)]
        for col in range(n):
            piv = next((r for r in range(col, n) if A[r][col]), None)
            if piv is None:
                raise DegenerateTower("tower relation is reducible: zero divisor found")
            A[col], A[piv] = A[piv], A[col]
            inv = self.inverse(A[col][col])
            A[col] = [self.reduce(a * inv) for a in A[col]]
            for r in range(n):
                if r != col and A[r][col]:
                    fac = A[r][col]
                    A[r] = [self.reduce(a - fac * b) for a, b in zip(A[r], A[col])]
        return [row[n] for row in A]

    def elem(self, f):
        return TowerElem(self, f)

    def equations(self):
        """Defining polynomials ``d_i**e_i * den(alpha_i) - num(alpha_i)``."""
        out = []
        for s in self.steps:
            d = self.registry.ring.gens[s.symbol]
            out.append(d**s.index * s.radicand.denom - s.radicand.numer)
        return out


class TowerElem:
    """Element of the top field of a tower, stored in normal form."""

    __slots__ = ("tower", "value")

    def __init__(self, tower, value, reduced=False):
        if not hasattr(value, "numer"):
            value = tower.field(value)
        self.tower = tower
        self.value = value if reduced else tower.reduce(value)

    def _coerce(self, other):
        if isinstance(other, TowerElem):
            return other.value
        if hasattr(other, "numer"):
            return other
        return self.tower.field(other)

    def __add__(self, other):
        return TowerElem(self.tower, self.value + self._coerce(other), reduced=True)

    __radd__ = __add__

    def __sub__(self, other):
        return TowerElem(self.tower, self.value - self._coerce(other), reduced=True)

    def __rsub__(self, other):
        return TowerElem(self.tower, self._coerce(other) - self.value, reduced=True)

    def __neg__(self):
        return TowerElem(self.tower, -self.value, reduced=True)

    def __mul__(self, other):
        return TowerElem(self.tower, self.value * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self.tower.inverse(self._coerce(other))

    def __rtruediv__(self, other):
        return TowerElem(self.tower, self._coerce(other)) / self

    def __pow__(self, k):
        if k < 0:
            return TowerElem(self.tower, self.tower.inverse(self.value)) ** (-k)
        result = TowerElem(self.tower, self.tower.field.one, reduced=True)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        return self.value == self._coerce(other)

    def __hash__(self):
        return hash(self.value)

    def __bool__(self):
        return bool(self.value)

    def __repr__(self):
        return f"TowerElem({self.value.as_expr()})"

    @property
    def num(self):
        return self.value.numer

    @property
    def den(self):
        return self.value.denom

    def is_rational(self):
        return self.tower.is_rational(self.value)


# ---------------------------------------------------------------------------
# perfect powers inside a tower

#: cap on the number of exponent vectors tried in the Kummer search
KUMMER_LIMIT = 4096


def tower_root(tower: RadicalTower, alpha, e):
    """An element ``r`` of the tower field with ``r**e == alpha`` or ``None``.

    Complete for radicands free of radicals over towers whose steps have
    radical-free radicands (Kummer: ``alpha * prod(alpha_j**k_j)`` must be an
    e-th power of a rational function). For square roots of ``a + b*d_j`` the
    classical denesting test is applied recursively. Other nested cases may
    be missed, which only leaves a redundant step in the tower.
    """
    field = tower.field
    if not alpha:
        return alpha
    present = tower.radicals_in(alpha)
    if not present:
        r = ratfunc_root(alpha, e)
        if r is not None:
            return r
        cand = [i for i, s in enumerate(tower.steps)
                if s.index == e and tower.is_rational(s.radicand)]
        if not cand or e ** len(cand) > KUMMER_LIMIT:
            return None
        for ks in product(range(e), repeat=len(cand)):
            if not any(ks):
                continue
            val = alpha
            for i, k in zip(cand, ks):
                if k:
                    val = val * tower.steps[i].radicand**k
            r = ratfunc_root(val, e)
            if r is not None:
                mono = field.one
                for i, k in zip(cand, ks):
                    if k:
                        mono = mono * tower.gen(i) ** k
                return tower.reduce(r * tower.inverse(tower.reduce(mono)))
        return None
    if e != 2:
        return None
    top = max(present)
    step = tower.steps[top]
    if step.index != 2 or degree_in(alpha.numer, step.symbol) != 1:
        return None
    lower = tower.prefix(top)
    cs = coeffs_in(alpha.numer, step.symbol)
    den = field(alpha.denom)
    a = field(cs[0]) / den
    b = field(cs[1]) / den
    c = step.radicand
    disc = lower.reduce(a * a - b * b * c)
    s = tower_root(lower, disc, 2)
    if s is None:
        return None
    for sign in (1, -1):
        t = lower.reduce((a + sign * s) / 2)
        if not t:
            continue
        p = tower_root(lower, t, 2)
        if p is None or not p:
            continue
        q = lower.reduce(b * lower.inverse(2 * p))
        root = tower.reduce(p + q * tower.gen(top))
        if tower.reduce(root * root - alpha) == 0:
            return root
    return None


def _content_split(tower, alpha, e):
    """Write ``alpha = outer**e * inner`` with ``inner`` a polynomial.

    ``outer`` collects e-th power factors of the radical-free content of the
    numerator together with the denominator.
    """
    field = tower.field
    ring = field.ring
    num, den = alpha.numer, alpha.denom
    syms = set(tower.symbols)
    groups = {}
    for monom, c in num.iterterms():
        key = tuple(monom[i] if i in syms else 0 for i in range(len(monom)))
        rest = tuple(0 if i in syms else monom[i] for i in range(len(monom)))
        groups.setdefault(key, {})[rest] = c
    content = None
    for part in groups.values():
        p = ring.from_dict(part)
        content = p if content is None else content.gcd(p)
    content = content.monic()
    rest = num.exquo(content)
    rest, scale = primitive_integer(rest)
    content = content.quo_ground(scale)
    outer, inner = power_split(content * den ** (e - 1), e)
    return field(outer) / field(den), inner * rest


def simplify_radicals(tower: RadicalTower):
    """Canonicalize a tower.

    Returns ``(new_tower, rewrite)`` where ``rewrite`` maps each old radical
    symbol to its expression over the new tower. Power factors are pulled out
    formally (``sqrt(p**2 * q) = p*sqrt(q)``), radicands become polynomials,
    exact powers eliminate their step and equal radicands share one step.
    """
    new = RadicalTower(tower.registry)
    rewrite = {}
    for step in tower.steps:
        alpha = step.radicand
        if rewrite:
            alpha = substitute(alpha, rewrite)
        alpha = new.reduce(alpha)
        rewrite[step.symbol] = _simplify_step(new, alpha, step.index)
    return new, rewrite


def _simplify_step(new, alpha, e):
    field = new.field
    factor = field.one
    while True:
        if not alpha:
            return field.zero
        reduced = False
        for g in sorted((g for g in range(2, e + 1) if e % g == 0), reverse=True):
            root = tower_root(new, alpha, g)
            if root is not None:
                if g == e:
                    return new.reduce(factor * root)
                alpha, e = root, e // g
                reduced = True
                break
        if not reduced:
            break
    outer, inner = _content_split(new, alpha, e)
    factor = factor * outer
    inner = field(inner)
    if e > 1:
        root = tower_root(new, inner, e)
        if root is not None:
            return new.reduce(factor * root)
    existing = new.find_step(e, inner)
    if existing is None:
        existing = new._append(e, inner)
    return new.reduce(factor * field.gens[existing.symbol])


def radical_degree_check(tower: RadicalTower):
    """Per-step extension degrees; raises :class:`DegenerateTower` on a
    step whose radicand is a p-th power below it for a prime ``p | e``."""
    degrees = []
    for i, step in enumerate(tower.steps):
        lower = tower.prefix(i)
        e = step.index
        for p in _prime_divisors(e):
            if tower_root(lower, step.radicand, p) is not None:
                raise DegenerateTower(
                    f"step {step.name}: radicand is a perfect power (exponent {p}) "
                    f"of an element below it")
        if e % 4 == 0:
            minus = tower_root(lower, -step.radicand / 4, 4)
            if minus is not None:
                raise DegenerateTower(f"step {step.name}: radicand is -4 times a 4th power")
        degrees.append(e)
    return degrees


def _prime_divisors(n):
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


__all__ = ["RadicalTower", "TowerElem", "Step", "DegenerateTower", "tower_root",
           "simplify_radicals", "radical_degree_check"]
