"""Exact arithmetic layer.

Polynomials and rational functions live in a sympy sparse fraction field
over QQ whose generators are declared once per job in a :class:`VarRegistry`.
``MPoly`` is sympy's ``PolyElement`` and ``RatFunc`` its ``FracElement``;
both are immutable and canonical (gcd-reduced, graded-lex term order).

Elimination (pseudo-remainders, the subresultant PRS and resultants) and
numeric evaluation are implemented here on top of that representation.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import count

import mpmath
from sympy import QQ
from sympy.core.intfunc import integer_nthroot
from sympy.polys.fields import FracElement, FracField
from sympy.polys.orderings import grlex

KINDS = ("param", "base", "radical", "fresh", "aux")

#: extra bits carried by :func:`eval_numeric` beyond the requested precision
GUARD_BITS = 32


class DenominatorVanishes(ZeroDivisionError):
    pass


class PrecisionLoss(ArithmeticError):
    pass


class VarRegistry:
    """Ordered, kind-tagged variable names backing one sympy fraction field."""

    def __init__(self, entries):
        names = [name for name, _ in entries]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        for name, kind in entries:
            if kind not in KINDS:
                raise ValueError(f"unknown variable kind {kind!r} for {name}")
        self.entries = tuple(entries)
        self.names = tuple(names)
        self.field = FracField(list(names), QQ, grlex)
        self.ring = self.field.ring
        self.index = {name: i for i, name in enumerate(names)}

    @classmethod
    def build(cls, params=(), base=(), n_radicals=0, fresh=(), n_aux=0,
              radical_prefix="d", aux_prefix="_t"):
        entries = [(p, "param") for p in params]
        entries += [(x, "base") for x in base]
        entries += [(f"{radical_prefix}{i + 1}", "radical") for i in range(n_radicals)]
        entries += [(z, "fresh") for z in fresh]
        entries += [(f"{aux_prefix}{i + 1}", "aux") for i in range(n_aux)]
        return cls(entries)

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self.index

    def kind(self, name):
        return self.entries[self.index[name]][1]

    def names_of(self, kind):
        return [n for n, k in self.entries if k == kind]

    def var(self, name):
        """Generator ``name`` as a rational function."""
        return self.field.gens[self.index[name]]

    def pvar(self, name):
        """Generator ``name`` as a polynomial."""
        return self.ring.gens[self.index[name]]

    def const(self, value):
        return self.field(_to_qq(value))

    def transfer(self, f, rename=None):
        """Re-express an element of another registry's field in this one.

        Variables are matched by name (after ``rename``); every variable used
        by ``f`` must exist here.
        """
        return move_to_field(f, self.field, rename)

    def parse_poly(self, text):
        """Convenience for tests: parse a sympy-syntax string into a RatFunc."""
        from sympy import sympify, Symbol
        expr = sympify(text, locals={n: Symbol(n) for n in self.names})
        return self.field.from_expr(expr)


def move_to_field(f, field, rename=None):
    """Element ``f`` of one fraction field rewritten in ``field``, matching
    generators by name."""
    rename = rename or {}
    src = [str(g) for g in f.field.ring.gens]
    target = {str(g): i for i, g in enumerate(field.ring.gens)}
    pos = [target.get(rename.get(n, n)) for n in src]
    size = len(target)
    ring = field.ring

    def move(p):
        out = {}
        for monom, c in p.iterterms():
            m = [0] * size
            for i, e in enumerate(monom):
                if e:
                    if pos[i] is None:
                        raise KeyError(f"variable {src[i]} is not in the target field")
                    m[pos[i]] = e
            out[tuple(m)] = c
        return ring.from_dict(out)

    return field.new(move(f.numer), move(f.denom))


def _to_qq(value):
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    return QQ.convert(value)


def to_fraction(c) -> Fraction:
    return Fraction(int(QQ.numer(c)), int(QQ.denom(c)))


def _gen_index(ring, v):
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        return [str(g) for g in ring.gens].index(v)
    if isinstance(v, FracElement):
        v = v.numer
    return ring.gens.index(v)


def variables_of(f):
    """Indices of the generators occurring in a polynomial or rational function."""
    polys = (f.numer, f.denom) if isinstance(f, FracElement) else (f,)
    used = set()
    for p in polys:
        for monom in p.itermonoms():
            used.update(i for i, e in enumerate(monom) if e)
    return used


def is_free_of(f, indices) -> bool:
    return not (variables_of(f) & set(indices))


# ---------------------------------------------------------------------------
# polynomial helpers


def degree_in(p, v) -> int:
    """Degree of ``p`` in generator ``v`` (``-1`` for the zero polynomial)."""
    if not p:
        return -1
    i = _gen_index(p.ring, v)
    return max(m[i] for m in p.itermonoms())


def coeffs_in(p, v):
    """Coefficients of ``p`` viewed as a univariate polynomial in ``v``.

    Returned low degree first; each coefficient lies in the same ring and is
    free of ``v``.
    """
    ring = p.ring
    i = _gen_index(ring, v)
    out = {}
    for monom, c in p.iterterms():
        k = monom[i]
        reduced = monom[:i] + (0,) + monom[i + 1:]
        out.setdefault(k, {})[reduced] = c
    if not out:
        return []
    return [ring.from_dict(out.get(k, {})) for k in range(max(out) + 1)]


def from_coeffs(coeffs, v, ring):
    i = _gen_index(ring, v)
    gen = ring.gens[i]
    result = ring.zero
    for k, c in enumerate(coeffs):
        if c:
            result += c * gen**k
    return result


def normalize_poly(p):
    """Monic in graded-lex order; the zero polynomial stays zero."""
    if not p:
        return p
    return p.monic()


def poly_gcd(p, q):
    """Monic greatest common divisor; ``poly_gcd(0, 0) == 0``."""
    if not p and not q:
        return p.ring.zero if hasattr(p, "ring") else q
    return normalize_poly(p.gcd(q))


def primitive_integer(p):
    """Scale ``p`` to integer coefficients with content 1 and positive LC.

    Returns ``(scaled, factor)`` with ``scaled == factor * p``.
    """
    if not p:
        return p, QQ(1)
    coeffs = [to_fraction(c) for c in p.values()]
    den = 1
    for c in coeffs:
        den = den * c.denominator // _gcd(den, c.denominator)
    num_gcd = 0
    for c in coeffs:
        num_gcd = _gcd(num_gcd, abs(c.numerator * (den // c.denominator)))
    factor = Fraction(den, num_gcd)
    if p.LC < 0:
        factor = -factor
    f = _to_qq(factor)
    return p.mul_ground(f), f


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------------------
# rational-function calculus


def differentiate(f, v):
    """Exact derivative of a rational function with respect to generator ``v``."""
    field = f.field
    i = _gen_index(field.ring, v)
    return f.diff(field.gens[i])


def substitute(f, bindings):
    """Simultaneously replace generators by rational functions.

    ``bindings`` maps generator indices (or names, resolved through
    ``f.field``) to rational functions of the same field.
    """
    field = f.field
    names = [str(g) for g in field.ring.gens]
    values = {}
    for key, val in bindings.items():
        idx = names.index(key) if isinstance(key, str) else key
        values[idx] = val if hasattr(val, "numer") else field(_to_qq(val))
    if not values:
        return f
    num = _eval_poly(f.numer, values, field)
    den = _eval_poly(f.denom, values, field)
    if not den:
        raise DenominatorVanishes("composed denominator is identically zero")
    return num / den


def substitute_poly(p, bindings, field):
    names = [str(g) for g in field.ring.gens]
    values = {}
    for key, val in bindings.items():
        idx = names.index(key) if isinstance(key, str) else key
        values[idx] = val
    return _eval_poly(p, values, field)


def _eval_poly(p, values, field):
    ring = field.ring
    bound = sorted(values)
    groups = {}
    for monom, c in p.iterterms():
        key = tuple(monom[i] for i in bound)
        rest = list(monom)
        for i in bound:
            rest[i] = 0
        groups.setdefault(key, {})[tuple(rest)] = c
    powers = {}

    def power(i, e):
        if (i, e) not in powers:
            powers[(i, e)] = values[i] ** e
        return powers[(i, e)]

    # accumulate over a common denominator to avoid a gcd per term
    num = ring.zero
    den = ring.one
    for key, rest in groups.items():
        term = field(ring.from_dict(rest))
        for i, e in zip(bound, key):
            if e:
                term = term * power(i, e)
        n, d = term.numer, term.denom
        if d == den:
            num += n
        else:
            g = d.gcd(den)
            num = num * d.exquo(g) + n * den.exquo(g)
            den = den * d.exquo(g)
    return field.new(num, den)


# ---------------------------------------------------------------------------
# elimination


def prem(a, b, v):
    """Pseudo-remainder of ``a`` by ``b`` in ``v``: lc(b)^(da-db+1)·a mod b."""
    ring = a.ring
    A = coeffs_in(a, v)
    B = coeffs_in(b, v)
    if not B:
        raise ZeroDivisionError("pseudo-division by zero")
    db = len(B) - 1
    if len(A) - 1 < db:
        return a
    lb = B[-1]
    A = list(A)
    e = len(A) - 1 - db + 1
    while len(A) - 1 >= db and any(A):
        da = len(A) - 1
        lead = A[-1]
        shift = da - db
        A = [c * lb for c in A]
        for k, bk in enumerate(B):
            A[k + shift] -= lead * bk
        A.pop()
        e -= 1
        while A and not A[-1]:
            A.pop()
    if e > 0:
        A = [c * lb**e for c in A]
    return from_coeffs(A, v, ring)


def subresultant_prs(p, q, v):
    """Subresultant polynomial remainder sequence of ``p`` and ``q`` in ``v``.

    Returns the list ``[p, q, S_1, S_2, ...]`` (after ordering by degree),
    stopping at the last nonzero member. Members are proportional to the
    determinantal subresultants of their degree.
    """
    if degree_in(p, v) < degree_in(q, v):
        p, q = q, p
    seq = [p, q]
    if not q:
        return seq[:1]
    A, B = p, q
    g = h = p.ring.one
    while degree_in(B, v) > 0:
        delta = degree_in(A, v) - degree_in(B, v)
        R = prem(A, B, v)
        if not R:
            break
        A, B = B, R.exquo(g * h**delta)
        g = coeffs_in(A, v)[-1]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = (g**delta).exquo(h ** (delta - 1))
        seq.append(B)
    return seq


def resultant(p, q, v):
    """Resultant of ``p`` and ``q`` with respect to ``v`` (subresultant PRS)."""
    ring = p.ring
    if not p or not q:
        return ring.zero
    m, n = degree_in(p, v), degree_in(q, v)
    if m == 0:
        return p**n
    if n == 0:
        return q**m
    sign = 1
    A, B = p, q
    if m < n:
        A, B = B, A
        if m % 2 and n % 2:
            sign = -sign
    g = h = ring.one
    while True:
        da, db = degree_in(A, v), degree_in(B, v)
        delta = da - db
        if da % 2 and db % 2:
            sign = -sign
        R = prem(A, B, v)
        if not R:
            return ring.zero
        A, B = B, R.exquo(g * h**delta)
        g = coeffs_in(A, v)[-1]
        if delta == 1:
            h = g
        elif delta > 1:
            h = (g**delta).exquo(h ** (delta - 1))
        if degree_in(B, v) == 0:
            break
    da = degree_in(A, v)
    if da == 1:
        res = B
    else:
        res = (B**da).exquo(h ** (da - 1))
    return res if sign > 0 else -res


def squarefree_part(p, v):
    """``p / gcd(p, dp/dv)``, normalized monic."""
    if not p:
        raise ValueError("squarefree part of the zero polynomial")
    i = _gen_index(p.ring, v)
    dp = p.diff(p.ring.gens[i])
    if not dp:
        return p.ring.one
    return normalize_poly(p.exquo(p.gcd(dp)))


# ---------------------------------------------------------------------------
# exact roots


def integer_root(n: int, e: int):
    """Exact integer e-th root of ``n`` or ``None`` (odd roots keep the sign)."""
    if n < 0:
        if e % 2 == 0:
            return None
        r = integer_root(-n, e)
        return None if r is None else -r
    r, exact = integer_nthroot(n, e)
    return r if exact else None


def rational_root_q(c, e):
    c = to_fraction(c)
    n = integer_root(c.numerator, e)
    d = integer_root(c.denominator, e)
    if n is None or d is None:
        return None
    return QQ(n, d)


def poly_root(p, e):
    """A polynomial ``r`` with ``r**e == p`` or ``None``."""
    if not p:
        return p
    coeff, factors = p.sqf_list()
    c = rational_root_q(coeff, e)
    if c is None:
        return None
    root = p.ring(c)
    for f, k in factors:
        if k % e:
            return None
        root *= f ** (k // e)
    return root


def ratfunc_root(f, e):
    """A rational function ``r`` with ``r**e == f`` or ``None``."""
    if not f:
        return f
    n = poly_root(f.numer, e)
    if n is None:
        return None
    d = poly_root(f.denom, e)
    if d is None:
        return None
    return f.field.new(n, d)


def power_split(p, e):
    """Write ``p = outer**e * inner`` pulling every e-th power factor out.

    Integer content is reduced by trial division against small primes; the
    sign of an even root stays inside ``inner``.
    """
    ring = p.ring
    coeff, factors = p.sqf_list()
    c = to_fraction(coeff)
    out_c, in_c = _split_rational(c, e)
    outer = ring(_to_qq(out_c))
    inner = ring(_to_qq(in_c))
    for f, k in factors:
        q, r = divmod(k, e)
        if q:
            outer *= f**q
        if r:
            inner *= f**r
    return outer, inner


def _split_rational(c: Fraction, e: int):
    sign = -1 if c < 0 else 1
    num_out, num_in = _split_int(abs(c.numerator), e)
    # 1/den = den^(e-1) / den^e
    den_out, den_in = _split_int(c.denominator ** (e - 1), e)
    outer = Fraction(num_out * den_out, c.denominator)
    inner = num_in * den_in
    if sign < 0:
        if e % 2:
            outer = -outer
        else:
            inner = -inner
    return outer, inner


def _split_int(n: int, e: int, bound: int = 10000):
    outer, inner = 1, 1
    r = integer_root(n, e)
    if r is not None:
        return r, 1
    for pr in _small_primes(bound):
        if pr**e > n:
            break
        k = 0
        while n % pr == 0:
            n //= pr
            k += 1
        if k:
            outer *= pr ** (k // e)
            inner *= pr ** (k % e)
    r = integer_root(n, e)
    if r is not None:
        outer *= r
    else:
        inner *= n
    return outer, inner


def _small_primes(bound):
    sieve = bytearray([1]) * (bound + 1)
    for i in range(2, bound + 1):
        if sieve[i]:
            yield i
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))


# ---------------------------------------------------------------------------
# linear algebra over the fraction field


def field_det(rows):
    """Determinant of a square matrix of field elements (Gaussian elimination)."""
    n = len(rows)
    if n == 0:
        return None
    field = _field_of(rows)
    M = [list(r) for r in rows]
    det = field.one
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            return field.zero
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        p = M[col][col]
        det *= p
        for r in range(col + 1, n):
            if M[r][col]:
                factor = M[r][col] / p
                M[r] = [a - factor * b for a, b in zip(M[r], M[col])]
    return det


def field_inverse(rows):
    """Inverse of a square matrix of field elements or ``None`` if singular."""
    n = len(rows)
    field = _field_of(rows)
    M = [list(r) + [field.one if i == j else field.zero for j in range(n)]
         for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [a / p for a in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                factor = M[r][col]
                M[r] = [a - factor * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def _field_of(rows):
    for r in rows:
        for a in r:
            if hasattr(a, "field"):
                return a.field
    raise ValueError("matrix has no field elements")


# ---------------------------------------------------------------------------
# numeric evaluation


def eval_numeric(f, point, precision=128):
    """Evaluate a rational function at a complex point.

    ``point`` maps variable names (or indices) to numbers accepted by mpmath
    (ints, Fractions, complex, mpc). Evaluation runs with ``GUARD_BITS`` extra
    bits; :class:`PrecisionLoss` is raised when the denominator is within the
    rounding noise of zero, i.e. below ``2**-precision`` times the magnitude
    of its largest term.
    """
    ctx = mpmath.MPContext()
    ctx.prec = precision + GUARD_BITS
    names = [str(g) for g in f.field.ring.gens]
    vals = {}
    for key, val in point.items():
        idx = names.index(key) if isinstance(key, str) else key
        vals[idx] = _to_mp(ctx, val)
    num, _ = _eval_poly_numeric(ctx, f.numer, vals, names)
    den, den_scale = _eval_poly_numeric(ctx, f.denom, vals, names)
    if den_scale == 0 or abs(den) <= den_scale * ctx.mpf(2) ** (-precision):
        raise PrecisionLoss("denominator vanishes at working precision")
    return ctx.mpc(num / den)


def _to_mp(ctx, val):
    if isinstance(val, Fraction):
        return ctx.mpf(val.numerator) / val.denominator
    if hasattr(val, "numerator") and hasattr(val, "denominator") and not isinstance(val, int):
        return ctx.mpf(int(val.numerator)) / int(val.denominator)
    return ctx.mpmathify(val)


def _eval_poly_numeric(ctx, p, vals, names):
    total = ctx.mpc(0)
    scale = ctx.mpf(0)
    for monom, c in p.iterterms():
        c = to_fraction(c)
        term = ctx.mpf(c.numerator) / c.denominator
        for i, e in enumerate(monom):
            if e:
                if i not in vals:
                    raise ValueError(f"no value supplied for variable {names[i]}")
                term = term * vals[i] ** e
        total += term
        scale = max(scale, abs(term))
    return total, scale


def eval_exact(f, point):
    """Evaluate a rational function at a rational point, returning a Fraction."""
    names = [str(g) for g in f.field.ring.gens]
    vals = {}
    for key, val in point.items():
        idx = names.index(key) if isinstance(key, str) else key
        vals[idx] = Fraction(val)

    def ev(p):
        total = Fraction(0)
        for monom, c in p.iterterms():
            term = to_fraction(c)
            for i, e in enumerate(monom):
                if e:
                    if i not in vals:
                        raise ValueError(f"no value supplied for variable {names[i]}")
                    term *= vals[i] ** e
            total += term
        return total

    den = ev(f.denom)
    if den == 0:
        raise DenominatorVanishes("denominator vanishes at the point")
    return ev(f.numer) / den


def fresh_names(prefix, taken, n):
    """``n`` names ``prefix1, prefix2, ...`` avoiding ``taken``."""
    out = []
    for i in count(1):
        name = f"{prefix}{i}"
        if name not in taken:
            out.append(name)
        if len(out) == n:
            return out
    return out
