"""Render field elements and differential polynomials in the input grammar."""

from __future__ import annotations

from ..kernel import to_fraction
from .expr import format_deriv

_ATOMIC_CALLS = ("sqrt(", "root(", "diff(")


def _is_atomic(text):
    if text.isidentifier() or text.isdigit():
        return True
    if text.startswith(_ATOMIC_CALLS) and _balanced_call(text):
        return True
    return False


def _balanced_call(text):
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0 and i != len(text) - 1:
                return False
    return depth == 0 and text.endswith(")")


def _power(base, e):
    if e == 1:
        return base
    if not _is_atomic(base) or "'" in base:
        base = f"({base})"
    return f"{base}^{e}"


def _monomial(monom, names):
    parts = [_power(names[i], e) for i, e in enumerate(monom) if e]
    return "*".join(parts)


def _terms(p, names):
    """(sign, magnitude text) per term, in the ring's term order."""
    out = []
    for monom, c in p.terms():
        c = to_fraction(c)
        sign = -1 if c < 0 else 1
        c = abs(c)
        mono = _monomial(monom, names)
        if not mono:
            text = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
        elif c == 1:
            text = mono
        elif c.denominator == 1:
            text = f"{c.numerator}*{mono}"
        else:
            text = f"{c.numerator}/{c.denominator}*{mono}"
        out.append((sign, text))
    return out


def _join(terms):
    if not terms:
        return "0"
    # lead with a positive term when there is one
    if terms[0][0] < 0:
        for k, (sign, _) in enumerate(terms):
            if sign > 0:
                terms = [terms[k]] + terms[:k] + terms[k + 1:]
                break
    first_sign, first = terms[0]
    s = ("-" if first_sign < 0 else "") + first
    for sign, text in terms[1:]:
        s += (" - " if sign < 0 else " + ") + text
    return s


def format_poly(p, names):
    """Polynomial as text; ``names`` lists the rendering of each generator."""
    return _join(_terms(p, names))


def format_ratfunc(f, names):
    num, den = f.numer, f.denom
    if den != 1 and all(to_fraction(c) < 0 for c in num.values()):
        num, den = -num, -den
    ntext = format_poly(num, names)
    if den == 1:
        return ntext
    if den.is_ground:
        c = to_fraction(den.LC)
        return f"{_wrap_div(ntext, len(num.terms()))}/{c}"
    dtext = format_poly(den, names)
    dterms = den.terms()
    datomic = len(dterms) == 1 and to_fraction(dterms[0][1]) == 1 and _is_atomic(dtext)
    return f"{_wrap_div(ntext, len(num.terms()))}/{dtext if datomic else '(' + dtext + ')'}"


def _wrap_div(text, n_terms):
    if n_terms > 1 or text.startswith("-"):
        return f"({text})"
    return text


def generator_names(registry):
    return list(registry.names)


def format_jet_monomial(mono, unknown_names, var_names):
    parts = []
    for (u, index), e in mono:
        parts.append(_power(format_deriv(unknown_names[u], index, var_names), e))
    return "*".join(parts)


def format_diffpoly(g, names, unknown_names, var_names):
    """Differential polynomial as ``coeff*jets + ...`` in canonical order."""
    terms = []
    for mono, c in g.sorted_terms():
        jets = format_jet_monomial(mono, unknown_names, var_names)
        if c.denom != 1:
            ctext = format_ratfunc(c, names)
            sign = 1
            body = f"({ctext})" if jets else ctext
            terms.append((sign, f"{body}*{jets}" if jets else body))
            continue
        cterms = _terms(c.numer, names)
        if len(cterms) == 1:
            sign, mag = cterms[0]
            if not jets:
                terms.append((sign, mag))
            elif mag == "1":
                terms.append((sign, jets))
            else:
                terms.append((sign, f"{mag}*{jets}"))
        else:
            text = _join(cterms)
            terms.append((1, f"({text})*{jets}" if jets else f"({text})" if terms else text))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    s = ("-" if first_sign < 0 else "") + first
    for sign, text in terms[1:]:
        s += (" - " if sign < 0 else " + ") + text
    return s


__all__ = ["format_poly", "format_ratfunc", "format_diffpoly", "format_jet_monomial",
           "generator_names"]
