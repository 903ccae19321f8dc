"""Exact GCDs, resultants and univariate root isolation.

Everything here works over Q(i) and treats Laurent inputs up to monomial
units: arguments are monomial-normalized before any elimination step.
Exact elimination is only offered for at most two variables.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt, lcm
from typing import NamedTuple

import numpy as np

from .gaussian import GaussianRational
from .laurent import LaurentPolynomial, monomial_normalize

__all__ = [
    "UnsupportedOperation",
    "gcd_exact",
    "gcd_many",
    "resultant",
    "determinant",
    "coefficients_in",
    "squarefree_part",
    "UnivariateRoot",
    "univariate_roots",
]

MAX_EXACT_VARIABLES = 2
# rational-root stripping enumerates divisors; beyond this size it is skipped
_MAX_DIVISOR_SEARCH = 10**4


class UnsupportedOperation(ValueError):
    """Raised when exact elimination is requested for d > 2."""


def _require_small_d(*polys: LaurentPolynomial):
    for p in polys:
        if p.d > MAX_EXACT_VARIABLES:
            raise UnsupportedOperation(f"exact GCD unavailable for d={p.d} (supported: d <= 2)")


def coefficients_in(p: LaurentPolynomial, var: int) -> dict[int, LaurentPolynomial]:
    """Split ``p`` as sum_j c_j * z_var^j; the c_j do not involve ``var``."""
    out: dict[int, dict] = {}
    for exp, c in p.terms.items():
        j = exp[var]
        e = list(exp)
        e[var] = 0
        out.setdefault(j, {})[tuple(e)] = c
    return {j: LaurentPolynomial._from_clean(t, p.d) for j, t in out.items()}


def _unit_normalize(p: LaurentPolynomial) -> LaurentPolynomial:
    if p.is_zero():
        return p
    q, _ = monomial_normalize(p)
    return q.monic()


def _content(p: LaurentPolynomial, var: int) -> LaurentPolynomial:
    coeffs = list(coefficients_in(p, var).values())
    g = coeffs[0]
    for c in coeffs[1:]:
        if g.is_constant():
            break
        g = _gcd(g, c)
    if g.is_constant():
        return LaurentPolynomial.constant(1, p.d)
    return _unit_normalize(g)


def _primitive(p: LaurentPolynomial, var: int) -> LaurentPolynomial:
    return p.exquo(_content(p, var)).monic()


def _prem(a: LaurentPolynomial, b: LaurentPolynomial, var: int) -> LaurentPolynomial:
    # sparse pseudo-remainder; the power of lc(b) is irrelevant for GCDs
    db = b.degree(var)
    lcb = coefficients_in(b, var)[db]
    r = a
    while not r.is_zero() and r.degree(var) >= db:
        dr = r.degree(var)
        lcr = coefficients_in(r, var)[dr]
        shift = [0] * a.d
        shift[var] = dr - db
        r = r * lcb - (b * lcr).shift(shift)
    return r


def _gcd(a: LaurentPolynomial, b: LaurentPolynomial) -> LaurentPolynomial:
    if a.is_zero():
        return _unit_normalize(b)
    if b.is_zero():
        return _unit_normalize(a)
    variables = sorted(set(a.variables()) | set(b.variables()))
    if not variables:
        return LaurentPolynomial.constant(1, a.d)
    x = variables[-1]
    ca, cb = _content(a, x), _content(b, x)
    c = _gcd(ca, cb)
    pa, pb = a.exquo(ca), b.exquo(cb)
    if pa.degree(x) < pb.degree(x):
        pa, pb = pb, pa
    while True:
        if pb.degree(x) <= 0:
            g = LaurentPolynomial.constant(1, a.d)
            break
        r = _prem(pa, pb, x)
        if r.is_zero():
            g = _primitive(pb, x)
            break
        pa, pb = pb, _primitive(r, x)
    return _unit_normalize(c * g)


def gcd_exact(p: LaurentPolynomial, q: LaurentPolynomial) -> LaurentPolynomial:
    """GCD in the Laurent ring over Q(i), for at most two variables.

    The result is a polynomial with no monomial factor, scaled so its
    lexicographic leading coefficient is 1. ``gcd(p, 0) = p`` normalized.
    """
    _require_small_d(p, q)
    if p.d != q.d:
        raise ValueError("mismatched number of variables")
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd of two zero polynomials is undefined")
    a = _unit_normalize(p)
    b = _unit_normalize(q)
    return _gcd(a, b)


def gcd_many(polys) -> LaurentPolynomial:
    """GCD of a sequence, skipping zeros; the zero polynomial if all vanish."""
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise ValueError("gcd_many needs at least one nonzero polynomial")
    g = _unit_normalize(polys[0])
    _require_small_d(g)
    for p in polys[1:]:
        if g.is_constant():
            break
        g = gcd_exact(g, p)
    return g


def determinant(rows: list[list[LaurentPolynomial]], d: int) -> LaurentPolynomial:
    """Fraction-free (Bareiss) determinant of a square polynomial matrix."""
    n = len(rows)
    if n == 0:
        return LaurentPolynomial.constant(1, d)
    m = [list(r) for r in rows]
    sign = 1
    prev = LaurentPolynomial.constant(1, d)
    for k in range(n - 1):
        if m[k][k].is_zero():
            pivot = next((i for i in range(k + 1, n) if not m[i][k].is_zero()), None)
            if pivot is None:
                return LaurentPolynomial.zero(d)
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = num if prev.is_constant() and prev.constant_value() == 1 else num.exquo(prev)
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return -det if sign < 0 else det


def resultant(p: LaurentPolynomial, q: LaurentPolynomial, var: int) -> LaurentPolynomial:
    """Sylvester resultant eliminating ``var`` (d = 2 only).

    Polynomial inputs are used as given; inputs with negative exponents are
    first monomial-normalized.
    """
    if p.d != 2 or q.d != 2:
        raise UnsupportedOperation("resultant is implemented for d = 2 only")
    if p.is_zero() or q.is_zero():
        raise ValueError("resultant of a zero polynomial")
    if not p.is_polynomial():
        p, _ = monomial_normalize(p)
    if not q.is_polynomial():
        q, _ = monomial_normalize(q)
    dp, dq = p.degree(var), q.degree(var)
    if dp < 1 or dq < 1:
        raise ValueError(f"resultant needs positive degree in variable {var + 1}")
    cp, cq = coefficients_in(p, var), coefficients_in(q, var)
    zero = LaurentPolynomial.zero(p.d)
    size = dp + dq
    rows = []
    for i in range(dq):
        row = [zero] * size
        for j in range(dp + 1):
            row[i + j] = cp.get(dp - j, zero)
        rows.append(row)
    for i in range(dp):
        row = [zero] * size
        for j in range(dq + 1):
            row[i + j] = cq.get(dq - j, zero)
        rows.append(row)
    return determinant(rows, p.d)


# -- univariate root isolation ----------------------------------------

class UnivariateRoot(NamedTuple):
    value: complex
    exact: GaussianRational | None


def squarefree_part(p: LaurentPolynomial, var: int) -> LaurentPolynomial:
    p = _unit_normalize(p)
    if p.degree(var) <= 0:
        return p
    g = _gcd(p, p.derivative(var))
    return p.exquo(g).monic()


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    for i in range(1, isqrt(n) + 1):
        if n % i == 0:
            small.append(i)
            if i != n // i:
                large.append(n // i)
    return small + large[::-1]


def _integer_coefficients(p: LaurentPolynomial, var: int) -> list[int] | None:
    coeffs = coefficients_in(p, var)
    deg = p.degree(var)
    fr = [coeffs[j].constant_value().re if j in coeffs else Fraction(0) for j in range(deg + 1)]
    den = 1
    for c in fr:
        den = lcm(den, c.denominator)
    ints = [int(c * den) for c in fr]
    g = 0
    for c in ints:
        g = gcd(g, c)
    return [c // g for c in ints]


def _strip_var_power(p: LaurentPolynomial, var: int) -> LaurentPolynomial:
    low = p.min_exponents()[var]
    if low == 0:
        return p
    return p.shift(tuple(-low if i == var else 0 for i in range(p.d)))


def _eval_int(ints: list[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(ints):
        acc = acc * x + c
    return acc


def _rational_roots(p: LaurentPolynomial, var: int) -> list[Fraction]:
    """Nonzero rational roots of a real-rational univariate polynomial.

    Candidates come from the rational-root theorem when the end coefficients
    are small and from rounding numeric roots to nearby fractions; every
    candidate is verified exactly.
    """
    p = _strip_var_power(p, var)
    ints = _integer_coefficients(p, var)
    if len(ints) < 2:
        return []
    a0, an = ints[0], ints[-1]
    cands: list[Fraction] = []
    if abs(a0) <= _MAX_DIVISOR_SEARCH and abs(an) <= _MAX_DIVISOR_SEARCH:
        for num in _divisors(a0):
            for den in _divisors(an):
                cands += [Fraction(num, den), Fraction(-num, den)]
    top = max(abs(c) for c in ints)
    for r in _companion_roots(np.array([c / top for c in ints], dtype=complex)):
        if np.isfinite(r) and abs(r.imag) <= 1e-6 * max(1.0, abs(r)):
            for den in (1_000, 1_000_000):
                cands.append(Fraction(float(r.real)).limit_denominator(den))
    roots: list[Fraction] = []
    for cand in cands:
        if cand and cand not in roots and _eval_int(ints, cand) == 0:
            roots.append(cand)
    return roots


def _companion_roots(coeffs: np.ndarray) -> np.ndarray:
    # coeffs[j] multiplies x^j; leading coefficient nonzero
    n = len(coeffs) - 1
    if n < 1:
        return np.zeros(0, dtype=complex)
    monic = coeffs[:-1] / coeffs[-1]
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic
    roots = np.linalg.eigvals(comp)
    # Newton polish against the input polynomial
    for _ in range(3):
        val = np.polynomial.polynomial.polyval(roots, coeffs)
        der = np.polynomial.polynomial.polyval(roots, np.arange(1, n + 1) * coeffs[1:])
        ok = np.abs(der) > 1e-300
        roots[ok] = roots[ok] - val[ok] / der[ok]
    return roots


def univariate_roots(p: LaurentPolynomial, var: int) -> list[UnivariateRoot]:
    """Distinct nonzero roots of a polynomial in the single variable ``var``.

    Rational roots of real-rational inputs are returned exactly; the
    remaining roots come from companion-matrix eigenvalues.
    """
    others = [v for v in p.variables() if v != var]
    if others:
        raise ValueError("polynomial is not univariate in the requested variable")
    if p.is_zero():
        raise ValueError("zero polynomial has every point as a root")
    q = _strip_var_power(squarefree_part(p, var), var)
    roots: list[UnivariateRoot] = []
    if q.is_real() and q.degree(var) > 0:
        for r in _rational_roots(q, var):
            roots.append(UnivariateRoot(complex(float(r), 0.0), GaussianRational(r)))
            x = [0] * p.d
            x[var] = 1
            q = q.exquo(LaurentPolynomial.monomial(x) - LaurentPolynomial.constant(r, p.d))
    deg = q.degree(var)
    if deg > 0:
        coeffs = coefficients_in(q, var)
        arr = np.array([complex(coeffs[j].constant_value()) if j in coeffs else 0j for j in range(deg + 1)])
        for r in _companion_roots(arr):
            roots.append(UnivariateRoot(complex(r), None))
    return roots
