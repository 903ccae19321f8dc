"""Multivariate Laurent polynomials with Gaussian-rational coefficients.

A polynomial is a finite map from exponent tuples (which may contain
negative entries) to nonzero :class:`GaussianRational` coefficients.
Exponent tuples compare lexicographically with ``z1`` most significant,
which is the monomial order used for leading terms and exact division.
"""
from __future__ import annotations

from numbers import Rational
from typing import Iterable, Mapping, Sequence

from .gaussian import ONE, ZERO, GaussianRational, as_gaussian

__all__ = [
    "LaurentPolynomial",
    "NotDivisibleError",
    "poly_eval",
    "monomial_normalize",
]

Exponent = tuple[int, ...]


class NotDivisibleError(ArithmeticError):
    pass


class LaurentPolynomial:
    """Element of Q(i)[z1^{+-1}, ..., zd^{+-1}]."""

    __slots__ = ("terms", "d", "_hash")

    def __init__(self, terms: Mapping[Sequence[int], object] | None = None, d: int | None = None):
        clean: dict[Exponent, GaussianRational] = {}
        if terms:
            for exp, coeff in terms.items():
                exp = tuple(int(e) for e in exp)
                c = as_gaussian(coeff)
                if c:
                    clean[exp] = clean.get(exp, ZERO) + c
                    if not clean[exp]:
                        del clean[exp]
        if d is None:
            if not clean:
                raise ValueError("d is required for the zero polynomial")
            d = len(next(iter(clean)))
        for exp in clean:
            if len(exp) != d:
                raise ValueError(f"exponent {exp} has length != {d}")
        self.terms = clean
        self.d = d
        self._hash = None

    @classmethod
    def _from_clean(cls, terms: dict, d: int) -> "LaurentPolynomial":
        obj = object.__new__(cls)
        obj.terms = terms
        obj.d = d
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, d: int) -> "LaurentPolynomial":
        return cls._from_clean({}, d)

    @classmethod
    def constant(cls, c, d: int) -> "LaurentPolynomial":
        c = as_gaussian(c)
        return cls._from_clean({(0,) * d: c} if c else {}, d)

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff=1) -> "LaurentPolynomial":
        exp = tuple(int(e) for e in exp)
        c = as_gaussian(coeff)
        return cls._from_clean({exp: c} if c else {}, len(exp))

    @classmethod
    def variable(cls, i: int, d: int) -> "LaurentPolynomial":
        exp = [0] * d
        exp[i] = 1
        return cls.monomial(exp)

    # -- basic queries ------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.d in self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def is_unit(self) -> bool:
        """Units of the Laurent ring are exactly the nonzero monomials."""
        return len(self.terms) == 1

    def is_polynomial(self) -> bool:
        return all(e >= 0 for exp in self.terms for e in exp)

    def constant_value(self) -> GaussianRational:
        return self.terms.get((0,) * self.d, ZERO)

    def min_exponents(self) -> Exponent:
        if not self.terms:
            raise ValueError("zero polynomial has no exponents")
        return tuple(min(exp[i] for exp in self.terms) for i in range(self.d))

    def max_exponents(self) -> Exponent:
        if not self.terms:
            raise ValueError("zero polynomial has no exponents")
        return tuple(max(exp[i] for exp in self.terms) for i in range(self.d))

    def degree(self, var: int) -> int:
        """Largest exponent of ``var``; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(exp[var] for exp in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(exp) for exp in self.terms)

    def leading_term(self) -> tuple[Exponent, GaussianRational]:
        exp = max(self.terms)
        return exp, self.terms[exp]

    def variables(self) -> list[int]:
        return [i for i in range(self.d) if any(exp[i] for exp in self.terms)]

    def is_real(self) -> bool:
        return all(c.is_real() for c in self.terms.values())

    # -- arithmetic ---------------------------------------------------
    def _check(self, other: "LaurentPolynomial"):
        if other.d != self.d:
            raise ValueError(f"mismatched number of variables: {self.d} vs {other.d}")

    def _lift(self, other):
        if isinstance(other, LaurentPolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Rational, GaussianRational)):
            return LaurentPolynomial.constant(other, self.d)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp, ZERO) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        return LaurentPolynomial._from_clean(out, self.d)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolynomial._from_clean({e: -c for e, c in self.terms.items()}, self.d)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict[Exponent, GaussianRational] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, ZERO) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return LaurentPolynomial._from_clean(out, self.d)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if not self.is_monomial():
                raise NotDivisibleError("only monomials have negative powers")
            (exp, c), = self.terms.items()
            return LaurentPolynomial.monomial([e * n for e in exp], c ** n)
        result = LaurentPolynomial.constant(1, self.d)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "LaurentPolynomial":
        c = as_gaussian(c)
        if not c:
            return LaurentPolynomial.zero(self.d)
        return LaurentPolynomial._from_clean({e: v * c for e, v in self.terms.items()}, self.d)

    def shift(self, k: Sequence[int]) -> "LaurentPolynomial":
        """Multiply by the monomial z^k."""
        k = tuple(k)
        return LaurentPolynomial._from_clean(
            {tuple(a + b for a, b in zip(e, k)): c for e, c in self.terms.items()}, self.d
        )

    def exquo(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        """Exact quotient ``self / other``; raises NotDivisibleError otherwise."""
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero():
            return LaurentPolynomial.zero(self.d)
        p, a = monomial_normalize(self)
        q, b = monomial_normalize(other)
        quot = _poly_exquo(p, q)
        return quot.shift([bi - ai for ai, bi in zip(a, b)])

    def monic(self) -> "LaurentPolynomial":
        """Scale so the lexicographic leading coefficient is 1."""
        if self.is_zero():
            return self
        return self.scale(self.leading_term()[1].inverse())

    def derivative(self, var: int) -> "LaurentPolynomial":
        out = {}
        for exp, c in self.terms.items():
            if exp[var]:
                e = list(exp)
                e[var] -= 1
                out[tuple(e)] = c * exp[var]
        return LaurentPolynomial._from_clean(out, self.d)

    def conjugate(self) -> "LaurentPolynomial":
        return LaurentPolynomial._from_clean({e: c.conjugate() for e, c in self.terms.items()}, self.d)

    def substitute(self, var: int, value) -> "LaurentPolynomial":
        """Exactly substitute a nonzero Gaussian rational for one variable."""
        value = as_gaussian(value)
        out: dict[Exponent, GaussianRational] = {}
        for exp, c in self.terms.items():
            if exp[var] and not value:
                raise ZeroDivisionError("substituting 0 into a Laurent polynomial")
            e = list(exp)
            e[var] = 0
            e = tuple(e)
            s = out.get(e, ZERO) + c * value ** exp[var]
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return LaurentPolynomial._from_clean(out, self.d)

    # -- comparison / display -----------------------------------------
    def __eq__(self, other):
        if isinstance(other, LaurentPolynomial):
            return self.d == other.d and self.terms == other.terms
        if isinstance(other, (int, Rational, GaussianRational)):
            return self == LaurentPolynomial.constant(other, self.d)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.d, frozenset(self.terms.items())))
        return self._hash

    def __call__(self, *z):
        if len(z) == 1 and isinstance(z[0], (list, tuple)):
            z = z[0]
        return poly_eval(self, z)

    def __repr__(self):
        return f"LaurentPolynomial({self!s}, d={self.d})"

    def __str__(self):
        return self.to_string()

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"z{i + 1}" for i in range(self.d)]
        parts = []
        for exp in sorted(self.terms):
            c = self.terms[exp]
            mono = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exp) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == ONE:
                parts.append(mono)
            elif c == -ONE:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        out = " + ".join(parts)
        return out.replace("+ -", "- ")


def _poly_exquo(p: LaurentPolynomial, q: LaurentPolynomial) -> LaurentPolynomial:
    # lex division in the polynomial ring; both arguments have exponents >= 0
    lt_exp, lt_c = q.leading_term()
    lt_inv = lt_c.inverse()
    rem = dict(p.terms)
    quot: dict[Exponent, GaussianRational] = {}
    d = p.d
    while rem:
        e = max(rem)
        delta = tuple(a - b for a, b in zip(e, lt_exp))
        if any(x < 0 for x in delta):
            raise NotDivisibleError("polynomial is not exactly divisible")
        c = rem[e] * lt_inv
        quot[delta] = c
        for qe, qc in q.terms.items():
            te = tuple(a + b for a, b in zip(qe, delta))
            s = rem.get(te, ZERO) - c * qc
            if s:
                rem[te] = s
            else:
                rem.pop(te, None)
    return LaurentPolynomial._from_clean(quot, d)


def poly_eval(p: LaurentPolynomial, z: Iterable) -> complex:
    """Evaluate at a point of (C\\{0})^d.

    Exact Gaussian-rational (or int / Fraction) points are evaluated exactly
    and converted to ``complex`` only at the end.
    """
    z = list(z)
    if len(z) != p.d:
        raise ValueError(f"point has {len(z)} coordinates, polynomial has d={p.d}")
    if any(zi == 0 for zi in z):
        raise ValueError("Laurent polynomials are evaluated on (C\\{0})^d; got a zero coordinate")
    if all(isinstance(zi, (int, Rational, GaussianRational)) for zi in z):
        zg = [as_gaussian(zi) for zi in z]
        total = ZERO
        for exp, c in p.terms.items():
            term = c
            for zi, e in zip(zg, exp):
                if e:
                    term = term * zi ** e
            total = total + term
        return complex(total)
    zc = [complex(zi) for zi in z]
    total = 0j
    for exp, c in p.terms.items():
        term = complex(c)
        for zi, e in zip(zc, exp):
            if e:
                term *= zi ** e
        total += term
    return total


def monomial_normalize(p: LaurentPolynomial) -> tuple[LaurentPolynomial, Exponent]:
    """Return ``(q, k)`` with ``p = z^(-k) * q`` and q a polynomial whose
    minimum exponent in every variable is zero."""
    if p.is_zero():
        raise ValueError("cannot normalize the zero polynomial")
    k = tuple(-m for m in p.min_exponents())
    return p.shift(k), k
