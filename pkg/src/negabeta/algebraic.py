"""Exact arithmetic in the number field generated by one real algebraic number.

A field is described by an integer polynomial together with a rational
isolating interval pinning down a single real root.  Elements are stored as
rational coefficient vectors in the power basis of that root, so equality,
signs and correctly rounded decimal output are all decided exactly.  No
floating point enters any exactness-bearing path; floats only appear in
convenience accessors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import sympy

log = logging.getLogger(__name__)

Rational = Union[int, Fraction]

_SIGN_REFINE_CAP = 20000


class AlgebraicError(Exception):
    """Base class for errors raised by this module."""


class NoRootInInterval(AlgebraicError):
    """The polynomial has no real root inside the given interval."""

    def __init__(self, in_interval: int, total_real: int):
        self.in_interval = in_interval
        self.total_real = total_real
        super().__init__(
            f"no root in interval ({in_interval} in interval, "
            f"{total_real} real roots in total)"
        )


class MultipleRootsInInterval(AlgebraicError):
    """The interval fails to isolate: it contains several distinct roots."""

    def __init__(self, in_interval: int, total_real: int):
        self.in_interval = in_interval
        self.total_real = total_real
        super().__init__(
            f"interval is not isolating ({in_interval} roots in interval, "
            f"{total_real} real roots in total)"
        )


class MixedFields(AlgebraicError):
    """Arithmetic was attempted between elements of different fields."""


def _frac(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, coefficients listed low degree first."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 2 or coeffs[-1] == 0:
            raise ValueError("need a nonconstant polynomial with nonzero leading coefficient")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: Rational) -> Fraction:
        x = _frac(x)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPolynomial":
        d = tuple(k * c for k, c in enumerate(self.coefficients) if k > 0)
        return IntPolynomial(d)

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if k == 0:
                parts.append(f"{c}")
            elif k == 1:
                parts.append(f"{c}*x" if abs(c) != 1 else ("x" if c > 0 else "-x"))
            else:
                parts.append(f"{c}*x^{k}" if abs(c) != 1 else (f"x^{k}" if c > 0 else f"-x^{k}"))
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


# -- dense polynomial helpers over Fraction, low degree first ----------------

def _poly_trim(c: list[Fraction]) -> list[Fraction]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]):
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    inv_lead = 1 / b[-1]
    for k in range(len(a) - len(b), -1, -1):
        coef = a[k + len(b) - 1] * inv_lead
        q[k] = coef
        if coef:
            for j, bj in enumerate(b):
                a[k + j] -= coef * bj
    return q, _poly_trim(a[: len(b) - 1])


def _poly_xgcd(a: Sequence[Fraction], b: Sequence[Fraction]):
    """Extended gcd of two polynomials; returns monic g and s with s*a = g mod b."""
    r0, r1 = list(a), list(b)
    s0, s1 = [Fraction(1)], []
    while r1:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        prod = _poly_mul(q, s1)
        s0, s1 = s1, _poly_sub(s0, prod)
    lead = r0[-1]
    return [c / lead for c in r0], [c / lead for c in s0]


def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _poly_trim(out)


def _poly_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * max(len(a), len(b))
    for i, ai in enumerate(a):
        out[i] += ai
    for i, bi in enumerate(b):
        out[i] -= bi
    return _poly_trim(out)


def _interval_eval(coeffs: Sequence[Fraction], lo: Fraction, hi: Fraction):
    """Exact interval Horner evaluation of a polynomial over [lo, hi]."""
    vlo = vhi = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        candidates = (vlo * lo, vlo * hi, vhi * lo, vhi * hi)
        vlo, vhi = min(candidates) + c, max(candidates) + c
    return vlo, vhi


class AlgebraicNumber:
    """One real root of an irreducible integer polynomial.

    The isolating interval only ever shrinks; refinement results are cached
    on the instance, which keeps the value immutable as observed through the
    public operations and safe to share between threads.
    """

    def __init__(self, minpoly: IntPolynomial, lo: Fraction, hi: Fraction):
        self.minpoly = minpoly
        self._iv = (lo, hi)
        if minpoly.degree == 1:
            c0, c1 = minpoly.coefficients
            root = Fraction(-c0, c1)
            self._iv = (root, root)
            self._sign_lo = 0
        else:
            s_lo = minpoly(lo)
            s_hi = minpoly(hi)
            if s_lo == 0 or s_hi == 0 or (s_lo > 0) == (s_hi > 0):
                raise ValueError("interval endpoints must straddle the root")
            self._sign_lo = 1 if s_lo > 0 else -1
        d = minpoly.degree
        self._pow_table = self._build_pow_table()
        self.degree = d

    def _build_pow_table(self) -> list[tuple[Fraction, ...]]:
        d = self.minpoly.degree
        lead = Fraction(self.minpoly.coefficients[-1])
        # X^d = -(c_0 + c_1 X + ... + c_{d-1} X^{d-1}) / c_d
        top = tuple(Fraction(-c, 1) / lead for c in self.minpoly.coefficients[:-1])
        table = []
        for k in range(d):
            row = [Fraction(0)] * d
            row[k] = Fraction(1)
            table.append(tuple(row))
        for _ in range(d - 1):
            prev = table[-1]
            shifted = [Fraction(0)] + list(prev[:-1])
            overflow = prev[-1]
            row = [shifted[i] + overflow * top[i] for i in range(d)]
            table.append(tuple(row))
        return table

    # -- isolating interval ---------------------------------------------------

    def interval(self) -> tuple[Fraction, Fraction]:
        return self._iv

    def _refine_step(self):
        lo, hi = self._iv
        if lo == hi:
            return
        mid = (lo + hi) / 2
        s_mid = self.minpoly(mid)
        # irreducible of degree >= 2 has no rational roots, so s_mid != 0
        if (s_mid > 0) == (self._sign_lo > 0):
            self._iv = (mid, hi)
        else:
            self._iv = (lo, mid)

    def refine(self, max_width: Fraction) -> tuple[Fraction, Fraction]:
        lo, hi = self._iv
        while hi - lo > max_width:
            self._refine_step()
            lo, hi = self._iv
        return lo, hi

    # -- element constructors -------------------------------------------------

    def zero(self) -> "FieldElement":
        return FieldElement(self, (Fraction(0),) * self.degree)

    def one(self) -> "FieldElement":
        return self.from_rational(1)

    def from_rational(self, r: Rational) -> "FieldElement":
        coeffs = [Fraction(0)] * self.degree
        coeffs[0] = _frac(r)
        return FieldElement(self, tuple(coeffs))

    def from_coeffs(self, coeffs: Iterable[Rational]) -> "FieldElement":
        vec = [_frac(c) for c in coeffs]
        if len(vec) > self.degree:
            raise ValueError("coefficient vector longer than the field degree")
        vec += [Fraction(0)] * (self.degree - len(vec))
        return FieldElement(self, tuple(vec))

    def generator(self) -> "FieldElement":
        """The root itself, as a field element."""
        if self.degree == 1:
            return self.from_rational(self._iv[0])
        coeffs = [Fraction(0)] * self.degree
        coeffs[1] = Fraction(1)
        return FieldElement(self, tuple(coeffs))

    def __float__(self) -> float:
        lo, hi = self.refine(Fraction(1, 10**18))
        return float((lo + hi) / 2)

    def __repr__(self) -> str:
        lo, hi = self._iv
        return f"AlgebraicNumber({self.minpoly}, [{lo}, {hi}])"


def _compatible(a: "FieldElement", b: "FieldElement") -> bool:
    fa, fb = a.field, b.field
    if fa is fb:
        return True
    if fa.minpoly.coefficients != fb.minpoly.coefficients:
        return False
    alo, ahi = fa.interval()
    blo, bhi = fb.interval()
    return alo <= bhi and blo <= ahi


class FieldElement:
    """Element of Q(root), as a rational vector in the power basis."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: AlgebraicNumber, coeffs: tuple[Fraction, ...]):
        self.field = field
        self.coeffs = coeffs

    # -- ring structure --------------------------------------------------------

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if not _compatible(self, other):
                raise MixedFields("operands belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement(self.field, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            r = _frac(other)
            return FieldElement(self.field, tuple(a * r for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = self.field.degree
        conv = [Fraction(0)] * (2 * d - 1)
        for i, ai in enumerate(self.coeffs):
            if ai:
                for j, bj in enumerate(other.coeffs):
                    if bj:
                        conv[i + j] += ai * bj
        table = self.field._pow_table
        out = [Fraction(0)] * d
        for k, ck in enumerate(conv):
            if ck:
                row = table[k]
                for i in range(d):
                    if row[i]:
                        out[i] += ck * row[i]
        return FieldElement(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("field element is zero")
        d = self.field.degree
        if d == 1 or self.is_rational():
            return self.field.from_rational(1 / self.coeffs[0])
        p = [Fraction(c) for c in self.field.minpoly.coefficients]
        a = _poly_trim(list(self.coeffs))
        g, s = _poly_xgcd(a, p)
        if len(g) != 1:
            # cannot happen for an irreducible minimal polynomial
            raise ArithmeticError("gcd with the minimal polynomial is not constant")
        _, rem = _poly_divmod(s, p)
        return self.field.from_coeffs(rem)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            r = _frac(other)
            return FieldElement(self.field, tuple(a / r for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        acc = self.field.one()
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    # -- predicates and comparisons -------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.coeffs[0]

    def sign(self) -> int:
        if self.is_zero():
            return 0
        if self.is_rational():
            return 1 if self.coeffs[0] > 0 else -1
        lo, hi = self.field.interval()
        for _ in range(_SIGN_REFINE_CAP):
            elo, ehi = _interval_eval(self.coeffs, lo, hi)
            if elo > 0:
                return 1
            if ehi < 0:
                return -1
            self.field._refine_step()
            lo, hi = self.field.interval()
        raise RuntimeError("sign determination did not converge")

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, FieldElement):
            return NotImplemented
        if not _compatible(self, other):
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __lt__(self, other):
        return (self - self._coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - self._coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - self._coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - self._coerce(other)).sign() >= 0

    # -- numeric output ---------------------------------------------------------

    def approx(self, max_width: Fraction) -> tuple[Fraction, Fraction]:
        """Exact rational bounds on the value, at most max_width apart."""
        if self.is_rational():
            return self.coeffs[0], self.coeffs[0]
        lo, hi = self.field.interval()
        while True:
            elo, ehi = _interval_eval(self.coeffs, lo, hi)
            if ehi - elo <= max_width:
                return elo, ehi
            self.field._refine_step()
            lo, hi = self.field.interval()

    def decimal(self, digits: int) -> str:
        if digits < 1:
            raise ValueError("digits must be >= 1")
        scale = 10**digits
        if self.is_rational():
            r = self.coeffs[0]
            neg = r < 0
            n = (abs(r) * scale + Fraction(1, 2)).__floor__()
        else:
            neg = self.sign() < 0
            width = Fraction(1, scale * 1000)
            while True:
                lo, hi = self.approx(width)
                slo = abs(lo if not neg else hi) * scale + Fraction(1, 2)
                shi = abs(hi if not neg else lo) * scale + Fraction(1, 2)
                if slo.__floor__() == shi.__floor__():
                    n = slo.__floor__()
                    break
                width /= 16
        whole, frac = divmod(n, scale)
        return f"{'-' if neg else ''}{whole}.{frac:0{digits}d}"

    def __float__(self) -> float:
        lo, hi = self.approx(Fraction(1, 10**18))
        return float((lo + hi) / 2)

    def __repr__(self):
        return f"FieldElement({list(self.coeffs)})"


def make_algebraic(p: IntPolynomial | Sequence[int], lo: Rational, hi: Rational) -> AlgebraicNumber:
    """Pin down the unique real root of p inside [lo, hi].

    The polynomial is factored over the integers; the (unique) irreducible
    factor owning the root becomes the minimal polynomial, so squarefree
    reduction happens silently as a byproduct.  Raises
    :class:`NoRootInInterval` or :class:`MultipleRootsInInterval` when the
    interval does not isolate exactly one root of p.
    """
    if not isinstance(p, IntPolynomial):
        p = IntPolynomial(tuple(p))
    lo, hi = _frac(lo), _frac(hi)
    if lo > hi:
        raise ValueError("empty interval")
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(p.coefficients)), x, domain="ZZ")
    _, factors = poly.factor_list()
    if any(mult > 1 for _, mult in factors):
        log.info("input polynomial was not squarefree; reduced to its squarefree part")

    total_real = 0
    in_interval = 0
    chosen = None
    for factor, _ in factors:
        if factor.degree() < 1:
            continue
        total_real += factor.count_roots()
        count = factor.count_roots(sympy.Rational(lo.numerator, lo.denominator),
                                   sympy.Rational(hi.numerator, hi.denominator))
        in_interval += count
        if count == 1 and chosen is None:
            chosen = factor
    if in_interval == 0:
        raise NoRootInInterval(0, total_real)
    if in_interval > 1:
        raise MultipleRootsInInterval(in_interval, total_real)

    coeffs = [int(c) for c in reversed(chosen.all_coeffs())]
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    minpoly = IntPolynomial(tuple(coeffs))

    if minpoly.degree == 1:
        return AlgebraicNumber(minpoly, lo, hi)

    # shrink until the endpoints straddle the root, then refine a little more
    while True:
        s_lo, s_hi = minpoly(lo), minpoly(hi)
        if s_lo != 0 and s_hi != 0 and (s_lo > 0) != (s_hi > 0):
            break
        third = (hi - lo) / 3
        cand_lo, cand_hi = lo + third, hi - third
        poly_c = sympy.Poly(list(reversed(minpoly.coefficients)), x, domain="ZZ")
        if poly_c.count_roots(sympy.Rational(cand_lo.numerator, cand_lo.denominator),
                              sympy.Rational(cand_hi.numerator, cand_hi.denominator)) == 1:
            lo, hi = cand_lo, cand_hi
        elif poly_c.count_roots(sympy.Rational(lo.numerator, lo.denominator),
                                sympy.Rational(cand_hi.numerator, cand_hi.denominator)) == 1:
            hi = cand_hi
        else:
            lo = cand_lo
    number = AlgebraicNumber(minpoly, lo, hi)
    number.refine((hi - lo) / 1024)
    return number


def field_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Exact ring operation; op is one of 'add', 'sub', 'mul'."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def sign_of(a: FieldElement) -> int:
    """Exact sign: -1, 0 or +1."""
    return a.sign()


def to_decimal(a: FieldElement, digits: int) -> str:
    """Value of a, correctly rounded to the requested number of fraction digits."""
    return a.decimal(digits)


# -- shared beta input grammar -------------------------------------------------

@dataclass(frozen=True)
class DecimalBeta:
    """Inexact beta given as a plain decimal; blocks every exactness-bearing path."""

    value: Fraction
    precision: int


def parse_beta_spec(text: str) -> AlgebraicNumber | DecimalBeta:
    """Parse the shared beta grammar.

    Either ``poly:<c0,c1,...,ck>;interval:<lo>,<hi>`` with rational bounds
    written as ``p/q``, or ``decimal:<d>;precision:<digits>``.
    """
    fields = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, sep, value = chunk.partition(":")
        if not sep:
            raise ValueError(f"malformed beta spec near {chunk!r}")
        fields[key.strip()] = value.strip()
    if "poly" in fields:
        if "interval" not in fields:
            raise ValueError("poly form needs an interval:<lo>,<hi> part")
        coeffs = tuple(int(c) for c in fields["poly"].split(","))
        bounds = fields["interval"].split(",")
        if len(bounds) != 2:
            raise ValueError("interval must be two comma-separated rationals")
        lo, hi = (Fraction(b.strip()) for b in bounds)
        return make_algebraic(IntPolynomial(coeffs), lo, hi)
    if "decimal" in fields:
        precision = int(fields.get("precision", "64"))
        if precision < 1:
            raise ValueError("precision must be >= 1")
        return DecimalBeta(Fraction(fields["decimal"]), precision)
    raise ValueError("beta spec must start with poly: or decimal:")
