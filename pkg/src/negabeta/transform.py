"""The negative-beta interval map: digits, expansions, admissibility.

The map acts on [0, 1], is affine with slope -beta on each branch, and its
symbolic dynamics is governed by the expansion of 1 taken as the limit from
below.  Exact systems (algebraic beta) track orbit points as field elements
together with a side tag, so endpoint conventions and eventual periodicity
are decided without any numerical perturbation.  Decimal-mode systems only
support itineraries and sampling; everything that certifies an exact fact
refuses them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, Sequence, Union

from negabeta.algebraic import (
    AlgebraicNumber,
    DecimalBeta,
    FieldElement,
    Rational,
)

Word = tuple[int, ...]
PointLike = Union[FieldElement, Fraction, int]


class TransformError(Exception):
    """Base class for errors raised by this module."""


class OutOfDomain(TransformError):
    """Point lies outside [0, 1]."""


class CaseUnknown(TransformError):
    """Endpoint value requested before the expansion of 1 fixed the case tag."""


class NotEventuallyPeriodic(TransformError):
    """Orbit of 1 showed no cycle within the step budget (not a proof)."""


class InexactMode(TransformError):
    """Operation needs an exact (algebraic) beta but the system is decimal-mode."""


class HitBoundary(TransformError):
    """Orbit landed exactly on a partition endpoint."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"orbit hit a partition endpoint at step {step}")


class Side(enum.Enum):
    BELOW = "from_below"
    ABOVE = "from_above"
    EXACT = "exact"


class Case(enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    UNKNOWN = "Unknown"


class Ordering(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    PREFIX = "prefix"


@dataclass(frozen=True)
class SignedPoint:
    """A point of [0, 1] with a one-sided tag.

    The tag only carries information when the value sits on a partition
    endpoint (0, k/beta, or 1); everywhere else iteration ignores it.
    """

    value: FieldElement
    side: Side


@dataclass(frozen=True)
class DigitSequence:
    """Eventually periodic digit string, canonical (minimal preperiod and period)."""

    preperiod: Word
    period: Word
    alphabet_bound: int

    def __post_init__(self):
        if len(self.period) < 1:
            raise ValueError("period must be nonempty")
        for d in self.preperiod + self.period:
            if not 0 <= d <= self.alphabet_bound:
                raise ValueError("digit outside the alphabet")

    @classmethod
    def from_parts(cls, preperiod: Sequence[int], period: Sequence[int],
                   alphabet_bound: int) -> "DigitSequence":
        """Build the canonical form: shortest period, then shortest preperiod."""
        per = list(period)
        for d in range(1, len(per) + 1):
            if len(per) % d == 0 and per == per[:d] * (len(per) // d):
                per = per[:d]
                break
        pre = list(preperiod)
        while pre and pre[-1] == per[-1]:
            per = [per[-1]] + per[:-1]
            pre.pop()
        return cls(tuple(pre), tuple(per), alphabet_bound)

    def digit(self, k: int) -> int:
        u = len(self.preperiod)
        if k < u:
            return self.preperiod[k]
        return self.period[(k - u) % len(self.period)]

    def prefix(self, n: int) -> Word:
        return tuple(self.digit(k) for k in range(n))

    @property
    def u(self) -> int:
        return len(self.preperiod)

    @property
    def v(self) -> int:
        return len(self.period)

    def to_text(self) -> str:
        if self.alphabet_bound <= 9:
            pre = "".join(str(d) for d in self.preperiod)
            per = "".join(str(d) for d in self.period)
        else:
            pre = ",".join(str(d) for d in self.preperiod)
            per = ",".join(str(d) for d in self.period)
        return f"{pre}({per})"

    @classmethod
    def from_text(cls, text: str, alphabet_bound: int) -> "DigitSequence":
        head, sep, tail = text.partition("(")
        if not sep or not tail.endswith(")"):
            raise ValueError("expected pre(per) form")
        body = tail[:-1]

        def parse(chunk: str) -> list[int]:
            if not chunk:
                return []
            if alphabet_bound <= 9 and "," not in chunk:
                return [int(c) for c in chunk]
            return [int(c) for c in chunk.split(",")]

        return cls.from_parts(parse(head), parse(body), alphabet_bound)

    def __str__(self) -> str:
        return self.to_text()


def word_to_text(word: Sequence[int], alphabet_bound: int) -> str:
    if alphabet_bound <= 9:
        return "".join(str(d) for d in word)
    return ",".join(str(d) for d in word)


def _digit_stream_bound(s, t) -> int:
    """Index past which two eventually periodic streams agreeing so far agree forever."""
    u = max(s.u, t.u)
    lcm = s.v * t.v // gcd(s.v, t.v)
    return u + 2 * lcm


def alt_compare(s: Union[DigitSequence, Sequence[int]],
                t: Union[DigitSequence, Sequence[int]]) -> Ordering:
    """Alternating-order comparison by first disagreement.

    At disagreement index n the result is LESS when (-1)^n (s_n - t_n) < 0;
    the comparison direction flips with the parity of n, which is the
    convention that keeps the interval coding order-preserving.  Eventually
    periodic inputs are compared exactly; PREFIX is returned when a finite
    word is an exact prefix of the other input.
    """
    s_inf = isinstance(s, DigitSequence)
    t_inf = isinstance(t, DigitSequence)
    if s_inf and t_inf:
        limit = _digit_stream_bound(s, t)
    elif s_inf:
        limit = len(t)
    elif t_inf:
        limit = len(s)
    else:
        limit = min(len(s), len(t))
    get_s = s.digit if s_inf else lambda k: s[k]
    get_t = t.digit if t_inf else lambda k: t[k]
    for k in range(limit):
        a, b = get_s(k), get_t(k)
        if a != b:
            diff = a - b if k % 2 == 0 else b - a
            return Ordering.LESS if diff < 0 else Ordering.GREATER
    if s_inf and t_inf:
        return Ordering.EQUAL
    if s_inf or t_inf:
        return Ordering.PREFIX
    return Ordering.EQUAL if len(s) == len(t) else Ordering.PREFIX


def _floor_exact(t) -> tuple[int, bool]:
    """Floor of an exact nonnegative value; flags whether t is an integer."""
    if isinstance(t, Fraction):
        k = t.numerator // t.denominator
        return k, t.denominator == 1
    if t.is_rational():
        r = t.as_fraction()
        k = r.numerator // r.denominator
        return k, r.denominator == 1
    lo, hi = t.approx(Fraction(1, 4))
    k = lo.__floor__()
    # verify k <= t < k+1 exactly; t irrational so equality cannot occur
    while (t - k).sign() < 0:
        k -= 1
    while (t - (k + 1)).sign() >= 0:
        k += 1
    return k, False


@dataclass(frozen=True)
class JInterval:
    """One cell of the coding partition, with endpoint inclusion flags."""

    index: int
    lo: object
    hi: object
    lo_closed: bool
    hi_closed: bool


class MinusBetaSystem:
    """The negative-beta map for a fixed beta > 1.

    Exact systems carry an algebraic beta; ``DecimalBeta`` input builds an
    inexact system restricted to itineraries and Monte Carlo sampling.  The
    instance is immutable after the expansion of 1 has been computed; the
    expansion itself is cached.
    """

    def __init__(self, beta: Union[AlgebraicNumber, DecimalBeta]):
        if isinstance(beta, DecimalBeta):
            self.exact = False
            self.beta = beta
            if beta.value <= 1:
                raise ValueError("beta must exceed 1")
            num, den = beta.value.numerator, beta.value.denominator
            self.b = (num - 1) // den
            self._beta_el = beta.value
        else:
            self.exact = True
            self.beta = beta
            gen = beta.generator()
            if (gen - 1).sign() <= 0:
                raise ValueError("beta must exceed 1")
            self._beta_el = gen
            self.b = self._floor_of_beta()
        self._expansion: DigitSequence | None = None
        self._case = Case.UNKNOWN
        self._aut_cache = None  # set lazily by negabeta.shiftgraph

    def _floor_of_beta(self) -> int:
        gen = self._beta_el
        k, is_int = _floor_exact(gen)
        return k - 1 if is_int else k

    # -- basic numbers ----------------------------------------------------------

    @property
    def beta_element(self):
        """beta as an exact arithmetic object (field element or Fraction)."""
        return self._beta_el

    def beta_float(self) -> float:
        return float(self._beta_el)

    def log_beta(self) -> float:
        return math.log(self.beta_float())

    @property
    def case(self) -> Case:
        return self._case

    def _require_exact(self, what: str):
        if not self.exact:
            raise InexactMode(f"{what} needs an exact algebraic beta")

    def _one(self):
        return self.beta.one() if self.exact else Fraction(1)

    def _zero(self):
        return self.beta.zero() if self.exact else Fraction(0)

    def _num(self, r: Rational):
        return self.beta.from_rational(r) if self.exact else Fraction(r)

    # -- the map ------------------------------------------------------------------

    def _signed_step(self, value, side: Side):
        """One application on a side-tagged point; returns (digit, value, side)."""
        t = self._beta_el * value
        k, is_int = _floor_exact(t)
        if is_int:
            if side is Side.BELOW:
                if k == 0:
                    raise OutOfDomain("no points below 0")
                digit = k - 1
            elif side is Side.ABOVE:
                if k >= self.b + 1:
                    raise OutOfDomain("no points above 1")
                digit = k
            else:
                raise HitBoundary(0)
        else:
            digit = k
        new_value = (digit + 1) - t
        if side is Side.BELOW:
            new_side = Side.ABOVE
        elif side is Side.ABOVE:
            new_side = Side.BELOW
        else:
            new_side = Side.EXACT
        return digit, new_value, new_side

    def apply_map(self, x: PointLike):
        """Map value at x, honoring the endpoint tables of the active case."""
        if self.exact and isinstance(x, (int, Fraction)):
            x = self.beta.from_rational(x)
        if not self.exact and not isinstance(x, (int, Fraction)):
            raise InexactMode("decimal-mode systems take rational points")
        zero, one = self._zero(), self._one()
        if x < zero or x > one:
            raise OutOfDomain("point outside [0, 1]")
        if x == zero:
            return one
        if x == one:
            return (self.b + 1) - self._beta_el * one
        t = self._beta_el * x
        k, is_int = _floor_exact(t)
        if is_int:
            if self._case is Case.UNKNOWN:
                raise CaseUnknown("endpoint value requested before expansion_of_one")
            return zero if self._case is Case.CASE1 else one
        return (k + 1) - t

    # -- expansion of 1 -------------------------------------------------------------

    def expansion_of_one(self, max_steps: int = 512) -> DigitSequence:
        """Digit expansion of 1 (limit from below), with cycle detection.

        Iterates the side-tagged point (1, from_below); the digit at an
        endpoint k/beta is k-1 when approaching from below and k from above,
        and the side flips at every step because each branch is decreasing.
        Raises :class:`NotEventuallyPeriodic` when the budget runs out, which
        is not a proof that the orbit is aperiodic.
        """
        self._require_exact("expansion_of_one")
        if max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self._expansion is not None:
            return self._expansion
        value, side = self._one(), Side.BELOW
        seen: dict = {}
        digits: list[int] = []
        for step in range(max_steps):
            key = (value, side)
            if key in seen:
                first = seen[key]
                seq = DigitSequence.from_parts(digits[:first], digits[first:], self.b)
                self._expansion = seq
                self._case = (
                    Case.CASE1 if seq.u == 0 and seq.period[-1] == 0 else Case.CASE2
                )
                return seq
            seen[key] = step
            digit, value, side = self._signed_step(value, side)
            digits.append(digit)
        raise NotEventuallyPeriodic(f"no cycle within {max_steps} steps")

    # -- itineraries -------------------------------------------------------------------

    def itinerary(self, x: Union[PointLike, SignedPoint], n: int) -> Word:
        """Branch itinerary of length n.

        Plain points must avoid the partition endpoints for n steps (checked
        exactly); side-tagged points iterate through endpoints using the side
        convention.
        """
        if n < 0:
            raise ValueError("n must be >= 0")
        if isinstance(x, SignedPoint):
            value, side = x.value, x.side
            digits = []
            for _ in range(n):
                digit, value, side = self._signed_step(value, side)
                digits.append(digit)
            return tuple(digits)
        if self.exact and isinstance(x, (int, Fraction)):
            x = self.beta.from_rational(x)
        zero, one = self._zero(), self._one()
        if x < zero or x > one:
            raise OutOfDomain("point outside [0, 1]")
        digits = []
        for step in range(n):
            if x == zero or x == one:
                raise HitBoundary(step)
            t = self._beta_el * x
            k, is_int = _floor_exact(t)
            if is_int:
                raise HitBoundary(step)
            digits.append(k)
            x = (k + 1) - t
        return tuple(digits)

    # -- admissibility ------------------------------------------------------------------

    def word_admissible(self, w: Sequence[int]) -> bool:
        """True iff no suffix of w exceeds the expansion of 1 in alternating order."""
        self._require_exact("word_admissible")
        ref = self.expansion_of_one()
        w = tuple(w)
        for d in w:
            if not 0 <= d <= self.b:
                return False
        for start in range(len(w)):
            if alt_compare(w[start:], ref) is Ordering.GREATER:
                return False
        return True

    def enumerate_admissible(self, maxlen: int) -> Iterator[Word]:
        """Yield every admissible word of length 1..maxlen, shortest first.

        Keeps, for the current word, the set of suffix positions still
        matching a prefix of the expansion of 1; a word dies exactly when one
        of those positions extends on the wrong side of the alternating
        order.  Equivalent to filtering by :meth:`word_admissible` but
        exponentially cheaper on the inadmissible subtrees.
        """
        self._require_exact("enumerate_admissible")
        ref = self.expansion_of_one()

        def extend(word: Word, active: tuple[int, ...]) -> Iterator[Word]:
            if len(word) >= maxlen:
                return
            for a in range(self.b + 1):
                new_active = []
                dead = False
                for pos in active + (0,):
                    r = ref.digit(pos)
                    if a == r:
                        new_active.append(pos + 1)
                    else:
                        diff = a - r if pos % 2 == 0 else r - a
                        if diff > 0:
                            dead = True
                            break
                if dead:
                    continue
                w2 = word + (a,)
                yield w2
                yield from extend(w2, tuple(new_active))

        yield from extend((), ())

    # -- coding inverse -------------------------------------------------------------------

    def value_of(self, s: DigitSequence) -> FieldElement:
        """The unique point whose itinerary is s, by exact geometric summation."""
        self._require_exact("value_of")
        inv = self.beta.one() / self._beta_el
        acc = self.beta.zero()
        power = inv
        sign = 1
        for d in s.preperiod:
            acc = acc + power * (sign * (d + 1))
            power = power * inv
            sign = -sign
        tail = self.beta.zero()
        tail_power = inv
        tail_sign = 1
        for d in s.period:
            tail = tail + tail_power * (tail_sign * (d + 1))
            tail_power = tail_power * inv
            tail_sign = -tail_sign
        v = s.v
        ratio = inv**v if v % 2 == 0 else -(inv**v)
        tail = tail / (self.beta.one() - ratio)
        u = s.u
        head_scale = inv**u if u % 2 == 0 else -(inv**u)
        return acc + head_scale * tail

    # -- coding partition --------------------------------------------------------------------

    def partition(self) -> tuple[JInterval, ...]:
        """The coding partition, with case-dependent endpoint inclusions."""
        self._require_exact("partition")
        if self._case is Case.UNKNOWN:
            raise CaseUnknown("run expansion_of_one first")
        inv = self.beta.one() / self._beta_el
        cells = []
        if self._case is Case.CASE1:
            for i in range(self.b + 1):
                lo = inv * i
                hi = self._one() if i == self.b else inv * (i + 1)
                cells.append(JInterval(i, lo, hi, lo_closed=(i == 0), hi_closed=True))
        else:
            for i in range(self.b + 1):
                lo = inv * i
                hi = self._one() if i == self.b else inv * (i + 1)
                cells.append(JInterval(i, lo, hi, lo_closed=True, hi_closed=(i == self.b)))
        return tuple(cells)

    def __repr__(self):
        if self.exact:
            return f"MinusBetaSystem(beta~{float(self._beta_el):.6f}, b={self.b}, {self._case.value})"
        return f"MinusBetaSystem(decimal beta={float(self._beta_el):.6f}, b={self.b})"
