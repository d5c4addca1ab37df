"""Two companion interval systems used as cross-checks.

A five-branch slope-3 map whose symbolic system is a two-piece ordered
presentation with exactly computable cylinder lengths, and a circle map with
one source and one sink whose occupation-time deviations have a closed-form
predicted rate.  The slope-3 system runs in exact rational arithmetic; the
circle map is smooth and non-expanding away from its source, so plain double
precision is enough there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from negabeta.ldp import DeviationEstimate, WindowNeverHit, _sample_fixed_point, wilson_interval
from negabeta.shiftgraph import FoldedAutomaton, LabeledGraph, enumerate_words
from negabeta.specprop import SoficPresentation
from negabeta.transform import HitBoundary, Word


class IntervalMapError(Exception):
    """Base class for errors raised by this module."""


@dataclass(frozen=True)
class AffineBranch:
    """One affine branch x -> slope*x + intercept on [lo, hi)-style cells."""

    lo: Fraction
    hi: Fraction
    lo_closed: bool
    hi_closed: bool
    slope: Fraction
    intercept: Fraction

    def __call__(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept

    def contains(self, x: Fraction) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True


@dataclass(frozen=True)
class PiecewiseExpandingMap:
    """Piecewise affine expanding map given by its branch cells."""

    branches: tuple[AffineBranch, ...]

    @property
    def breakpoints(self) -> tuple[Fraction, ...]:
        points = [self.branches[0].lo]
        for br in self.branches:
            points.append(br.hi)
        return tuple(points)

    def branch_of(self, x: Fraction) -> int:
        for i, br in enumerate(self.branches):
            if br.contains(x):
                return i
        raise IntervalMapError(f"{x} lies in no branch cell")

    def apply(self, x: Fraction) -> Fraction:
        return self.branches[self.branch_of(x)](x)

    def on_open_boundary(self, x: Fraction) -> bool:
        return any(x == p for p in self.breakpoints[1:-1])

    def code_point(self, x: Union[Fraction, int, float], n: int,
                   strict: bool = True) -> Word:
        """Branch itinerary of length n in exact rational arithmetic.

        With ``strict`` the orbit must avoid the interior breakpoints (the
        boundary step index is reported); otherwise the half-open cells decide
        every point, endpoints included.
        """
        x = Fraction(x).limit_denominator(10**12) if isinstance(x, float) else Fraction(x)
        if not (0 <= x <= 1):
            raise IntervalMapError("point outside [0, 1]")
        word = []
        for step in range(n):
            if strict and self.on_open_boundary(x):
                raise HitBoundary(step)
            i = self.branch_of(x)
            word.append(i)
            x = self.branches[i](x)
        return tuple(word)


def example31_system() -> tuple[PiecewiseExpandingMap, SoficPresentation]:
    """The five-branch slope-3 map and its two-piece ordered presentation.

    Words of the symbolic system are exactly the factors of u 1 v with u over
    {0,1} and v over {2,3,4}; the presentation has one vertex looping on
    {0,1}, a 1-labeled edge to a second vertex looping on {2,3,4}.
    """
    cells = [
        (Fraction(0), Fraction(1, 6), Fraction(0)),
        (Fraction(1, 6), Fraction(1, 2), Fraction(-1, 2)),
        (Fraction(1, 2), Fraction(2, 3), Fraction(-1)),
        (Fraction(2, 3), Fraction(5, 6), Fraction(-3, 2)),
        (Fraction(5, 6), Fraction(1), Fraction(-2)),
    ]
    branches = []
    for k, (lo, hi, intercept) in enumerate(cells):
        last = k == len(cells) - 1
        branches.append(AffineBranch(lo, hi, True, last, Fraction(3), intercept))
    fmap = PiecewiseExpandingMap(tuple(branches))
    graph = LabeledGraph(
        2,
        frozenset({(0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 2, 1), (1, 3, 1), (1, 4, 1)}),
    )
    presentation = SoficPresentation(graph, ((0,), (1,)))
    return fmap, presentation


def example31_word_admissible(word: Sequence[int]) -> bool:
    """Factor-of-u1v characterization: no digit >= 2 before a digit <= 1."""
    word = tuple(word)
    if any(not 0 <= d <= 4 for d in word):
        return False
    seen_high = False
    for prev, cur in zip(word, word[1:]):
        if prev >= 2 and cur <= 1:
            return False
        if prev <= 1 and cur >= 2 and prev != 1:
            return False
    return True


def example31_cylinder(fmap: PiecewiseExpandingMap, word: Sequence[int]):
    """Exact rational cylinder of a word under the half-open coding cells."""
    lo, hi = Fraction(0), Fraction(1)
    lo_closed, hi_closed = True, True
    for digit in reversed(tuple(word)):
        br = fmap.branches[digit]
        # inverse branch y -> (y - intercept)/slope is increasing
        lo, hi = (lo - br.intercept) / br.slope, (hi - br.intercept) / br.slope
        if br.lo > lo or (br.lo == lo and not br.lo_closed and lo_closed):
            lo, lo_closed = br.lo, br.lo_closed
        if br.hi < hi or (br.hi == hi and not br.hi_closed and hi_closed):
            hi, hi_closed = br.hi, br.hi_closed
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            return None
    return lo, hi, lo_closed, hi_closed


@dataclass(frozen=True)
class Example31BoundsReport:
    word: Word
    length: Fraction
    lower_ok: bool
    upper_ok: bool


def example31_measure_bounds(maxlen: int) -> list[Example31BoundsReport]:
    """Exhaustive exact cylinder lengths with the (1/2)3^-n <= L <= 3^-n bounds."""
    if maxlen < 1:
        raise ValueError("maxlen must be >= 1")
    fmap, presentation = example31_system()
    aut = FoldedAutomaton(presentation.graph, 0, 1, None, 4)
    reports = []
    for word in enumerate_words(aut, maxlen):
        n = len(word)
        cyl = example31_cylinder(fmap, word)
        if cyl is None:
            raise IntervalMapError(f"admissible word {word} has an empty cylinder")
        lo, hi, _, _ = cyl
        length = hi - lo
        reports.append(
            Example31BoundsReport(
                word,
                length,
                Fraction(1, 2) * Fraction(3) ** (-n) <= length,
                length <= Fraction(3) ** (-n),
            )
        )
    return reports


# -- circle map with a source and a sink ---------------------------------------------------


def _sin_two_pi(theta: float) -> float:
    """sin(2*pi*theta) with exact zeros at theta in {0, 1/2}.

    Range-reduces so the argument passed to sin is exactly zero at the two
    fixed points, which keeps them genuine fixed points in floating point.
    """
    t = theta - math.floor(theta)
    if t >= 0.5:
        return -_sin_two_pi(t - 0.5)
    if t > 0.25:
        t = 0.5 - t
    return math.sin(2.0 * math.pi * t)


@dataclass(frozen=True)
class CircleMap:
    """theta -> theta + sin(2*pi*theta)/10 on representatives [0, 1)."""

    strength: float = 0.1

    def __call__(self, theta: float) -> float:
        out = theta + self.strength * _sin_two_pi(theta)
        return out - math.floor(out)

    def derivative(self, theta: float) -> float:
        return 1.0 + self.strength * 2.0 * math.pi * math.cos(2.0 * math.pi * theta)

    def inverse(self, y: float) -> float:
        """Unique preimage on the circle (the map is an increasing homeomorphism)."""
        x = y
        for _ in range(100):
            diff = self(x) - y
            # lift difference to the nearest representative
            diff -= round(diff)
            if abs(diff) < 1e-15:
                break
            x -= diff / self.derivative(x)
            x -= math.floor(x)
        return x

    def source_rate(self) -> float:
        """log of the derivative at the repelling fixed point 0."""
        return math.log(self.derivative(0.0))


def _vectorized_circle(theta: np.ndarray, strength: float) -> np.ndarray:
    t = theta - np.floor(theta)
    reduced = np.where(t >= 0.5, t - 0.5, t)
    folded = np.where(reduced > 0.25, 0.5 - reduced, reduced)
    s = np.sin(2.0 * np.pi * folded)
    s = np.where(t >= 0.5, -s, s)
    out = theta + strength * s
    return out - np.floor(out)


def circle_nonwandering(fmap: CircleMap, grid: int = 2000, iters: int = 400,
                        tol: float = 1e-6) -> list[float]:
    """Cluster points of late forward orbits plus backward-detected repellers."""
    if grid < 1000:
        raise ValueError("grid must be at least 1000")
    theta = np.linspace(0.0, 1.0, grid, endpoint=False)
    for _ in range(iters):
        theta = _vectorized_circle(theta, fmap.strength)
    points = {round(float(v), 9) for v in theta}
    # backward orbits converge to the repeller
    for x in (0.17, 0.33, 0.71):
        for _ in range(iters):
            x = fmap.inverse(x)
        points.add(round(float(x), 9))
    clusters: list[float] = []
    for p in sorted(points):
        for c in clusters:
            if min(abs(p - c), 1 - abs(p - c)) <= tol:
                break
        else:
            clusters.append(p)
    return clusters


def circle_mc_deviation(a_window: tuple[float, float], n: int, sample_count: int,
                        seed: int, eps: float = 0.05,
                        fmap: Optional[CircleMap] = None) -> DeviationEstimate:
    """Lebesgue probability of spending a given fraction of time near the source.

    The occupation observable is the fraction of the first n iterates within
    eps of 0 (circle distance); the predicted decay rate of the tail at
    fraction a is a * log f'(0).  Uses the same counter-based sampler as the
    digit engine, iterated in double precision.
    """
    if n < 1 or sample_count < 1:
        raise ValueError("need n >= 1 and sample_count >= 1")
    fmap = fmap or CircleMap()
    lo, hi = a_window
    theta = np.array(
        [_sample_fixed_point(seed, i) / 2.0**128 for i in range(sample_count)]
    )
    near = np.zeros(sample_count)
    for _ in range(n):
        dist = np.minimum(theta, 1.0 - theta)
        near += dist <= eps
        theta = _vectorized_circle(theta, fmap.strength)
    fractions = near / n
    hits = int(np.count_nonzero((fractions >= lo) & (fractions <= hi)))
    p_lo, p_hi = wilson_interval(hits, sample_count)
    if hits == 0:
        estimate = DeviationEstimate(n, sample_count, 0, None,
                                     -math.log(max(p_hi, 1e-300)) / n, float("inf"), seed)
        raise WindowNeverHit(estimate)
    rate = -math.log(hits / sample_count) / n
    ci_lo = -math.log(p_hi) / n
    ci_hi = -math.log(p_lo) / n if p_lo > 0 else float("inf")
    return DeviationEstimate(n, sample_count, hits, rate, ci_lo, ci_hi, seed)


def predicted_occupation_rate(a: float, fmap: Optional[CircleMap] = None) -> float:
    """Closed-form rate for occupation fraction a near the source."""
    fmap = fmap or CircleMap()
    return a * fmap.source_rate()
