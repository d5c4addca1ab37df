"""Exact cylinder geometry and the measure-side objects.

Cylinder sets pull back to genuine subintervals of [0, 1]; their endpoints
are carried as exact field elements so the decay bounds and the partition
identity can be asserted with equality, not tolerance.  Markov and empirical
measures live on the folded automaton and feed the rate machinery.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from negabeta.shiftgraph import FoldedAutomaton, LabeledGraph, automaton_for, spectral_radius
from negabeta.transform import MinusBetaSystem, Word


class MeasureError(Exception):
    """Base class for errors raised by this module."""


class InadmissibleWord(MeasureError):
    """The word codes no interval of positive length."""


class NoBranchReachable(MeasureError):
    """No extension of the word ever reaches a branching state."""


class NotIrreducible(MeasureError):
    """The operation needs a strongly connected component."""


# -- cylinders -------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderInterval:
    """Interval of points whose coding starts with a fixed word."""

    word: Word
    lo: object
    hi: object
    lo_closed: bool
    hi_closed: bool

    @property
    def length(self):
        return self.hi - self.lo

    def contains(self, x) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True


def cylinder_interval(system: MinusBetaSystem, word: Sequence[int]) -> CylinderInterval:
    """Exact coding cylinder, by backward recursion through inverse branches.

    Starting from [0, 1], each step intersects with the partition cell of the
    next digit and pulls back through the orientation-reversing inverse
    branch y -> (digit + 1 - y)/beta.  Raises :class:`InadmissibleWord` when
    the interior becomes empty.
    """
    word = tuple(word)
    cells = system.partition()
    one = system.beta.one()
    zero = system.beta.zero()
    beta = system.beta_element
    lo, hi = zero, one
    lo_closed = hi_closed = True
    for digit in reversed(word):
        if not 0 <= digit <= system.b:
            raise InadmissibleWord(f"digit {digit} outside the alphabet")
        # inverse branch flips orientation and closure flags
        lo, hi = (digit + 1 - hi) / beta, (digit + 1 - lo) / beta
        lo_closed, hi_closed = hi_closed, lo_closed
        cell = cells[digit]
        if cell.lo > lo or (cell.lo == lo and not cell.lo_closed and lo_closed):
            lo, lo_closed = cell.lo, cell.lo_closed
        if cell.hi < hi or (cell.hi == hi and not cell.hi_closed and hi_closed):
            hi, hi_closed = cell.hi, cell.hi_closed
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            raise InadmissibleWord(f"empty cylinder for word {word}")
    if lo == hi:
        raise InadmissibleWord(f"degenerate cylinder for word {word}")
    return CylinderInterval(word, lo, hi, lo_closed, hi_closed)


@dataclass(frozen=True)
class CylinderReport:
    """Exact cylinder length together with the two decay bound checks."""

    word: Word
    length: object
    upper_bound_ok: bool
    lower_bound_applicable: bool
    lower_bound_ok: Optional[bool]


def _has_double_extension(system: MinusBetaSystem, word: Word) -> bool:
    count = 0
    for c in range(system.b + 1):
        if system.word_admissible(word + (c,)):
            count += 1
            if count >= 2:
                return True
    return False


def cylinder_measure(system: MinusBetaSystem, word: Sequence[int]) -> CylinderReport:
    """Exact Lebesgue length of the cylinder, with its bound report.

    The length never exceeds beta^-n; when the word admits two distinct
    one-letter extensions it is also at least (1 - b/beta) * beta^-n.  Both
    comparisons are exact field arithmetic.
    """
    word = tuple(word)
    interval = cylinder_interval(system, word)
    n = len(word)
    beta = system.beta_element
    one = system.beta.one()
    length = interval.length
    upper = one / beta**n
    upper_ok = length <= upper
    applicable = _has_double_extension(system, word)
    lower_ok = None
    if applicable:
        lower = (one - system.b / beta) / beta**n
        lower_ok = length >= lower
    return CylinderReport(word, length, upper_ok, applicable, lower_ok)


# -- branching distance ------------------------------------------------------------


def g_beta_word(system: MinusBetaSystem, word: Sequence[int]) -> int:
    """Distance (in extension length) from the word to the nearest branching.

    Works on follower sets of the folded automaton: the answer depends on the
    word only through the set of states its readings end in, so this is a
    breadth-first search over subsets rather than over words.
    """
    aut = automaton_for(system)
    start = aut.reads(tuple(word))
    if not start:
        raise InadmissibleWord(f"word {tuple(word)} is not admissible")
    return _g_from_followers(aut, start)


def _g_from_followers(aut: FoldedAutomaton, start: frozenset[int]) -> int:
    labels = sorted(aut.graph.labels())
    seen = {start}
    frontier = [start]
    depth = 0
    while frontier:
        nxt = []
        for states in frontier:
            available = [a for a in labels if aut.step(states, a)]
            if len(available) >= 2:
                return depth
            for a in available:
                t = aut.step(states, a)
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
        depth += 1
    raise NoBranchReachable("no extension reaches a branching state")


def g_beta_n(system: MinusBetaSystem, n: int) -> int:
    """Worst branching distance over all admissible words of length n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    aut = automaton_for(system)
    labels = sorted(aut.graph.labels())
    frontier = {aut.all_states()}
    for _ in range(n):
        frontier = {aut.step(states, a) for states in frontier for a in labels}
        frontier.discard(frozenset())
    if not frontier:
        raise InadmissibleWord(f"no admissible words of length {n}")
    return max(_g_from_followers(aut, states) for states in frontier)


# -- Markov measures -----------------------------------------------------------------


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary Markov measure supported on edges of a labeled graph.

    Edge probabilities are per-source transition probabilities; the stationary
    vertex distribution satisfies the balance equation (exactly when built
    from rationals, to 1e-12 when built numerically).
    """

    graph: LabeledGraph
    edge_probs: tuple  # ((src, label, dst), prob) pairs
    stationary: tuple  # (vertex, prob) pairs
    alphabet_bound: int

    def probs(self) -> dict:
        return dict(self.edge_probs)

    def pi(self) -> dict:
        return dict(self.stationary)

    def support_vertices(self) -> set[int]:
        return {v for v, p in self.stationary if p > 0}

    def support_edges(self) -> set:
        return {e for e, p in self.edge_probs if p > 0}

    def entropy(self) -> float:
        pi = self.pi()
        acc = 0.0
        for (src, _, _), p in self.edge_probs:
            if p > 0:
                acc -= float(pi[src]) * float(p) * math.log(float(p))
        return acc

    def mean_label(self, psi) -> float:
        pi = self.pi()
        acc = 0.0
        for (src, label, _), p in self.edge_probs:
            if p > 0:
                acc += float(pi[src]) * float(p) * _psi_value(psi, label)
        return acc

    def cylinder_mass(self, word: Sequence[int]) -> float:
        """Stationary probability of reading the word from the start."""
        word = tuple(word)
        states = {v: float(p) for v, p in self.stationary if p > 0}
        for a in word:
            nxt: dict[int, float] = {}
            for (src, label, dst), p in self.edge_probs:
                if label == a and src in states and p > 0:
                    nxt[dst] = nxt.get(dst, 0.0) + states[src] * float(p)
            states = nxt
            if not states:
                return 0.0
        return sum(states.values())


def _psi_value(psi, label: int) -> float:
    if callable(psi):
        return float(psi(label))
    return float(psi[label])


def _perron_vector(mat: np.ndarray, rho: float) -> np.ndarray:
    """Strictly positive eigenvector for the leading eigenvalue."""
    values, vectors = np.linalg.eig(mat)
    k = int(np.argmin(np.abs(values - rho)))
    vec = np.real(vectors[:, k])
    if vec.sum() < 0:
        vec = -vec
    if np.any(vec <= 0):
        # polish with a few shifted power steps; irreducibility makes it positive
        vec = np.abs(vec) + 1e-9
        for _ in range(200):
            vec = (mat + np.eye(mat.shape[0])) @ vec
            vec /= np.linalg.norm(vec)
    return vec


def markov_entropy(measure: MarkovMeasure) -> float:
    """Shannon entropy rate of the Markov measure (nats per symbol)."""
    return measure.entropy()


def parry_measure(graph: LabeledGraph, vertices: Optional[Sequence[int]] = None) -> MarkovMeasure:
    """Maximal-entropy Markov measure of an irreducible graph piece.

    Built from the Perron eigendata of the adjacency matrix: each edge out of
    p into q gets probability r_q / (rho * r_p), and the stationary law is the
    normalized product of left and right eigenvectors.  Its entropy equals the
    log of the spectral radius.
    """
    from negabeta.shiftgraph import is_irreducible

    verts = sorted(vertices) if vertices is not None else list(range(graph.vertex_count))
    if not is_irreducible(graph, verts):
        raise NotIrreducible("the maximal-entropy construction needs a strongly connected piece")
    index = {v: i for i, v in enumerate(verts)}
    mat = graph.adjacency(verts)
    rho = spectral_radius(mat)
    right = _perron_vector(mat, rho)
    left = _perron_vector(mat.T, rho)
    pi = left * right
    pi /= pi.sum()
    edge_probs = []
    for (s, a, t) in sorted(graph.edges):
        if s in index and t in index:
            p = right[index[t]] / (rho * right[index[s]])
            edge_probs.append(((s, a, t), p))
    stationary = tuple((v, pi[index[v]]) for v in verts)
    bound = max(graph.labels()) if graph.edges else 0
    return MarkovMeasure(graph, tuple(edge_probs), stationary, bound)


def random_markov_measure(graph: LabeledGraph, vertices: Sequence[int],
                          rng: random.Random) -> MarkovMeasure:
    """Random rational Markov measure on one strongly connected piece.

    Transition probabilities are random positive rationals on the component's
    edges; the stationary distribution is solved exactly over the rationals,
    so the balance equation holds with equality.
    """
    from negabeta.shiftgraph import is_irreducible

    verts = sorted(vertices)
    if not is_irreducible(graph, verts):
        raise NotIrreducible("random Markov measures are built on strongly connected pieces")
    vset = set(verts)
    out: dict[int, list] = {v: [] for v in verts}
    for e in sorted(graph.edges):
        s, _, t = e
        if s in vset and t in vset:
            out[s].append(e)
    edge_probs = {}
    for v in verts:
        weights = [Fraction(rng.randrange(1, 9)) for _ in out[v]]
        total = sum(weights)
        for e, w in zip(out[v], weights):
            edge_probs[e] = w / total
    # stationary distribution: solve pi P = pi exactly by Gaussian elimination
    n = len(verts)
    idx = {v: i for i, v in enumerate(verts)}
    # build (P^T - I) with the normalization row appended
    rows = [[Fraction(0)] * n for _ in range(n)]
    for e, p in edge_probs.items():
        s, _, t = e
        rows[idx[t]][idx[s]] += p
    for i in range(n):
        rows[i][i] -= 1
    rows[-1] = [Fraction(1)] * n
    rhs = [Fraction(0)] * (n - 1) + [Fraction(1)]
    pi = _solve_exact(rows, rhs)
    stationary = tuple((v, pi[idx[v]]) for v in verts)
    bound = max(graph.labels()) if graph.edges else 0
    return MarkovMeasure(graph, tuple(sorted(edge_probs.items())), stationary, bound)


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rows)
    aug = [row[:] + [b] for row, b in zip(rows, rhs)]
    col = 0
    for row in range(n):
        pivot = None
        for r in range(row, n):
            if aug[r][col] != 0:
                pivot = r
                break
        while pivot is None and col < n - 1:
            col += 1
            for r in range(row, n):
                if aug[r][col] != 0:
                    pivot = r
                    break
        if pivot is None:
            break
        aug[row], aug[pivot] = aug[pivot], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [x * inv for x in aug[row]]
        for r in range(n):
            if r != row and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[row])]
        col += 1
        if col >= n:
            break
    return [aug[i][n] for i in range(n)]


def point_mass_on_cycle(graph: LabeledGraph, cycle_vertices_list: Sequence[int],
                        cycle_edges: Sequence[tuple[int, int, int]],
                        alphabet_bound: int) -> MarkovMeasure:
    """Invariant measure equidistributed along one directed cycle."""
    k = len(cycle_edges)
    edge_probs = tuple((e, Fraction(1)) for e in cycle_edges)
    stationary = tuple((v, Fraction(1, k)) for v in cycle_vertices_list)
    return MarkovMeasure(graph, edge_probs, stationary, alphabet_bound)


# -- empirical measures -----------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Sliding-window factor frequencies of one finite itinerary."""

    depth: int
    freqs: tuple[tuple[Word, object], ...]
    sample_length: int
    alphabet_bound: int

    def cylinder_mass(self, word: Sequence[int]):
        word = tuple(word)
        if len(word) > self.depth:
            raise ValueError("word longer than the measure depth")
        total = 0
        for w, f in self.freqs:
            if w[: len(word)] == word:
                total += f
        return total


def empirical_measure(itinerary: Sequence[int], depth: int,
                      alphabet_bound: Optional[int] = None) -> EmpiricalMeasure:
    """Depth-k window frequencies of a length-n itinerary (n-k+1 windows)."""
    word = tuple(itinerary)
    n = len(word)
    if depth < 1 or n < depth:
        raise ValueError("need sample length >= depth >= 1")
    bound = alphabet_bound if alphabet_bound is not None else max(word)
    counts: dict[Word, int] = {}
    for i in range(n - depth + 1):
        w = word[i : i + depth]
        counts[w] = counts.get(w, 0) + 1
    total = n - depth + 1
    freqs = tuple(sorted((w, Fraction(c, total)) for w, c in counts.items()))
    return EmpiricalMeasure(depth, freqs, n, bound)


@dataclass(frozen=True)
class MixtureMeasure:
    """Finite convex combination of measures, for the metric property checks."""

    parts: tuple[tuple[object, object], ...]  # (weight, measure)

    def cylinder_mass(self, word):
        return sum(w * m.cylinder_mass(word) for w, m in self.parts)


# -- truncated weak metric ----------------------------------------------------------------


def indicator_words(alphabet_bound: int, count: int) -> list[Word]:
    """First `count` words in length-then-lexicographic order."""
    out: list[Word] = []
    length = 1
    while len(out) < count:
        for w in itertools.product(range(alphabet_bound + 1), repeat=length):
            out.append(w)
            if len(out) >= count:
                break
        length += 1
    return out


def max_truncation(alphabet_bound: int, depth: int) -> int:
    """Largest K whose first K indicator words all fit within the given depth."""
    total = 0
    for length in range(1, depth + 1):
        total += (alphabet_bound + 1) ** length
    return total


def weak_metric_truncated(mu, nu, K: int, alphabet_bound: int) -> float:
    """Truncated compatible metric on measures.

    Sums 2^-(n+1) |mu[w_n] - nu[w_n]| over the first K cylinder indicator
    functions, enumerated by length then lexicographic order.  The specific
    dense family is a free choice; only the contract properties (bounded by
    one, convexity, joint perturbation) are relied on by callers.
    """
    total = Fraction(0) if isinstance(mu.cylinder_mass((0,)), Fraction) else 0.0
    for n, w in enumerate(indicator_words(alphabet_bound, K), start=1):
        diff = mu.cylinder_mass(w) - nu.cylinder_mass(w)
        total += abs(diff) * Fraction(1, 2 ** (n + 1))
    return total


# -- exhaustive cylinder sweeps ---------------------------------------------------------------


def cylinder_sweep(system: MinusBetaSystem, maxlen: int) -> list[CylinderReport]:
    """Reports for every admissible word up to the given length."""
    return [cylinder_measure(system, w) for w in system.enumerate_admissible(maxlen)]


def partition_identity_holds(system: MinusBetaSystem, n: int) -> bool:
    """Sum of cylinder lengths at length n equals one exactly."""
    total = system.beta.zero()
    for w in system.enumerate_admissible(n):
        if len(w) == n:
            total = total + cylinder_interval(system, w).length
    return total == 1


def additivity_holds(system: MinusBetaSystem, word: Sequence[int]) -> bool:
    """Cylinder length equals the sum over its admissible one-letter extensions."""
    word = tuple(word)
    parent = cylinder_interval(system, word).length
    total = system.beta.zero()
    for c in range(system.b + 1):
        try:
            total = total + cylinder_interval(system, word + (c,)).length
        except InadmissibleWord:
            continue
    return total == parent
