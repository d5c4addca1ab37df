"""Finite presentations of the symbolic system attached to an expansion of 1.

Builds the infinite labeled graph prescribed by the expansion (spine plus
three families of back edges), folds it to a finite automaton using the
periodicity of the tail, and decomposes the result into the ordered chain of
irreducible pieces that carries every invariant measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from negabeta.transform import DigitSequence, MinusBetaSystem, Word, word_to_text

Edge = tuple[int, int, int]  # (source, label, target)


class ShiftGraphError(Exception):
    """Base class for errors raised by this module."""


class HorizonTooSmall(ShiftGraphError):
    """The requested horizon cannot accommodate the construction."""


class FoldNotVerified(ShiftGraphError):
    """No verified folding was found within the horizon."""

    def __init__(self, message: str, periodicity_violated: bool = False):
        self.periodicity_violated = periodicity_violated
        super().__init__(message)


@dataclass(frozen=True)
class LabeledGraph:
    """Immutable labeled directed graph on vertices 0..vertex_count-1."""

    vertex_count: int
    edges: frozenset[Edge]

    def __post_init__(self):
        for src, label, dst in self.edges:
            if not (0 <= src < self.vertex_count and 0 <= dst < self.vertex_count):
                raise ValueError("edge endpoint outside the vertex range")
            if label < 0:
                raise ValueError("labels are nonnegative digits")

    def out_edges(self, v: int) -> list[Edge]:
        return sorted(e for e in self.edges if e[0] == v)

    def in_edges(self, v: int) -> list[Edge]:
        return sorted(e for e in self.edges if e[2] == v)

    def labels(self) -> set[int]:
        return {label for _, label, _ in self.edges}

    def successors(self, v: int) -> set[int]:
        return {dst for src, _, dst in self.edges if src == v}

    def induced(self, vertices: Iterable[int]) -> "LabeledGraph":
        """Subgraph on the given vertices, re-indexed in sorted order."""
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        edges = frozenset(
            (index[s], a, index[t]) for s, a, t in self.edges if s in index and t in index
        )
        return LabeledGraph(len(keep), edges)

    def adjacency(self, vertices: Optional[Sequence[int]] = None) -> np.ndarray:
        verts = list(vertices) if vertices is not None else list(range(self.vertex_count))
        index = {v: i for i, v in enumerate(verts)}
        mat = np.zeros((len(verts), len(verts)))
        for s, _, t in self.edges:
            if s in index and t in index:
                mat[index[s], index[t]] += 1
        return mat

    def to_dot(self, components: Optional[Sequence[Sequence[int]]] = None,
               alphabet_bound: int = 9) -> str:
        lines = ["digraph shift {", "  rankdir=LR;"]
        claimed = set()
        if components:
            for i, comp in enumerate(components):
                lines.append(f"  subgraph cluster_{i} {{")
                lines.append(f'    label="component {i + 1}";')
                for v in sorted(comp):
                    lines.append(f"    V{v};")
                    claimed.add(v)
                lines.append("  }")
        for v in range(self.vertex_count):
            if v not in claimed:
                lines.append(f"  V{v};")
        for s, a, t in sorted(self.edges):
            lines.append(f'  V{s} -> V{t} [label="{word_to_text((a,), alphabet_bound)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "vertices": self.vertex_count,
            "edges": sorted([s, a, t] for s, a, t in self.edges),
        }


def max_prefix_suffix(w: Sequence[int], s: DigitSequence) -> int:
    """Length of the longest prefix of s that is a suffix of w.

    Runs the prefix-function automaton of the stream s over w, so each step
    costs amortized O(1) instead of rescanning all suffixes.
    """
    w = tuple(w)
    m = len(w)
    if m == 0:
        return 0
    pattern = s.prefix(m)
    # failure table over the prefix structure of s
    fail = [0] * (m + 1)
    fail[0] = -1
    for i in range(1, m + 1):
        j = fail[i - 1]
        while j >= 0 and pattern[j] != pattern[i - 1]:
            j = fail[j]
        fail[i] = j + 1
    state = 0
    for c in w:
        while state >= 0 and (state >= m or pattern[state] != c):
            state = fail[state]
        state += 1
    return state


def build_gamma(s: DigitSequence, horizon: int) -> LabeledGraph:
    """Vertices V0..V_horizon and the four edge families driven by s.

    Spine edges V_i -> V_{i+1} carry digit s_i.  At even i every smaller
    digit falls back to the vertex indexed by the maximal prefix-suffix
    overlap; at odd i every larger digit up to s_0 does the same, and when
    s_i < s_0 an extra edge labeled s_0 returns to V_1 (merged with the
    previous family when they coincide).  Every back edge must land at index
    at most u+v; that bound is asserted during the build.
    """
    u, v = s.u, s.v
    if horizon < u + 2 * v:
        raise HorizonTooSmall(f"horizon {horizon} < {u + 2 * v}")
    edges: set[Edge] = set()
    s0 = s.digit(0)
    prefix = s.prefix(horizon + 1)
    for i in range(horizon):
        si = prefix[i]
        edges.add((i, si, i + 1))
        if i % 2 == 0:
            candidates = range(0, si)
        else:
            candidates = range(si + 1, s0 + 1)
        for a in candidates:
            j = max_prefix_suffix(prefix[:i] + (a,), s)
            if j > u + v:
                raise ShiftGraphError(
                    f"back edge from V{i} lands at V{j} beyond u+v={u + v}"
                )
            edges.add((i, a, j))
        if i % 2 == 1 and si < s0:
            edges.add((i, s0, 1))
    return LabeledGraph(horizon + 1, edges)


def _back_edges(g: LabeledGraph, i: int, spine_label: int) -> frozenset[tuple[int, int]]:
    return frozenset((a, t) for s, a, t in g.edges if s == i and not (a == spine_label and t == i + 1))


@dataclass(frozen=True)
class FoldedAutomaton:
    """Finite quotient of the infinite graph under verified tail periodicity."""

    graph: LabeledGraph
    fold_start: int
    fold_period: int
    source: Optional[DigitSequence]
    alphabet_bound: int

    def fold_index(self, i: int) -> int:
        if i < self.fold_start + self.fold_period:
            return i
        return self.fold_start + (i - self.fold_start) % self.fold_period

    @property
    def state_count(self) -> int:
        return self.graph.vertex_count

    def step(self, states: frozenset[int], label: int) -> frozenset[int]:
        return frozenset(t for s, a, t in self.graph.edges if s in states and a == label)

    def all_states(self) -> frozenset[int]:
        return frozenset(range(self.state_count))

    def reads(self, word: Sequence[int]) -> frozenset[int]:
        """End states of all readings of the word, starting anywhere."""
        states = self.all_states()
        for a in word:
            states = self.step(states, a)
            if not states:
                break
        return states

    def accepts(self, word: Sequence[int]) -> bool:
        return bool(self.reads(word))


def fold(g: LabeledGraph, u: int, v: int) -> FoldedAutomaton:
    """Fold the graph onto a finite automaton by detected tail periodicity.

    Periodicity of the edge structure is guaranteed with period 2v, but a
    proper divisor of 2v may already work (integer bases fold at period v);
    candidates are tried smallest first, and for each one every start index
    from u upward.  Verification compares spine labels and exact back-edge
    sets over a full 2v window, which cannot be fooled by the quotient map.
    """
    horizon = g.vertex_count - 1
    periods = sorted(d for d in range(1, 2 * v + 1) if (2 * v) % d == 0)
    last_error = None
    for p in periods:
        max_start = horizon - (2 * v + p)
        for start in range(u, max(u, max_start) + 1):
            if start + 2 * v + p > horizon:
                break
            ok = True
            for i in range(start, start + 2 * v):
                if _spine_digit(g, i) != _spine_digit(g, i + p):
                    ok = False
                    break
                if _back_edges(g, i, _spine_digit(g, i)) != _back_edges(g, i + p, _spine_digit(g, i + p)):
                    ok = False
                    break
            if ok:
                return _build_folded(g, start, p, u, v)
        last_error = f"period {p} not verified within horizon {horizon}"
    # period 2v is mathematically guaranteed for start >= u given enough room
    if horizon < u + 6 * v:
        raise FoldNotVerified(f"horizon {horizon} too small to verify folding")
    raise FoldNotVerified(last_error or "fold failed", periodicity_violated=True)


def _spine_digit(g: LabeledGraph, i: int) -> int:
    lbls = [a for (src, a, t) in g.edges if src == i and t == i + 1]
    if len(lbls) == 1:
        return lbls[0]
    # a back edge can coincide with the spine position; the spine label is
    # the one that continues at every index, recover it from edge structure:
    # the spine edge is the unique (i, a, i+1) that is not also a back edge
    # pattern.  All graphs produced by build_gamma keep them distinct except
    # possibly at i+1 == back target, where labels still differ.
    raise FoldNotVerified(f"ambiguous spine at V{i}", periodicity_violated=True)


def _build_folded(g: LabeledGraph, start: int, period: int, u: int, v: int) -> FoldedAutomaton:
    total = start + period

    def fold_index(i: int) -> int:
        return i if i < total else start + (i - start) % period

    edges = set()
    for s_, a, t in g.edges:
        if s_ < total:
            target = fold_index(t)
            if t != s_ + 1 and target > u + v:
                raise FoldNotVerified(
                    f"folded back edge V{s_}->V{target} beyond u+v={u + v}",
                    periodicity_violated=True,
                )
            edges.add((s_, a, target))
    folded = LabeledGraph(total, frozenset(edges))
    bound = max(folded.labels()) if folded.edges else 0
    return FoldedAutomaton(folded, start, period, None, bound)


@dataclass(frozen=True)
class ComponentChain:
    """Ordered irreducible pieces (l_i, n_i), the last one open-ended."""

    pairs: tuple[tuple[int, Optional[int]], ...]
    N: int
    components: tuple[tuple[int, ...], ...]
    automaton: FoldedAutomaton

    @property
    def q(self) -> int:
        return len(self.components)

    def component_graph(self, i: int) -> LabeledGraph:
        return self.automaton.graph.induced(self.components[i])

    def to_json_dict(self) -> dict:
        out = []
        for (l, n), comp in zip(self.pairs, self.components):
            out.append({"l": l, "n": n, "vertices": sorted(comp)})
        return {"N": self.N, "components": out}


def is_irreducible(g: LabeledGraph, vertices: Iterable[int]) -> bool:
    """True iff the induced subgraph is strongly connected.

    A single vertex counts only when it carries a self-loop: a loop-free
    vertex generates no shift-invariant set.
    """
    verts = sorted(set(vertices))
    if not verts:
        raise ValueError("vertex subset must be nonempty")
    vset = set(verts)
    if len(verts) == 1:
        v = verts[0]
        return any(s == v and t == v for s, _, t in g.edges)
    adj: dict[int, set[int]] = {v: set() for v in verts}
    radj: dict[int, set[int]] = {v: set() for v in verts}
    for s, _, t in g.edges:
        if s in vset and t in vset:
            adj[s].add(t)
            radj[t].add(s)

    def reach(start, nbrs):
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in nbrs[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    root = verts[0]
    return reach(root, adj) == vset and reach(root, radj) == vset


def cycle_vertices(g: LabeledGraph) -> set[int]:
    """Vertices lying on some directed cycle (nontrivial SCC or a self-loop)."""
    n = g.vertex_count
    adj = [[] for _ in range(n)]
    for s, _, t in g.edges:
        adj[s].append(t)
    index = [0] * n
    low = [0] * n
    onstack = [False] * n
    visited = [False] * n
    stack: list[int] = []
    counter = [1]
    out: set[int] = set()

    def strongconnect(root):
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                visited[v] = True
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                onstack[v] = True
            advanced = False
            for nxt in range(pi, len(adj[v])):
                w = adj[v][nxt]
                if not visited[w]:
                    work[-1] = (v, nxt + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                elif onstack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1:
                    out.update(comp)
                else:
                    w = comp[0]
                    if any(s == w and t == w for s, _, t in g.edges):
                        out.add(w)

    for v in range(n):
        if not visited[v]:
            strongconnect(v)
    return out


def decompose(aut: FoldedAutomaton) -> ComponentChain:
    """Ordered chain of irreducible pieces of the folded automaton.

    N is the least index whose tail sub-automaton is strongly connected;
    earlier pieces are grown greedily from each entry vertex (a vertex with
    at least two in-edges), exactly mirroring the inductive construction the
    folding makes finite.
    """
    g = aut.graph
    total = g.vertex_count
    N = None
    for k in range(total):
        if is_irreducible(g, range(k, total)):
            N = k
            break
    if N is None:
        raise ShiftGraphError("no irreducible tail found; folding is inconsistent")

    pairs: list[tuple[int, Optional[int]]] = []
    components: list[tuple[int, ...]] = []
    l = 0
    while True:
        if l == N:
            pairs.append((N, None))
            components.append(tuple(range(N, total)))
            break
        n_i = None
        for k in range(l, N):
            if is_irreducible(g, range(l, k + 1)):
                n_i = k
        if n_i is None:
            raise ShiftGraphError(f"no irreducible block starts at V{l}")
        pairs.append((l, n_i))
        components.append(tuple(range(l, n_i + 1)))
        nxt = None
        for k in range(n_i + 1, N + 1):
            if len(g.in_edges(k)) >= 2:
                nxt = k
                break
        if nxt is None:
            raise ShiftGraphError("chain construction found no further entry vertex")
        l = nxt
    return ComponentChain(tuple(pairs), N, tuple(components), aut)


# -- counting and entropy --------------------------------------------------------


def count_words(aut: FoldedAutomaton, n: int) -> int:
    """Number of distinct label words of length n readable from any state."""
    if n < 0:
        raise ValueError("n must be >= 0")
    labels = sorted(aut.graph.labels())
    counts: dict[frozenset[int], int] = {aut.all_states(): 1}
    for _ in range(n):
        nxt: dict[frozenset[int], int] = {}
        for states, c in counts.items():
            for a in labels:
                t = aut.step(states, a)
                if t:
                    nxt[t] = nxt.get(t, 0) + c
        counts = nxt
        if not counts:
            return 0
    return sum(counts.values())


def enumerate_words(aut: FoldedAutomaton, maxlen: int) -> Iterator[Word]:
    """All distinct readable words of length 1..maxlen, shortest first."""
    labels = sorted(aut.graph.labels())

    def expand(word: Word, states: frozenset[int]) -> Iterator[Word]:
        if len(word) >= maxlen:
            return
        for a in labels:
            t = aut.step(states, a)
            if t:
                w2 = word + (a,)
                yield w2
                yield from expand(w2, t)

    yield from expand((), aut.all_states())


def spectral_radius(mat: np.ndarray) -> float:
    """Largest eigenvalue magnitude of a nonnegative matrix.

    Power iteration with a residual-based convergence test; for matrices of
    at most six states the result is cross-checked against the roots of the
    characteristic polynomial, which also rescues the nearly nilpotent cases
    where power iteration legitimately stalls (tiny spectral gap).
    """
    n = mat.shape[0]
    if n == 0 or not mat.any():
        return 0.0
    scale = float(np.max(np.sum(mat, axis=1)))
    scaled = mat / scale
    shifted = scaled + np.eye(n)  # damps oscillation on periodic graphs
    vec = np.ones(n) / math.sqrt(n)
    lam = 1.0
    converged = False
    for _ in range(20000):
        nxt = shifted @ vec
        norm = np.linalg.norm(nxt)
        if norm == 0:
            return 0.0
        nxt /= norm
        lam = float(nxt @ shifted @ nxt)
        residual = float(np.linalg.norm(shifted @ nxt - lam * nxt))
        vec = nxt
        if residual <= 1e-13 * max(1.0, abs(lam)):
            converged = True
            break
    rho = (lam - 1.0) * scale
    if n <= 6:
        rho_poly = float(max(abs(np.roots(np.poly(mat)))))
        if abs(rho_poly - rho) > 1e-8 * max(1.0, rho_poly):
            if not converged:
                return max(rho_poly, 0.0)
            raise ArithmeticError(
                f"power iteration ({rho}) and characteristic polynomial ({rho_poly}) disagree"
            )
    return max(rho, 0.0)


def entropy_estimate(aut: FoldedAutomaton, vertices: Optional[Sequence[int]] = None) -> float:
    """Log of the spectral radius of the (component) adjacency matrix."""
    mat = aut.graph.adjacency(vertices)
    rho = spectral_radius(mat)
    return math.log(rho) if rho > 0 else float("-inf")


def cross_validate(aut: FoldedAutomaton, system: MinusBetaSystem,
                   n: int) -> tuple[bool, Optional[Word]]:
    """Compare automaton words with order-admissible words up to length n.

    Returns (True, None) when the two languages agree on every length up to
    n, else (False, first counterexample word).
    """
    automaton_words = set(enumerate_words(aut, n))
    admissible = set(system.enumerate_admissible(n))
    if automaton_words == admissible:
        return True, None
    diff = sorted(automaton_words.symmetric_difference(admissible), key=lambda w: (len(w), w))
    return False, diff[0]


# -- construction convenience -----------------------------------------------------

_HORIZON_CAP_FACTOR = 8


def automaton_for(system: MinusBetaSystem, horizon: Optional[int] = None) -> FoldedAutomaton:
    """Build (and cache) the folded automaton of an exact system.

    The default horizon is u+6v+4; a failed fold verification doubles it, up
    to a hard cap, before giving up.
    """
    if system._aut_cache is not None and horizon is None:
        return system._aut_cache
    s = system.expansion_of_one()
    base = s.u + 6 * s.v + 4
    h = horizon if horizon is not None else base
    attempts = 0
    while True:
        g = build_gamma(s, h)
        try:
            aut = fold(g, s.u, s.v)
            aut = FoldedAutomaton(aut.graph, aut.fold_start, aut.fold_period, s, system.b)
            break
        except FoldNotVerified as err:
            if err.periodicity_violated or h >= base * _HORIZON_CAP_FACTOR:
                raise
            h *= 2
            attempts += 1
    if horizon is None:
        system._aut_cache = aut
    return aut


def chain_for(system: MinusBetaSystem) -> ComponentChain:
    return decompose(automaton_for(system))
