"""Gluing certificates for ordered sofic presentations.

A presentation is a labeled graph together with an ordered list of strongly
connected vertex subsets.  The checker certifies that words drawn from the
pieces, in order, can always be concatenated through bounded gap words: with
gaps of one fixed exact length (strong form) or gaps bounded by a common
length (the weaker form).  An exhaustive word-level oracle backs the state
machinery on small scales.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from negabeta.measures import point_mass_on_cycle, random_markov_measure
from negabeta.shiftgraph import LabeledGraph, ComponentChain, cycle_vertices, is_irreducible
from negabeta.transform import Word, word_to_text


class SpecError(Exception):
    """Base class for errors raised by this module."""


class DisconnectedPair(SpecError):
    """Some ordered component pair admits no connecting path at all."""

    def __init__(self, i: int, j: int):
        self.pair = (i, j)
        super().__init__(f"no path from component {i + 1} to component {j + 1}")


class EnumerationCapExceeded(SpecError):
    """A component language is too large for the exhaustive oracle."""


@dataclass(frozen=True)
class SoficPresentation:
    """Labeled graph with an ordered family of strongly connected pieces."""

    graph: LabeledGraph
    components: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for comp in self.components:
            if seen.intersection(comp):
                raise ValueError("components must be pairwise disjoint")
            seen.update(comp)
            if not is_irreducible(self.graph, comp):
                raise ValueError(f"component {comp} is not strongly connected")

    @classmethod
    def from_chain(cls, chain: ComponentChain) -> "SoficPresentation":
        return cls(chain.automaton.graph, chain.components)

    def component_graph(self, i: int) -> LabeledGraph:
        return self.graph.induced(self.components[i])

    def alphabet_bound(self) -> int:
        return max(self.graph.labels()) if self.graph.edges else 0


@dataclass(frozen=True)
class SpecCertificate:
    """Outcome of the gluing check.

    ``strong_one_way`` certificates promise a gap of exactly M between any
    ordered segments; ``w_one_way`` certificates promise gaps of at most M.
    The witness table stores one connecting gap word per ordered pair, and
    ``exact_min_M`` carries the brute-force optimum when it was computed.
    """

    kind: str  # strong_one_way | w_one_way | undetermined
    M: int
    witnesses: tuple[tuple[tuple[int, int], Word], ...]
    exact_min_M: Optional[int] = None

    def to_json_dict(self, alphabet_bound: int = 9) -> dict:
        pairs = [
            {"i": i + 1, "j": j + 1, "gap": len(w), "witness": word_to_text(w, alphabet_bound)}
            for (i, j), w in self.witnesses
        ]
        out = {"kind": self.kind, "M": self.M, "pairs": pairs}
        if self.exact_min_M is not None:
            out["exact_min_M"] = self.exact_min_M
        return out


# -- graph distance helpers ------------------------------------------------------


def _distances_from(graph: LabeledGraph, start: int,
                    allowed: Optional[set[int]] = None) -> dict[int, int]:
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for _, _, t in graph.out_edges(v):
                if allowed is not None and t not in allowed:
                    continue
                if t not in dist:
                    dist[t] = dist[v] + 1
                    nxt.append(t)
        frontier = nxt
    return dist


def _component_diameter(graph: LabeledGraph, comp: Sequence[int]) -> int:
    allowed = set(comp)
    diam = 0
    for p in comp:
        dist = _distances_from(graph, p, allowed)
        for q in comp:
            if q not in dist:
                raise ValueError("component not strongly connected")
            diam = max(diam, dist[q])
    return diam


def _min_cross(graph: LabeledGraph, src: Sequence[int], dst: Sequence[int]) -> Optional[int]:
    best = None
    targets = set(dst)
    for p in src:
        dist = _distances_from(graph, p)
        for q in targets:
            if q in dist and (best is None or dist[q] < best):
                best = dist[q]
    return best


def _shortest_cross_word(graph: LabeledGraph, src: Sequence[int], dst: Sequence[int]) -> Word:
    targets = set(dst)
    starts = list(src)
    parent: dict[int, tuple[Optional[int], Optional[int]]] = {p: (None, None) for p in starts}
    frontier = starts[:]
    if targets.intersection(starts):
        return ()
    while frontier:
        nxt = []
        for v in frontier:
            for _, a, t in graph.out_edges(v):
                if t not in parent:
                    parent[t] = (v, a)
                    if t in targets:
                        word = []
                        cur = t
                        while parent[cur][0] is not None:
                            word.append(parent[cur][1])
                            cur = parent[cur][0]
                        return tuple(reversed(word))
                    nxt.append(t)
        frontier = nxt
    raise DisconnectedPair(-1, -1)


# -- subset families (end states / start states of component words) ----------------


def _forward_family(graph: LabeledGraph, comp: Sequence[int]) -> set[frozenset[int]]:
    cset = set(comp)
    labels = {a for s, a, _ in graph.edges if s in cset}
    family = set()
    frontier = [frozenset(cset)]
    family.add(frozenset(cset))
    while frontier:
        nxt = []
        for states in frontier:
            for a in labels:
                t = frozenset(t for s, lbl, t in graph.edges
                              if s in states and lbl == a and t in cset)
                if t and t not in family:
                    family.add(t)
                    nxt.append(t)
        frontier = nxt
    return family


def _backward_family(graph: LabeledGraph, comp: Sequence[int]) -> set[frozenset[int]]:
    cset = set(comp)
    labels = {a for s, a, t in graph.edges if t in cset and s in cset}
    family = set()
    frontier = [frozenset(cset)]
    family.add(frozenset(cset))
    while frontier:
        nxt = []
        for states in frontier:
            for a in labels:
                t = frozenset(s for s, lbl, tt in graph.edges
                              if tt in states and lbl == a and s in cset)
                if t and t not in family:
                    family.add(t)
                    nxt.append(t)
        frontier = nxt
    return family


def _bool_power_reach(graph: LabeledGraph, max_power: int) -> list[dict[int, set[int]]]:
    """reach[m][p] = set of vertices reachable from p along exactly m edges."""
    succ: dict[int, set[int]] = {v: set() for v in range(graph.vertex_count)}
    for s, _, t in graph.edges:
        succ[s].add(t)
    reach = [{v: {v} for v in range(graph.vertex_count)}]
    for _ in range(max_power):
        prev = reach[-1]
        cur = {v: set().union(*(succ[w] for w in prev[v])) if prev[v] else set()
               for v in range(graph.vertex_count)}
        reach.append(cur)
    return reach


def _loops_everywhere(p: SoficPresentation) -> bool:
    """Every component state carries a self-loop inside its component."""
    for comp in p.components:
        for v in comp:
            if not any(s == v and t == v for s, _, t in p.graph.edges):
                return False
    return True


# -- the certifier ------------------------------------------------------------------


def spec_bound(p: SoficPresentation, with_oracle: bool = False,
               oracle_maxlen: int = 4) -> SpecCertificate:
    """Certify ordered gluing with bounded gaps.

    The weak bound M is the sum of the worst in-component diameter, the worst
    ordered cross distance, and the worst target diameter; per-pair witness
    gap words are recorded.  A strong certificate (gaps of one exact length)
    is issued only when every component state carries a self-loop, because a
    loop at each end state is what upgrades a bounded gap to an exact one for
    tuples of any length; the certified exact length is then the smallest
    value that connects every end-state set to every start-state set.  When
    ``with_oracle`` is set, the exhaustive word oracle refines ``exact_min_M``.
    """
    q = len(p.components)
    if q == 0:
        raise ValueError("presentation has no components")
    diams = [_component_diameter(p.graph, comp) for comp in p.components]
    cross: dict[tuple[int, int], int] = {}
    for i in range(q):
        for j in range(i, q):
            c = _min_cross(p.graph, p.components[i], p.components[j])
            if c is None:
                raise DisconnectedPair(i, j)
            cross[(i, j)] = c
    m_bound = max(diams) + max(cross.values()) + max(diams)

    witnesses = tuple(
        ((i, j), _shortest_cross_word(p.graph, p.components[i], p.components[j]))
        for i in range(q)
        for j in range(i, q)
    )

    if _loops_everywhere(p):
        forward = [_forward_family(p.graph, comp) for comp in p.components]
        backward = [_backward_family(p.graph, comp) for comp in p.components]
        reach = _bool_power_reach(p.graph, m_bound)
        strong_m = None
        for m in range(m_bound + 1):
            if _exact_gap_everywhere(p, forward, backward, reach[m]):
                strong_m = m
                break
        if strong_m is not None:
            exact = None
            if with_oracle:
                exact = bruteforce_exact_min(p, oracle_maxlen)
            return SpecCertificate("strong_one_way", strong_m, witnesses, exact)

    exact = None
    if with_oracle:
        table = spec_bruteforce(p, oracle_maxlen)
        exact = table.overall_max
    return SpecCertificate("w_one_way", m_bound, witnesses, exact)


def _exact_gap_everywhere(p, forward, backward, reach_m) -> bool:
    q = len(p.components)
    for i in range(q):
        for j in range(i, q):
            for ends in forward[i]:
                for starts in backward[j]:
                    if not any(reach_m[e].intersection(starts) for e in ends):
                        return False
    return True


# -- exhaustive word oracle ------------------------------------------------------------


@dataclass(frozen=True)
class BruteForceTable:
    """Aggregated minimal-gap maxima per ordered component pair."""

    pair_max: tuple[tuple[tuple[int, int], int], ...]
    overall_max: int
    maxlen: int

    def as_dict(self) -> dict[tuple[int, int], int]:
        return dict(self.pair_max)


def _component_words(p: SoficPresentation, i: int, maxlen: int,
                     cap: int) -> list[Word]:
    comp = set(p.components[i])
    sub = [(s, a, t) for s, a, t in p.graph.edges if s in comp and t in comp]
    labels = sorted({a for _, a, _ in sub})
    words: list[Word] = [()]
    frontier: list[tuple[Word, frozenset[int]]] = [((), frozenset(comp))]
    while frontier:
        word, states = frontier.pop()
        if len(word) >= maxlen:
            continue
        for a in labels:
            t = frozenset(tt for s, lbl, tt in sub if s in states and lbl == a)
            if t:
                w2 = word + (a,)
                words.append(w2)
                if len(words) > cap:
                    raise EnumerationCapExceeded(
                        f"component {i + 1} exceeds {cap} words at length {maxlen}"
                    )
                frontier.append((w2, t))
    return words


def _full_end_states(p: SoficPresentation, word: Word) -> frozenset[int]:
    states = frozenset(range(p.graph.vertex_count))
    for a in word:
        states = frozenset(t for s, lbl, t in p.graph.edges if s in states and lbl == a)
        if not states:
            break
    return states


def _full_start_states(p: SoficPresentation, word: Word) -> frozenset[int]:
    states = frozenset(range(p.graph.vertex_count))
    for a in reversed(word):
        states = frozenset(s for s, lbl, t in p.graph.edges if t in states and lbl == a)
        if not states:
            break
    return states


def _gluable_gaps(p: SoficPresentation, ends: frozenset[int], starts: frozenset[int],
                  gap_cap: int) -> set[int]:
    """Gap lengths g <= gap_cap for which some length-g path joins the sets."""
    succ: dict[int, set[int]] = {v: set() for v in range(p.graph.vertex_count)}
    for s, _, t in p.graph.edges:
        succ[s].add(t)
    out = set()
    current = set(ends)
    for g in range(gap_cap + 1):
        if current.intersection(starts):
            out.add(g)
        current = set().union(*(succ[v] for v in current)) if current else set()
        if not current:
            break
    return out


def spec_bruteforce(p: SoficPresentation, maxlen: int, cap: int = 50000,
                    gap_cap: Optional[int] = None) -> BruteForceTable:
    """Word-level minimal gaps for every ordered pair of component words.

    Pairs are grouped by (end-state set, start-state set), which preserves the
    word-level semantics exactly while collapsing the quadratic blowup.
    """
    q = len(p.components)
    if gap_cap is None:
        diams = [_component_diameter(p.graph, comp) for comp in p.components]
        gap_cap = 2 * max(diams) + p.graph.vertex_count + 2
    end_classes: list[set[frozenset[int]]] = []
    start_classes: list[set[frozenset[int]]] = []
    for i in range(q):
        words = _component_words(p, i, maxlen, cap)
        end_classes.append({_full_end_states(p, w) for w in words})
        start_classes.append({_full_start_states(p, w) for w in words})
    pair_max = []
    overall = 0
    for i in range(q):
        for j in range(i, q):
            worst = 0
            for ends in end_classes[i]:
                for starts in start_classes[j]:
                    gaps = _gluable_gaps(p, ends, starts, gap_cap)
                    if not gaps:
                        raise DisconnectedPair(i, j)
                    worst = max(worst, min(gaps))
            pair_max.append(((i, j), worst))
            overall = max(overall, worst)
    return BruteForceTable(tuple(pair_max), overall, maxlen)


def bruteforce_exact_min(p: SoficPresentation, maxlen: int, cap: int = 50000,
                         gap_cap: Optional[int] = None) -> Optional[int]:
    """Smallest M such that every ordered word pair glues with a gap of exactly M."""
    q = len(p.components)
    if gap_cap is None:
        diams = [_component_diameter(p.graph, comp) for comp in p.components]
        gap_cap = 2 * max(diams) + p.graph.vertex_count + 2
    achievable: Optional[set[int]] = None
    for i in range(q):
        words_i = _component_words(p, i, maxlen, cap)
        ends_i = {_full_end_states(p, w) for w in words_i}
        for j in range(i, q):
            words_j = _component_words(p, j, maxlen, cap)
            starts_j = {_full_start_states(p, w) for w in words_j}
            for ends in ends_i:
                for starts in starts_j:
                    gaps = _gluable_gaps(p, ends, starts, gap_cap)
                    achievable = gaps if achievable is None else achievable & gaps
                    if not achievable:
                        return None
    return min(achievable) if achievable else None


# -- coverage and support checks ----------------------------------------------------------


def omega_coverage_check(p: SoficPresentation) -> bool:
    """Every vertex lying on a directed cycle belongs to some component."""
    covered = set()
    for comp in p.components:
        covered.update(comp)
    return cycle_vertices(p.graph).issubset(covered)


def ergodic_support_check(p: SoficPresentation, trials: int, seed: int = 0) -> bool:
    """Random single-component Markov measures stay confined to their component.

    Also checks point masses on cycles.  The construction confines supports by
    design; the check guards the plumbing against regressions.
    """
    rng = random.Random(seed)
    comps = [comp for comp in p.components]
    for _ in range(trials):
        i = rng.randrange(len(comps))
        comp = comps[i]
        measure = random_markov_measure(p.graph, comp, rng)
        vertices = {v for e in measure.support_edges() for v in (e[0], e[2])}
        if not vertices.issubset(set(comp)):
            return False
        for other in range(len(comps)):
            if other != i and vertices.intersection(comps[other]):
                return False
        cycle = _some_cycle(p.graph, comp, rng)
        if cycle is not None:
            verts, edges = cycle
            mass = point_mass_on_cycle(p.graph, verts, edges, p.alphabet_bound())
            if not {v for v, _ in mass.stationary}.issubset(set(comp)):
                return False
    return True


def _some_cycle(graph: LabeledGraph, comp: Sequence[int], rng: random.Random):
    """A directed cycle through a random vertex of the component, if any."""
    cset = set(comp)
    start = rng.choice(list(comp))
    parent: dict[int, tuple[Optional[int], Optional[tuple]]] = {start: (None, None)}
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for e in graph.out_edges(v):
                _, _, t = e
                if t not in cset:
                    continue
                if t == start:
                    edges = [e]
                    cur = v
                    while parent[cur][0] is not None:
                        edges.append(parent[cur][1])
                        cur = parent[cur][0]
                    edges.reverse()
                    verts = [edge[0] for edge in edges]
                    return verts, edges
                if t not in parent:
                    parent[t] = (v, e)
                    nxt.append(t)
        frontier = nxt
    return None


# -- randomized soundness of issued certificates ---------------------------------------------


def gluing_test(p: SoficPresentation, cert: SpecCertificate, k: int, trials: int,
                seed: int, word_len: int = 4) -> bool:
    """Randomized k-segment gluing trials against an issued certificate.

    Draws k component words with nondecreasing component indices and checks
    that gaps of exactly M (strong) or at most M (weak) realize the
    concatenation in the full graph.
    """
    rng = random.Random(seed)
    q = len(p.components)
    succ: dict[int, set[int]] = {v: set() for v in range(p.graph.vertex_count)}
    for s, _, t in p.graph.edges:
        succ[s].add(t)

    def random_component_word(i: int) -> Word:
        comp = set(p.components[i])
        sub = [(s, a, t) for s, a, t in p.graph.edges if s in comp and t in comp]
        v = rng.choice(sorted(comp))
        word = []
        for _ in range(rng.randrange(1, word_len + 1)):
            options = [e for e in sub if e[0] == v]
            if not options:
                break
            e = rng.choice(options)
            word.append(e[1])
            v = e[2]
        return tuple(word)

    for _ in range(trials):
        idx = sorted(rng.randrange(q) for _ in range(k))
        words = [random_component_word(i) for i in idx]
        states = _full_end_states(p, words[0])
        if not states:
            return False
        ok = True
        for w in words[1:]:
            starts = _full_start_states(p, w)
            if cert.kind == "strong_one_way":
                gaps = [cert.M]
            else:
                gaps = range(cert.M + 1)
            matched = None
            current = set(states)
            for g in range(max(gaps) + 1):
                if g in gaps and current.intersection(starts):
                    matched = (g, current.intersection(starts))
                    break
                current = set().union(*(succ[v] for v in current)) if current else set()
            if matched is None:
                ok = False
                break
            # continue from the glued start states after reading w
            states = matched[1]
            for a in w:
                states = {t for s, lbl, t in p.graph.edges if s in states and lbl == a}
        if not ok:
            return False
    return True
