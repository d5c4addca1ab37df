"""Graph construction, folding, decomposition, counting, cross-validation."""

import math
import random

import pytest

from negabeta.algebraic import IntPolynomial, make_algebraic
from negabeta.shiftgraph import (
    FoldNotVerified,
    HorizonTooSmall,
    LabeledGraph,
    automaton_for,
    build_gamma,
    chain_for,
    count_words,
    cross_validate,
    cycle_vertices,
    decompose,
    entropy_estimate,
    enumerate_words,
    fold,
    is_irreducible,
    max_prefix_suffix,
    spectral_radius,
)
from negabeta.transform import MinusBetaSystem


@pytest.fixture(scope="module")
def pisot_sys():
    sys = MinusBetaSystem(make_algebraic(IntPolynomial((-1, -1, 0, 1)), 1, 2))
    sys.expansion_of_one()
    return sys


@pytest.fixture(scope="module")
def two_sys():
    sys = MinusBetaSystem(make_algebraic(IntPolynomial((-2, 1)), 1, 3))
    sys.expansion_of_one()
    return sys


@pytest.fixture(scope="module")
def three_sys():
    sys = MinusBetaSystem(make_algebraic(IntPolynomial((-3, 1)), 2, 4))
    sys.expansion_of_one()
    return sys


# -- prefix-suffix overlap -----------------------------------------------------


def brute_prefix_suffix(w, s):
    """Oracle: check every suffix of w against the prefixes of s."""
    best = 0
    for j in range(1, len(w) + 1):
        if tuple(w[len(w) - j:]) == s.prefix(j):
            best = j
    return best


def test_max_prefix_suffix_examples(pisot_sys):
    s = pisot_sys.expansion_of_one()
    assert max_prefix_suffix((1, 0, 0, 1, 0), s) == 2
    assert max_prefix_suffix((0,), s) == 0
    assert max_prefix_suffix((), s) == 0


def test_max_prefix_suffix_against_brute_force(pisot_sys, two_sys):
    rng = random.Random(17)
    for sys in (pisot_sys, two_sys):
        s = sys.expansion_of_one()
        for _ in range(300):
            w = tuple(rng.randrange(0, sys.b + 1) for _ in range(rng.randrange(0, 12)))
            assert max_prefix_suffix(w, s) == brute_prefix_suffix(w, s)


# -- graph construction --------------------------------------------------------


def test_build_gamma_pisot_edges(pisot_sys):
    s = pisot_sys.expansion_of_one()
    g = build_gamma(s, 7)
    spine = {(i, s.digit(i), i + 1) for i in range(7)}
    extra = {(0, 0, 0), (1, 1, 1), (4, 0, 2), (6, 0, 2)}
    assert g.edges == frozenset(spine | extra)


def test_build_gamma_beta2_edges(two_sys):
    s = two_sys.expansion_of_one()
    g = build_gamma(s, 5)
    spine = {(i, s.digit(i), i + 1) for i in range(5)}
    extra = {(0, 0, 0), (1, 1, 1), (2, 0, 0), (3, 1, 1), (4, 0, 0)}
    assert g.edges == frozenset(spine | extra)


def test_build_gamma_spine_always_present(pisot_sys, two_sys, three_sys):
    for sys in (pisot_sys, two_sys, three_sys):
        s = sys.expansion_of_one()
        g = build_gamma(s, s.u + 2 * s.v + 2)
        assert (0, s.digit(0), 1) in g.edges


def test_build_gamma_horizon_check(pisot_sys):
    s = pisot_sys.expansion_of_one()
    with pytest.raises(HorizonTooSmall):
        build_gamma(s, s.u + 2 * s.v - 1)


def test_back_edges_land_at_most_u_plus_v(pisot_sys, two_sys, three_sys):
    for sys in (pisot_sys, two_sys, three_sys):
        s = sys.expansion_of_one()
        g = build_gamma(s, s.u + 8 * s.v + 4)
        for src, _, dst in g.edges:
            if dst != src + 1:
                assert dst <= s.u + s.v


# -- folding ----------------------------------------------------------------------


def test_fold_pisot_five_states(pisot_sys):
    aut = automaton_for(pisot_sys)
    assert aut.state_count == 5
    assert aut.fold_start == 3
    assert aut.fold_index(5) == 3
    assert aut.fold_index(6) == 4


def test_fold_beta2_two_states(two_sys):
    aut = automaton_for(two_sys)
    assert aut.state_count == 2
    assert aut.graph.edges == frozenset({(0, 0, 0), (0, 1, 1), (1, 0, 0), (1, 1, 1)})


def test_fold_purely_periodic_starts_at_zero(two_sys, three_sys):
    for sys in (two_sys, three_sys):
        aut = automaton_for(sys)
        assert aut.fold_start == 0


def test_fold_idempotence(pisot_sys):
    # expanding the folded structure and folding again reproduces it
    s = pisot_sys.expansion_of_one()
    g = build_gamma(s, s.u + 6 * s.v + 4)
    first = fold(g, s.u, s.v)
    g2 = build_gamma(s, s.u + 10 * s.v + 8)
    second = fold(g2, s.u, s.v)
    assert first.graph == second.graph
    assert (first.fold_start, first.fold_period) == (second.fold_start, second.fold_period)


def test_fold_insufficient_horizon(pisot_sys):
    s = pisot_sys.expansion_of_one()
    g = build_gamma(s, s.u + 2 * s.v)
    with pytest.raises(FoldNotVerified):
        fold(g, s.u, s.v)


# -- decomposition ------------------------------------------------------------------


def test_decompose_pisot(pisot_sys):
    chain = decompose(automaton_for(pisot_sys))
    assert chain.q == 3
    assert chain.N == 2
    assert chain.components == ((0,), (1,), (2, 3, 4))
    assert chain.pairs == ((0, 0), (1, 1), (2, None))


def test_decompose_beta2(two_sys):
    chain = decompose(automaton_for(two_sys))
    assert chain.q == 1
    assert chain.N == 0
    assert chain.components == ((0, 1),)


def test_decompose_single_loop_vertex():
    g = LabeledGraph(1, frozenset({(0, 0, 0)}))
    from negabeta.shiftgraph import FoldedAutomaton

    aut = FoldedAutomaton(g, 0, 1, None, 0)
    chain = decompose(aut)
    assert chain.q == 1 and chain.components == ((0,),)


def test_decompose_covers_cycle_vertices(pisot_sys, two_sys, three_sys):
    for sys in (pisot_sys, two_sys, three_sys):
        chain = decompose(automaton_for(sys))
        covered = {v for comp in chain.components for v in comp}
        assert cycle_vertices(chain.automaton.graph).issubset(covered)


def test_is_irreducible_cases(pisot_sys):
    g = automaton_for(pisot_sys).graph
    assert is_irreducible(g, [0])           # 0-loop
    assert not is_irreducible(g, [0, 1])    # no return edge
    assert is_irreducible(g, [2, 3, 4])     # tail cycle structure
    lonely = LabeledGraph(2, frozenset({(0, 0, 1)}))
    assert not is_irreducible(lonely, [0])  # loop-free single vertex


# -- counting and entropy -----------------------------------------------------------


def test_count_words_beta2_powers_of_two(two_sys):
    aut = automaton_for(two_sys)
    for n in range(15):
        assert count_words(aut, n) == 2**n


def test_count_words_matches_enumeration(pisot_sys):
    aut = automaton_for(pisot_sys)
    for n in range(1, 9):
        assert count_words(aut, n) == sum(1 for w in enumerate_words(aut, n) if len(w) == n)


def test_count_words_empty_word(pisot_sys):
    assert count_words(automaton_for(pisot_sys), 0) == 1


def test_count_words_submultiplicative(pisot_sys):
    aut = automaton_for(pisot_sys)
    counts = [count_words(aut, n) for n in range(12)]
    for n in range(12):
        for m in range(12 - n):
            assert counts[n + m] <= counts[n] * counts[m]


def companion_root_oracle(coeffs, lo, hi, steps=80):
    """Largest real root of a cubic by plain bisection; independent of numpy."""
    def val(x):
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    for _ in range(steps):
        mid = (lo + hi) / 2
        if val(mid) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def test_tail_component_spectral_radius_is_beta(pisot_sys):
    chain = decompose(automaton_for(pisot_sys))
    h = entropy_estimate(chain.automaton, chain.components[2])
    # oracle: the largest root of x^3 - x - 1 by bisection (low degree first)
    root = companion_root_oracle([-1.0, -1.0, 0.0, 1.0], 1.0, 2.0)
    assert abs(math.exp(h) - root) < 1e-9
    assert abs(h - pisot_sys.log_beta()) < 1e-9


def test_full_chain_entropy(pisot_sys, two_sys, three_sys):
    for sys in (pisot_sys, two_sys, three_sys):
        assert abs(entropy_estimate(automaton_for(sys)) - sys.log_beta()) < 1e-9


def test_spectral_radius_crosscheck():
    import numpy as np

    mat = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    rho = spectral_radius(mat)
    assert abs(rho**3 - rho - 1) < 1e-9


# -- language cross-validation ----------------------------------------------------------


@pytest.mark.parametrize("fixture", ["pisot_sys", "two_sys", "three_sys"])
def test_cross_validate_to_length_ten(fixture, request):
    sys = request.getfixturevalue(fixture)
    ok, counterexample = cross_validate(automaton_for(sys), sys, 10)
    assert ok, f"language mismatch at {counterexample}"


def test_out_degree_bounds(pisot_sys, two_sys, three_sys):
    for sys in (pisot_sys, two_sys, three_sys):
        aut = automaton_for(sys)
        for v in range(aut.state_count):
            out = aut.graph.out_edges(v)
            assert 1 <= len(out) <= sys.b + 1


def test_golden_ratio_system_end_to_end():
    golden = MinusBetaSystem(make_algebraic(IntPolynomial((-1, -1, 1)), 1, 2))
    seq = golden.expansion_of_one()
    assert (seq.preperiod, seq.period) == ((1,), (0,))
    aut = automaton_for(golden)
    assert aut.state_count == 3
    chain = decompose(aut)
    assert chain.q == 2
    assert abs(entropy_estimate(aut) - golden.log_beta()) < 1e-9
    ok, _ = cross_validate(aut, golden, 10)
    assert ok


def test_dot_and_json_exports(pisot_sys):
    chain = chain_for(pisot_sys)
    dot = chain.automaton.graph.to_dot(chain.components, alphabet_bound=1)
    assert dot.count("cluster_") == 3
    assert all(f"V{v};" in dot or f"V{v} ->" in dot for v in range(5))
    payload = chain.automaton.graph.to_json_dict()
    assert payload["vertices"] == 5
    assert sorted(payload["edges"]) == payload["edges"]
