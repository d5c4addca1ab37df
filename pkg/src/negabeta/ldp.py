"""Rate functions and Monte Carlo deviation estimates.

The pressure of a label observable is the best weighted spectral radius over
the component chain; one-dimensional convex duality turns it into level-1
rate functions, which Monte Carlo estimates of digit-frequency deviations
are checked against.  Orbit sampling runs in fixed-point integer arithmetic
with enough guard bits that the expanding dynamics cannot corrupt the digits
being counted.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from negabeta.measures import MarkovMeasure, parry_measure, _psi_value
from negabeta.shiftgraph import ComponentChain, chain_for, spectral_radius
from negabeta.transform import MinusBetaSystem

Psi = Union[dict, Callable[[int], float]]

_Z95 = 1.959963984540054


class LdpError(Exception):
    """Base class for errors raised by this module."""


class UnachievableLevel(LdpError):
    """The requested mean lies outside the closed hull of achievable means."""


class WindowNeverHit(LdpError):
    """No sample fell in the target window; only a rate lower bound exists."""

    def __init__(self, estimate: "DeviationEstimate"):
        self.estimate = estimate
        super().__init__(
            f"0 of {estimate.sample_count} samples hit the window; "
            f"empirical rate exceeds {estimate.rate_lower_bound:.6f}"
        )


class WrongBeta(LdpError):
    """The operation is specific to a different base."""


@dataclass(frozen=True)
class RateQuery:
    """A level-1 rate request: observable, target window, reference constant."""

    observable: Psi
    window: tuple[float, float]
    phi_const: float


@dataclass(frozen=True)
class RateResult:
    """Level-1 rate at one target mean."""

    a: float
    rate: float
    entropy: float
    t_star: float
    component: int

    def to_json_dict(self) -> dict:
        return {
            "a": self.a,
            "rate": self.rate,
            "H": self.entropy,
            "t_star": self.t_star,
            "component": self.component + 1,
        }


@dataclass(frozen=True)
class DeviationEstimate:
    """Monte Carlo tail estimate with a binomial confidence interval."""

    n: int
    sample_count: int
    hits: int
    rate: Optional[float]
    ci_lo: float
    ci_hi: float
    seed: int

    @property
    def rate_lower_bound(self) -> float:
        # with zero hits only the Wilson upper probability bound is informative
        return self.ci_lo

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.sample_count,
            "hits": self.hits,
            "rate": self.rate,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "seed": self.seed,
        }


# -- free energy --------------------------------------------------------------------


def free_energy(mu: Union[MarkovMeasure, float], phi_const: float,
                invariant: bool = True, entropy: Optional[float] = None) -> float:
    """Entropy minus the constant reference, or -inf off the invariant set.

    Accepts a Markov measure (stationary, hence invariant) or an explicit
    entropy value for point masses on periodic orbits; anything declared
    non-invariant maps to -inf.
    """
    if not invariant:
        return float("-inf")
    if isinstance(mu, MarkovMeasure):
        h = mu.entropy()
    else:
        h = float(entropy if entropy is not None else mu)
    return h - phi_const


# -- pressure over the component chain --------------------------------------------------


def _component_pressure(chain: ComponentChain, comp_index: int, psi: Psi, t: float) -> float:
    graph = chain.component_graph(comp_index)
    n = graph.vertex_count
    weights = [t * _psi_value(psi, a) for _, a, _ in sorted(graph.edges)]
    if not weights:
        return float("-inf")
    shift = max(weights)
    mat = np.zeros((n, n))
    for (s, a, d) in sorted(graph.edges):
        mat[s, d] += math.exp(t * _psi_value(psi, a) - shift)
    rho = spectral_radius(mat)
    if rho <= 0:
        return float("-inf")
    return shift + math.log(rho)


def pressure(chain: ComponentChain, psi: Psi, t: float) -> tuple[float, int]:
    """Best weighted growth rate over the chain, with the achieving component.

    Invariant measures decompose over the ordered pieces, so the supremum
    over all of them is the maximum of the per-component weighted spectral
    radii; mixtures never beat the best piece.
    """
    best = float("-inf")
    arg = 0
    for i in range(chain.q):
        val = _component_pressure(chain, i, psi, t)
        if val > best:
            best, arg = val, i
    return best, arg


def pressure_value(chain: ComponentChain, psi: Psi, t: float) -> float:
    return pressure(chain, psi, t)[0]


# -- achievable means ----------------------------------------------------------------------


def _extreme_cycle_means(chain: ComponentChain, psi: Psi) -> tuple[float, float]:
    """Min and max mean of the observable over directed cycles of the chain."""
    lo = math.inf
    hi = -math.inf
    for i in range(chain.q):
        graph = chain.component_graph(i)
        n = graph.vertex_count
        for sign in (1, -1):
            # Karp's minimum mean cycle on the (possibly negated) labels
            dist = [[math.inf] * n for _ in range(n + 1)]
            for v in range(n):
                dist[0][v] = 0.0
            for k in range(1, n + 1):
                for s, a, t_ in graph.edges:
                    w = sign * _psi_value(psi, a)
                    if dist[k - 1][s] + w < dist[k][t_]:
                        dist[k][t_] = dist[k - 1][s] + w
            best = math.inf
            for v in range(n):
                if dist[n][v] == math.inf:
                    continue
                worst = -math.inf
                for k in range(n):
                    if dist[k][v] != math.inf:
                        worst = max(worst, (dist[n][v] - dist[k][v]) / (n - k))
                if worst != -math.inf:
                    best = min(best, worst)
            if best != math.inf:
                if sign == 1:
                    lo = min(lo, best)
                else:
                    hi = max(hi, -best)
    return lo, hi


def level1_rate(chain: ComponentChain, psi: Psi, a: float, phi_const: float,
                t_cap: float = 256.0, tol: float = 1e-12) -> RateResult:
    """Level-1 rate at mean a, by convex duality against the pressure.

    H(a) = inf_t (pressure(t) - t a) via golden-section search on the convex
    objective, with the bracket expanded until the derivative changes sign or
    the cap is reached (the cap handles means attained only in the limit).
    The rate is phi_const - H(a).
    """
    lo_mean, hi_mean = _extreme_cycle_means(chain, psi)
    if a < lo_mean - 1e-9 or a > hi_mean + 1e-9:
        raise UnachievableLevel(f"mean {a} outside [{lo_mean}, {hi_mean}]")

    def objective(t: float) -> float:
        return pressure_value(chain, psi, t) - t * a

    span = 1.0
    while span < t_cap:
        d_lo = objective(-span + 1e-6) - objective(-span)
        d_hi = objective(span) - objective(span - 1e-6)
        if d_lo < 0 and d_hi > 0:
            break
        span *= 2
    span = min(span, t_cap)
    lo, hi = -span, span
    phi = (math.sqrt(5) - 1) / 2
    x1 = hi - phi * (hi - lo)
    x2 = lo + phi * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = objective(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = objective(x2)
    t_star = (lo + hi) / 2
    entropy = objective(t_star)
    _, comp = pressure(chain, psi, t_star)
    rate = phi_const - entropy
    return RateResult(a, rate, entropy, t_star, comp)


# -- Monte Carlo -----------------------------------------------------------------------------


def _sample_fixed_point(seed: int, index: int) -> int:
    """Counter-based uniform sample on [0, 1) as a 128-bit fixed-point integer."""
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:16], "big")


_SAMPLE_BITS = 128


def _scale_sample(sample: int, precision: int) -> int:
    if precision >= _SAMPLE_BITS:
        return sample << (precision - _SAMPLE_BITS)
    return sample >> (_SAMPLE_BITS - precision)


def _beta_fixed_point(system: MinusBetaSystem, precision: int) -> int:
    beta_val = system.beta_element
    if system.exact:
        lo, hi = beta_val.approx(Fraction(1, 2 ** (precision + 8)))
        return round((lo + hi) / 2 * (1 << precision))
    return round(beta_val * (1 << precision))


def _orbit_digits(system: MinusBetaSystem, n: int, sample: int, precision: int,
                  beta_fixed: Optional[int] = None) -> tuple[int, ...]:
    """Digit string of one fixed-point orbit (used directly by the audit)."""
    if beta_fixed is None:
        beta_fixed = _beta_fixed_point(system, precision)
    b = system.b
    table = [(d + 1) << (2 * precision) for d in range(b + 1)]
    x = _scale_sample(sample, precision)
    digits = []
    for _ in range(n):
        t = beta_fixed * x
        d = t >> (2 * precision)
        d = b if d > b else (0 if d < 0 else d)
        digits.append(d)
        x = (table[d] - t) >> precision
    return tuple(digits)


def _digit_means_generic(system: MinusBetaSystem, psi: Psi, n: int,
                         indices: range, seed: int, precision: int) -> list[float]:
    """Exact-start fixed-point orbits; one mean of the observable per sample."""
    beta_fixed = _beta_fixed_point(system, precision)
    b = system.b
    table = [(d + 1) << (2 * precision) for d in range(b + 1)]
    psi_vals = [_psi_value(psi, d) for d in range(b + 1)]
    out = []
    for i in indices:
        x = _scale_sample(_sample_fixed_point(seed, i), precision)
        acc = 0.0
        for _ in range(n):
            t = beta_fixed * x
            d = t >> (2 * precision)
            if d > b:
                d = b
            elif d < 0:
                d = 0
            acc += psi_vals[d]
            x = (table[d] - t) >> precision
        out.append(acc / n)
    return out


def _digit_means_beta2(psi: Psi, n: int, indices: range, seed: int) -> list[float]:
    """Base-2 fast path: the exact fixed-point orbit digits of x are the
    alternately complemented leading bits of x, so digit means reduce to
    popcounts.  Bit-for-bit equal to the generic engine away from dyadic
    boundary points (a zero-probability set for hashed samples)."""
    psi0, psi1 = _psi_value(psi, 0), _psi_value(psi, 1)
    odd_mask = 0
    for k in range(n):
        if k % 2 == 1:
            odd_mask |= 1 << (n - 1 - k)
    out = []
    for i in indices:
        x = _sample_fixed_point(seed, i)
        top = x >> (_SAMPLE_BITS - n)
        ones = bin(top ^ odd_mask).count("1")
        out.append((ones * psi1 + (n - ones) * psi0) / n)
    return out


def _thread_count() -> int:
    env = os.environ.get("NEGABETA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def wilson_interval(hits: int, total: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total == 0:
        return 0.0, 1.0
    phat = hits / total
    denom = 1 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    lo = 0.0 if hits == 0 else max(0.0, center - half)
    hi = 1.0 if hits == total else min(1.0, center + half)
    return lo, hi


def mc_deviation(system: MinusBetaSystem, psi: Psi, window: tuple[float, float],
                 n: int, sample_count: int, seed: int,
                 audit_fraction: float = 0.01) -> DeviationEstimate:
    """Lebesgue probability that the n-step observable mean falls in the window.

    Samples are counter-based in the seed and the sample index, so results
    are byte-identical for a fixed (seed, N) regardless of chunking or worker
    count.  Orbits run at a fixed-point precision of n*log2(beta) + 64 bits;
    an audit re-runs a sample slice at doubled precision and insists on the
    same digits.  Raises :class:`WindowNeverHit` when nothing lands inside.
    """
    if n < 1 or sample_count < 1:
        raise ValueError("need n >= 1 and sample_count >= 1")
    lo, hi = window
    beta_float = system.beta_float()
    precision = int(math.ceil(n * math.log2(beta_float))) + 64
    is_base2 = (
        (not system.exact and system.beta.value == 2)
        or (system.exact and system.beta.degree == 1
            and system.beta.generator().as_fraction() == 2)
    ) and n <= _SAMPLE_BITS

    workers = _thread_count()
    chunk = (sample_count + workers - 1) // workers
    ranges = [range(k, min(k + chunk, sample_count)) for k in range(0, sample_count, chunk)]

    def run(indices: range) -> list[float]:
        if is_base2:
            return _digit_means_beta2(psi, n, indices, seed)
        return _digit_means_generic(system, psi, n, indices, seed, precision)

    if len(ranges) == 1:
        parts = [run(ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, ranges))
    means: list[float] = [m for part in parts for m in part]

    if not is_base2 and audit_fraction > 0:
        step = max(1, int(1 / audit_fraction))
        for idx in range(0, sample_count, step):
            sample = _sample_fixed_point(seed, idx)
            base = _orbit_digits(system, n, sample, precision)
            double = _orbit_digits(system, n, sample, 2 * precision)
            if base != double:
                raise ArithmeticError(
                    f"precision audit failed at sample {idx}: digit strings differ"
                )

    hits = sum(1 for m in means if lo <= m <= hi)
    p_lo, p_hi = wilson_interval(hits, sample_count)
    if hits == 0:
        estimate = DeviationEstimate(n, sample_count, 0, None,
                                     -math.log(max(p_hi, 1e-300)) / n, float("inf"), seed)
        raise WindowNeverHit(estimate)
    rate = -math.log(hits / sample_count) / n
    ci_lo = -math.log(p_hi) / n
    ci_hi = -math.log(p_lo) / n if p_lo > 0 else float("inf")
    return DeviationEstimate(n, sample_count, hits, rate, ci_lo, ci_hi, seed)


# -- the two rate functions of the cubic Pisot base -------------------------------------------


_PISOT_MINPOLY = (-1, -1, 0, 1)


@dataclass(frozen=True)
class RateComparisonRow:
    """One invariant measure evaluated under both rate functions."""

    description: str
    entropy: float
    carried_on_tail: bool
    lebesgue_rate: float
    max_entropy_rate: float

    def to_json_dict(self) -> dict:
        return {
            "measure": self.description,
            "h": self.entropy,
            "on_tail_component": self.carried_on_tail,
            "q_lebesgue": self.lebesgue_rate,
            "q_max_entropy": self.max_entropy_rate,
        }


def compare_rate_functions(system: MinusBetaSystem,
                           mixture_weights: Sequence[float] = (0.25, 0.5, 0.75),
                           ) -> list[RateComparisonRow]:
    """Lebesgue-reference rate versus maximal-entropy-reference rate.

    Evaluates both rate functions on a family of invariant measures: the two
    fixed-point masses, the maximal-entropy measure of the tail component,
    and mixtures.  The Lebesgue rate is h - log(beta) for every invariant
    measure, while the maximal-entropy rate collapses to -inf off the tail
    component, so the fixed-point mass at the smallest fixed point separates
    the two.  Only defined for the cubic base (root of x^3 - x - 1).
    """
    if not system.exact or system.beta.minpoly.coefficients != _PISOT_MINPOLY:
        raise WrongBeta("the comparison is specific to the cubic Pisot base")
    log_beta = system.log_beta()
    chain = chain_for(system)
    tail = parry_measure(chain.component_graph(chain.q - 1))
    h_tail = tail.entropy()

    def q_leb(h: float) -> float:
        return h - log_beta

    def q_max(h: float, on_tail: bool) -> float:
        return h - log_beta if on_tail else float("-inf")

    rows = [
        RateComparisonRow("point mass at smallest fixed point", 0.0, False,
                          q_leb(0.0), q_max(0.0, False)),
        RateComparisonRow("point mass at largest fixed point", 0.0, True,
                          q_leb(0.0), q_max(0.0, True)),
        RateComparisonRow("maximal entropy on tail component", h_tail, True,
                          q_leb(h_tail), q_max(h_tail, True)),
    ]
    for a in mixture_weights:
        # entropy is affine in the mixture weight; the mixture sees the
        # off-tail point mass, so the maximal-entropy rate is -inf
        h = (1 - a) * h_tail
        rows.append(
            RateComparisonRow(
                f"mixture {a:.2f}*fixed-point + {1 - a:.2f}*max-entropy",
                h, False, q_leb(h), q_max(h, False),
            )
        )
    return rows
