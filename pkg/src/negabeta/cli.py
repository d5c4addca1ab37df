"""Batch command-line surface.

One subcommand per analysis; outputs are machine-readable (JSON with sorted
keys, RFC-4180 CSV, or DOT) and byte-identical for identical configuration
and seed.  All randomness flows from an explicit ``--seed``; stochastic
commands refuse to run without one.  Exit codes: 0 success, 1 property
violation found, 2 usage error, 3 step/exactness budget exhausted, 4 output
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from negabeta import algebraic, intervalmaps, ldp, measures, shiftgraph, specprop
from negabeta.algebraic import parse_beta_spec
from negabeta.transform import InexactMode, MinusBetaSystem, NotEventuallyPeriodic, word_to_text


class UsageError(Exception):
    """Bad command line; maps to exit code 2."""


@dataclass
class RunConfig:
    """Validated invocation: command, beta, parameters, seed, output routing."""

    command: str
    beta_text: Optional[str]
    seed: Optional[int]
    fmt: str
    out: Optional[str]
    digits: int
    params: dict = field(default_factory=dict)


_STOCHASTIC = {"mc", "example32", "validate"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="negabeta",
        description="negative-beta transformation toolkit (batch, machine-readable output)",
    )
    sub = parser.add_subparsers(dest="command")

    def common(p, beta=True):
        if beta:
            p.add_argument("--beta", required=True,
                           help="poly:<c0,...,ck>;interval:<lo>,<hi> or decimal:<d>;precision:<n>")
        p.add_argument("--format", dest="fmt", default="json", choices=["json", "csv", "dot"])
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--digits", type=int, default=15, help="decimal digits in reports")

    p = sub.add_parser("yrrap", help="digit expansion of 1 and the case tag")
    common(p)
    p.add_argument("--max-steps", type=int, default=4096)

    p = sub.add_parser("graph", help="folded automaton of the expansion")
    common(p)
    p.add_argument("--horizon", type=int, default=None)

    p = sub.add_parser("components", help="ordered irreducible component chain")
    common(p)

    p = sub.add_parser("spec", help="gluing certificate for the component chain")
    common(p)
    p.add_argument("--oracle-maxlen", type=int, default=0,
                   help="when > 0, refine exact_min_M by brute force to this word length")

    p = sub.add_parser("cyl", help="exact cylinder table")
    common(p)
    p.add_argument("--maxlen", type=int, required=True)

    p = sub.add_parser("gbeta", help="branching distances g(1..n)")
    common(p)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("entropy", help="component and total entropies")
    common(p)

    p = sub.add_parser("rate", help="level-1 rate function values")
    common(p)
    p.add_argument("--obs", default="digit1", help="digit | digit<k> (indicator)")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--a-grid", default=None, help="lo:hi:count sweep of target means")

    p = sub.add_parser("mc", help="Monte Carlo deviation estimate")
    common(p)
    p.add_argument("--obs", default="digit1")
    p.add_argument("--window", required=True, help="lo:hi window of observable means")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", dest="samples", type=int, required=True)

    p = sub.add_parser("compare-rates", help="Lebesgue vs maximal-entropy rate functions")
    common(p)

    p = sub.add_parser("example31", help="five-branch slope-3 system report")
    common(p, beta=False)
    p.add_argument("--maxlen", type=int, default=8)

    p = sub.add_parser("example32", help="circle-map occupation deviations")
    common(p, beta=False)
    p.add_argument("--a-window", default="0.3:1.0")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--N", dest="samples", type=int, default=100000)
    p.add_argument("--eps", type=float, default=0.05)

    p = sub.add_parser("validate", help="cross-validation and invariant suites")
    common(p)
    p.add_argument("--maxlen", type=int, default=8)

    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Parse and validate an argument vector into a RunConfig."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(list(argv))
    except SystemExit as exc:
        if exc.code == 0:  # --help
            raise
        # argparse exits on its own; normalize to the usage error contract
        raise UsageError("invalid arguments") from exc
    if not ns.command:
        raise UsageError("a subcommand is required")
    if ns.command in _STOCHASTIC and ns.seed is None:
        raise UsageError(f"--seed is mandatory for '{ns.command}'")
    params = {
        k: v
        for k, v in vars(ns).items()
        if k not in {"command", "beta", "fmt", "out", "seed", "digits"}
    }
    return RunConfig(
        command=ns.command,
        beta_text=getattr(ns, "beta", None),
        seed=ns.seed,
        fmt=ns.fmt,
        out=ns.out,
        digits=ns.digits,
        params=params,
    )


# -- observable grammar ---------------------------------------------------------------


def parse_observable(text: str, alphabet_bound: int):
    if text == "digit":
        return {d: float(d) for d in range(alphabet_bound + 1)}
    if text.startswith("digit"):
        try:
            k = int(text[len("digit"):])
        except ValueError as exc:
            raise UsageError(f"unknown observable {text!r}") from exc
        return {d: 1.0 if d == k else 0.0 for d in range(alphabet_bound + 1)}
    raise UsageError(f"unknown observable {text!r}")


def _parse_window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"window must be lo:hi, got {text!r}") from exc
    if lo > hi:
        raise UsageError("window lower end exceeds upper end")
    return lo, hi


def _system_for(config: RunConfig) -> MinusBetaSystem:
    try:
        beta = parse_beta_spec(config.beta_text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return MinusBetaSystem(beta)


# -- command bodies --------------------------------------------------------------------


def _cmd_yrrap(config: RunConfig):
    system = _system_for(config)
    seq = system.expansion_of_one(max_steps=config.params["max_steps"])
    beta_text = (
        algebraic.to_decimal(system.beta.generator(), config.digits)
        if system.exact
        else str(float(system.beta_element))
    )
    return {
        "preperiod": word_to_text(seq.preperiod, system.b),
        "period": word_to_text(seq.period, system.b),
        "case": system.case.value,
        "b": system.b,
        "u": seq.u,
        "v": seq.v,
        "beta": beta_text,
    }


def _cmd_graph(config: RunConfig):
    system = _system_for(config)
    aut = shiftgraph.automaton_for(system, horizon=config.params.get("horizon"))
    payload = aut.graph.to_json_dict()
    payload["fold"] = {"start": aut.fold_start, "period": aut.fold_period}
    if config.fmt == "dot":
        return aut.graph.to_dot(alphabet_bound=system.b)
    return payload


def _cmd_components(config: RunConfig):
    system = _system_for(config)
    chain = shiftgraph.chain_for(system)
    if config.fmt == "dot":
        return chain.automaton.graph.to_dot(chain.components, alphabet_bound=system.b)
    payload = chain.automaton.graph.to_json_dict()
    payload.update(chain.to_json_dict())
    return payload


def _cmd_spec(config: RunConfig):
    system = _system_for(config)
    chain = shiftgraph.chain_for(system)
    pres = specprop.SoficPresentation.from_chain(chain)
    maxlen = config.params["oracle_maxlen"]
    cert = specprop.spec_bound(pres, with_oracle=maxlen > 0, oracle_maxlen=maxlen or 4)
    return cert.to_json_dict(system.b)


def _cylinder_rows(system: MinusBetaSystem, maxlen: int, digits: int) -> list[dict]:
    rows = []
    for word in system.enumerate_admissible(maxlen):
        report = measures.cylinder_measure(system, word)
        interval = measures.cylinder_interval(system, word)
        rows.append(
            {
                "word": word_to_text(word, system.b),
                "lo": _coeff_text(interval.lo),
                "hi": _coeff_text(interval.hi),
                "lo_decimal": algebraic.to_decimal(interval.lo, digits),
                "hi_decimal": algebraic.to_decimal(interval.hi, digits),
                "length": algebraic.to_decimal(report.length, digits),
                "upper_bound_ok": report.upper_bound_ok,
                "lower_bound_applicable": report.lower_bound_applicable,
                "lower_bound_ok": report.lower_bound_ok,
            }
        )
    return rows


def _coeff_text(element) -> str:
    return "[" + ",".join(str(c) for c in element.coeffs) + "]"


def _cmd_cyl(config: RunConfig):
    system = _system_for(config)
    if not system.exact:
        raise InexactMode("cylinder tables need an exact algebraic beta")
    system.expansion_of_one()
    rows = _cylinder_rows(system, config.params["maxlen"], config.digits)
    return {"rows": rows}


def _cmd_gbeta(config: RunConfig):
    system = _system_for(config)
    system.expansion_of_one()
    n = config.params["n"]
    values = [measures.g_beta_n(system, k) for k in range(1, n + 1)]
    return {"n": n, "g": values, "max": max(values)}


def _cmd_entropy(config: RunConfig):
    system = _system_for(config)
    chain = shiftgraph.chain_for(system)
    comps = []
    for i in range(chain.q):
        h = shiftgraph.entropy_estimate(chain.automaton, chain.components[i])
        comps.append({"component": i + 1, "entropy": h if h != float("-inf") else None})
    total = shiftgraph.entropy_estimate(chain.automaton)
    return {
        "components": comps,
        "topological_entropy": total,
        "log_beta": system.log_beta(),
    }


def _cmd_rate(config: RunConfig):
    system = _system_for(config)
    chain = shiftgraph.chain_for(system)
    psi = parse_observable(config.params["obs"], system.b)
    phi_const = system.log_beta()
    targets = []
    if config.params.get("a") is not None:
        targets.append(config.params["a"])
    if config.params.get("a_grid"):
        try:
            lo, hi, count = config.params["a_grid"].split(":")
            lo, hi, count = float(lo), float(hi), int(count)
        except ValueError as exc:
            raise UsageError("a-grid must be lo:hi:count") from exc
        targets.extend(lo + (hi - lo) * k / max(count - 1, 1) for k in range(count))
    if not targets:
        raise UsageError("give --a or --a-grid")
    rows = [ldp.level1_rate(chain, psi, a, phi_const).to_json_dict() for a in targets]
    return {"rows": rows, "phi_const": phi_const, "note": "level-1 values are derived consequences"}


def _cmd_mc(config: RunConfig):
    system = _system_for(config)
    psi = parse_observable(config.params["obs"], system.b)
    window = _parse_window(config.params["window"])
    estimate = ldp.mc_deviation(
        system, psi, window, config.params["n"], config.params["samples"], config.seed
    )
    return estimate.to_json_dict()


def _cmd_compare_rates(config: RunConfig):
    system = _system_for(config)
    rows = ldp.compare_rate_functions(system)
    return {"rows": [_jsonable(r.to_json_dict()) for r in rows]}


def _cmd_example31(config: RunConfig):
    maxlen = config.params["maxlen"]
    _, pres = intervalmaps.example31_system()
    cert = specprop.spec_bound(pres, with_oracle=True, oracle_maxlen=min(maxlen, 6))
    reports = intervalmaps.example31_measure_bounds(maxlen)
    return {
        "certificate": cert.to_json_dict(4),
        "words_checked": len(reports),
        "bounds_ok": all(r.lower_ok and r.upper_ok for r in reports),
        "maxlen": maxlen,
    }


def _cmd_example32(config: RunConfig):
    window = _parse_window(config.params["a_window"])
    fmap = intervalmaps.CircleMap()
    clusters = intervalmaps.circle_nonwandering(fmap)
    estimate = intervalmaps.circle_mc_deviation(
        window, config.params["n"], config.params["samples"], config.seed,
        eps=config.params["eps"], fmap=fmap,
    )
    payload = estimate.to_json_dict()
    payload["nonwandering"] = clusters
    payload["predicted_rate"] = intervalmaps.predicted_occupation_rate(window[0], fmap)
    return payload


def _cmd_validate(config: RunConfig):
    system = _system_for(config)
    maxlen = config.params["maxlen"]
    checks = []

    def record(name: str, ok: bool, detail: str = ""):
        checks.append({"name": name, "ok": bool(ok), "detail": detail})

    system.expansion_of_one()
    aut = shiftgraph.automaton_for(system)
    chain = shiftgraph.decompose(aut)
    ok, counterexample = shiftgraph.cross_validate(aut, system, maxlen)
    record("language_cross_validation", ok,
           "" if ok else f"counterexample {word_to_text(counterexample, system.b)}")

    sweep = measures.cylinder_sweep(system, maxlen)
    record("cylinder_upper_bounds", all(r.upper_bound_ok for r in sweep))
    corrected = (system.beta.one() - system.b / system.beta_element) / system.beta_element
    lower_ok = all(
        r.length * system.beta_element ** len(r.word) >= corrected
        for r in sweep
        if r.lower_bound_applicable
    )
    record("cylinder_lower_bounds_corrected", lower_ok)
    record(
        "partition_identity",
        all(measures.partition_identity_holds(system, n) for n in range(1, min(maxlen, 8) + 1)),
    )

    pres = specprop.SoficPresentation.from_chain(chain)
    cert = specprop.spec_bound(pres)
    record("omega_coverage", specprop.omega_coverage_check(pres))
    record("ergodic_support", specprop.ergodic_support_check(pres, 40, seed=config.seed))
    record("gluing_certificate", specprop.gluing_test(pres, cert, 3, 100, seed=config.seed + 1))

    out_deg_ok = all(
        1 <= len(aut.graph.out_edges(v)) <= system.b + 1 for v in range(aut.state_count)
    )
    record("out_degree_bounds", out_deg_ok)

    counts = [shiftgraph.count_words(aut, n) for n in range(0, min(maxlen, 8) + 1)]
    submult = all(
        counts[n + m] <= counts[n] * counts[m]
        for n in range(len(counts))
        for m in range(len(counts) - n)
    )
    record("count_submultiplicativity", submult)

    all_ok = all(c["ok"] for c in checks)
    return {"ok": all_ok, "checks": checks}


_COMMANDS = {
    "yrrap": _cmd_yrrap,
    "graph": _cmd_graph,
    "components": _cmd_components,
    "spec": _cmd_spec,
    "cyl": _cmd_cyl,
    "gbeta": _cmd_gbeta,
    "entropy": _cmd_entropy,
    "rate": _cmd_rate,
    "mc": _cmd_mc,
    "compare-rates": _cmd_compare_rates,
    "example31": _cmd_example31,
    "example32": _cmd_example32,
    "validate": _cmd_validate,
}


# -- report emission ----------------------------------------------------------------------


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        if value == float("-inf"):
            return "-inf"
        if value == float("inf"):
            return "inf"
        return value
    if hasattr(value, "item"):  # numpy scalars
        return value.item()
    return value


def emit_report(result, fmt: str, out: Optional[str]) -> str:
    """Serialize a command result with stable field ordering."""
    if fmt == "dot":
        text = result if isinstance(result, str) else str(result)
    elif fmt == "csv":
        rows = result.get("rows") if isinstance(result, dict) else None
        if rows is None:
            raise UsageError("csv format applies to row-shaped results (cyl, rate, compare-rates)")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()) if rows else [],
                                lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(_jsonable(row))
        text = buf.getvalue()
    else:
        text = json.dumps(_jsonable(result), sort_keys=True, indent=2) + "\n"
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        except OSError as exc:
            raise IOError(str(exc)) from exc
    return text


def run(config: RunConfig) -> int:
    """Execute a validated configuration; returns the process exit code."""
    body = _COMMANDS.get(config.command)
    if body is None:
        raise UsageError(f"unknown command {config.command!r}")
    result = body(config)
    text = emit_report(result, config.fmt, config.out)
    if not config.out:
        sys.stdout.write(text)
    if isinstance(result, dict) and result.get("ok") is False:
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = parse_config(argv)
        return run(config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (InexactMode, NotEventuallyPeriodic) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    except ldp.WindowNeverHit as exc:
        # emit the rate lower bound that a zero-hit run still certifies
        sys.stdout.write(emit_report(exc.estimate.to_json_dict(), "json", None))
        print(f"window never hit: {exc}", file=sys.stderr)
        return 3
    except IOError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
