"""Command-line entry point: ``gen``, ``run``, ``verify`` and ``bench``.

Exit codes: 0 success, 1 verification failure, 2 parameter regime
violation, 3 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from typing import Sequence

from . import generators
from .algo3 import run_algorithm3
from .clustering.algo2 import run_algorithm2
from .clustering.clusters import Budgets, RegimeError
from .graph import GraphError, ProblemParams, WeightedGraph, graph_to_text, read_graph
from .outcome import Outcome, outcome_to_json
from .separator import run_algorithm1
from .verify import verify_outcome

EXIT_OK, EXIT_FAIL, EXIT_REGIME, EXIT_PARSE = 0, 1, 2, 3
ENV_PREFIX = "SHALLOWSEP_BUDGET_"
FAMILY_ALIASES = {"random-gnm": "gnm", "bounded-degree-expander": "expander",
                  "clique-planted": "planted"}
BENCH_COLUMNS = ["family", "n", "m", "ell", "h", "algo", "outcome", "sep_size",
                 "n_over_ell", "h2_ell_log2n", "wall_ms", "oracle_deletions"]


def parse_budgets(pairs: Sequence[str] = (), environ: dict | None = None) -> Budgets:
    """Defaults, then ``SHALLOWSEP_BUDGET_<KEY>`` variables, then ``KEY=VAL`` flags."""
    env = os.environ if environ is None else environ
    values: dict[str, float] = {}
    for key, val in env.items():
        if key.startswith(ENV_PREFIX):
            values[key[len(ENV_PREFIX):].lower()] = float(val)
    for item in pairs:
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"budget override must be KEY=VAL, got {item!r}")
        values[key.strip().lower()] = float(val)
    return Budgets().update(values)


def run_algorithm(algo: int, g: WeightedGraph, p: ProblemParams, *, seed: int = 0,
                  budgets: Budgets | None = None, debug: bool = False) -> Outcome:
    budgets = budgets or Budgets()
    if algo == 1:
        return run_algorithm1(g, p, seed=seed, debug=debug)
    if algo == 2:
        return run_algorithm2(g, p, seed=seed, budgets=budgets, debug=debug)
    if algo == 3:
        return run_algorithm3(g, p, seed=seed, budgets=budgets, debug=debug)
    raise ValueError(f"unknown algorithm {algo}")


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(path: str, fmt: str | None) -> WeightedGraph:
    return read_graph(path, fmt)


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args: argparse.Namespace) -> int:
    family = FAMILY_ALIASES.get(args.family, args.family)
    g = generators.generate(family, *args.args)
    _write(graph_to_text(g, args.format), args.output)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    try:
        budgets = parse_budgets(args.budgets or [])
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    try:
        g = _load(args.input, args.format)
    except (OSError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        p = ProblemParams(args.h, args.ell, args.epsilon)
        out = run_algorithm(args.algo, g, p, seed=args.seed, budgets=budgets, debug=args.debug)
    except (RegimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    doc = outcome_to_json(out)
    if not args.timing:
        doc["stats"].pop("wall_ms", None)
    code = EXIT_OK
    if args.verify:
        rep = verify_outcome(g, doc, args.h)
        doc["verification"] = rep.to_json()
        code = EXIT_OK if rep.ok else EXIT_FAIL
    _write(json.dumps(doc, sort_keys=True, indent=1) + "\n", args.output)
    return code


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        g = _load(args.input, args.format)
        with open(args.outcome, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, GraphError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rep = verify_outcome(g, doc, args.h, args.radius_bound)
    sys.stdout.write(json.dumps(rep.to_json(), sort_keys=True) + "\n")
    return EXIT_OK if rep.ok else EXIT_FAIL


def _bench_graph(family: str, size: int, h: int, seed: int) -> WeightedGraph:
    if family == "grid":
        return generators.grid(size, size)
    if family in ("path", "cycle", "complete"):
        return generators.generate(family, size)
    if family == "gnm":
        return generators.gnm(size, 2 * size, seed)
    if family == "expander":
        return generators.expander(size, 4, seed)
    if family == "planted":
        return generators.planted(size, 2 * size, h, seed)
    if family == "blowup":
        return generators.blowup(h, size)
    raise ValueError(f"unknown family {family!r}")


def bench_rows(families: Sequence[str], sizes: Sequence[int], ells: Sequence[int],
               algos: Sequence[int], h: int, epsilon: float, seed: int,
               budgets: Budgets | None = None) -> list[dict]:
    rows = []
    for family in families:
        family = FAMILY_ALIASES.get(family, family)
        for size in sizes:
            g = _bench_graph(family, size, h, seed)
            logn = math.log2(max(g.n, 2))
            for ell in ells:
                for algo in algos:
                    row = {"family": family, "n": g.n, "m": g.m, "ell": ell, "h": h,
                           "algo": algo, "n_over_ell": round(g.n / ell, 3),
                           "h2_ell_log2n": round(h * h * ell * logn, 3)}
                    t0 = time.perf_counter()
                    try:
                        out = run_algorithm(algo, g, ProblemParams(h, ell, epsilon),
                                            seed=seed, budgets=budgets)
                    except RegimeError:
                        row.update(outcome="regime", sep_size="", oracle_deletions="")
                    else:
                        row.update(outcome=out.kind,
                                   sep_size=len(out.vertices) if out.kind == "separator" else "",
                                   oracle_deletions=out.stats.oracle_deletions)
                    row["wall_ms"] = round((time.perf_counter() - t0) * 1000.0, 1)
                    rows.append(row)
    return rows


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        budgets = parse_budgets(args.budgets or [])
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    rows = bench_rows(args.family or [], args.sizes or [], args.ells or [], args.algos,
                      args.h, args.epsilon, args.seed, budgets)
    fh = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shallowsep",
                                 description="Balanced separators or shallow clique minors.")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a graph file")
    gen.add_argument("family", choices=sorted(set(generators.FAMILIES) | set(FAMILY_ALIASES)))
    gen.add_argument("args", type=int, nargs="*", help="family parameters")
    gen.add_argument("-o", "--output")
    gen.add_argument("--format", choices=["edge-list", "dimacs"], default="edge-list")
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="run a separator algorithm")
    run.add_argument("--algo", type=int, choices=[1, 2, 3], default=1)
    run.add_argument("--h", type=int, required=True)
    run.add_argument("--ell", type=int, required=True)
    run.add_argument("--epsilon", type=float, default=1.0)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--input", required=True)
    run.add_argument("--format", choices=["edge-list", "dimacs"])
    run.add_argument("--output")
    run.add_argument("--verify", action="store_true")
    run.add_argument("--debug", action="store_true", help="assert loop invariants")
    run.add_argument("--timing", action="store_true", help="keep wall time in the output")
    run.add_argument("--budgets", nargs="*", metavar="KEY=VAL")
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="check an outcome file against a graph")
    ver.add_argument("--input", required=True)
    ver.add_argument("--outcome", required=True)
    ver.add_argument("--h", type=int, required=True)
    ver.add_argument("--radius-bound", type=float)
    ver.add_argument("--format", choices=["edge-list", "dimacs"])
    ver.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="sweep instances and write CSV")
    bench.add_argument("--family", nargs="*")
    bench.add_argument("--sizes", type=int, nargs="*")
    bench.add_argument("--ells", type=int, nargs="*")
    bench.add_argument("--algos", type=int, nargs="*", default=[1])
    bench.add_argument("--h", type=int, default=5)
    bench.add_argument("--epsilon", type=float, default=1.0)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--budgets", nargs="*", metavar="KEY=VAL")
    bench.add_argument("--output")
    bench.set_defaults(func=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
