"""Command-line front end.

Exit codes: 0 success, 2 usage error (bad flags, bad parameters, unreadable
input), 3 infeasible instance generation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .exact import hopcroft_karp, konig_cover, verify_vertex_cover
from .graph import Graph, GraphFormatError, load_graph, save_edge_list
from .harness import (build_config, default_d, fit_slope, run_bench, run_distinguish, run_estimator,
                      write_bench_csv, write_text)
from .instances import GenerationError, gen_gnm, gen_lower_bound, gen_random_bipartite, load_instance

EXIT_USAGE = 2
EXIT_GENERATION = 3


class UsageError(Exception):
    pass


def _emit(text: str, out) -> None:
    if out:
        write_text(out, text)
    else:
        print(text)


def _read_params(path) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read params file: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("params file must hold a JSON object")
    return data


def _load(path) -> Graph:
    p = Path(path)
    if p.suffix == ".json":
        return load_instance(p).graph
    return load_graph(p)


# -- subcommands ----------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.kind == "lowerbound":
        d = args.d if args.d is not None else default_d(args.N)
        inst = gen_lower_bound(args.N, args.eps, d, args.truth, args.variant, args.seed)
        if not args.out:
            raise UsageError("gen lowerbound needs --out PREFIX")
        paths = inst.save(args.out)
        print(json.dumps({"files": [str(p) for p in paths], "n": inst.graph.n, "m": inst.graph.m}))
        return 0
    if args.kind == "gnm":
        g = gen_gnm(args.n, args.m, args.seed)
    else:
        g = gen_random_bipartite(args.n_left, args.n_right, args.p, args.seed)
    if not args.out:
        raise UsageError(f"gen {args.kind} needs --out PATH")
    save_edge_list(g, args.out)
    print(json.dumps({"files": [args.out], "n": g.n, "m": g.m}))
    return 0


def cmd_exact(args) -> int:
    g = _load(args.graph)
    matching = hopcroft_karp(g)
    out = {"n": g.n, "m": g.m, "mu": matching.size}
    side = g.two_coloring()
    if side is not None:
        cover = konig_cover(g, matching, side)
        if not verify_vertex_cover(g, cover):
            raise RuntimeError("Konig cover failed verification")
        out["cover_size"] = int(cover.sum())
    _emit(json.dumps(out, sort_keys=True), args.out)
    return 0


def cmd_estimate(args) -> int:
    g = _load(args.graph)
    params = _read_params(args.params_file)
    if args.algorithm == "beyond" and g.bipartition is None and g.two_coloring() is None:
        raise UsageError("bipartition required")
    build_config(args.algorithm, g.n, args.seed, params, args.mode)  # validate before running
    rep = run_estimator(g, args.algorithm, args.model, args.seed, params, args.mode)
    _emit(rep.dumps(), args.out)
    return 0


def cmd_bench(args) -> int:
    params = _read_params(args.params_file)
    build_config(args.algorithm, max(args.sizes), args.seed, params)
    rows = run_bench(args.sizes, args.trials, args.algorithm, args.model, args.seed, params,
                     args.density, args.workers)
    if args.out:
        write_bench_csv(rows, args.out)
    else:
        write_bench_csv(rows, "/dev/stdout")
    summary = {"rows": len(rows)}
    if len(set(args.sizes)) >= 2:
        summary["slope"] = fit_slope(rows)
    print(json.dumps(summary), file=sys.stderr)
    return 0


def cmd_distinguish(args) -> int:
    d = args.d if args.d is not None else default_d(args.N)
    res = run_distinguish(args.variant, args.N, args.eps, d, args.trials, args.walk_len, args.walks,
                          args.seed, args.workers)
    if not args.per_trial:
        res.pop("per_trial")
    _emit(json.dumps(res, sort_keys=True), args.out)
    return 0


# -- parser ---------------------------------------------------------------------


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sublinear-matching",
                                 description="Sublinear matching-size estimation with query-counted oracles.")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output path (stdout when omitted)")

    gen = sub.add_parser("gen", help="generate an instance")
    gsub = gen.add_subparsers(dest="kind", required=True)
    lb = gsub.add_parser("lowerbound", parents=[common], help="two-sided lower-bound instance")
    lb.add_argument("--N", type=_positive, required=True)
    lb.add_argument("--eps", type=float, default=0.2)
    lb.add_argument("--d", type=_positive, default=None, help="default round(N ** 0.2)")
    lb.add_argument("--truth", choices=("YES", "NO"), default="YES")
    lb.add_argument("--variant", choices=("fixed", "broken"), default="fixed")
    gg = gsub.add_parser("gnm", parents=[common], help="uniform graph with exactly m edges")
    gg.add_argument("--n", type=int, required=True)
    gg.add_argument("--m", type=int, required=True)
    gb = gsub.add_parser("bipartite", parents=[common], help="bipartite Erdos-Renyi graph")
    gb.add_argument("--n-left", type=int, required=True)
    gb.add_argument("--n-right", type=int, required=True)
    gb.add_argument("--p", type=float, required=True)

    ex = sub.add_parser("exact", parents=[common], help="exact maximum matching (and Konig cover)")
    ex.add_argument("graph")

    est = sub.add_parser("estimate", parents=[common], help="run an estimator")
    est.add_argument("graph")
    est.add_argument("--algorithm", choices=("two-thirds", "beyond"), default="two-thirds")
    est.add_argument("--model", choices=("list", "matrix"), default="matrix")
    est.add_argument("--mode", choices=("additive", "multiplicative"), default="additive")
    est.add_argument("--params-file")

    be = sub.add_parser("bench", parents=[common], help="query scaling on G(n, density * n)")
    be.add_argument("--sizes", type=_positive, nargs="+", required=True)
    be.add_argument("--trials", type=_positive, default=1)
    be.add_argument("--density", type=_positive, default=10)
    be.add_argument("--algorithm", choices=("two-thirds", "beyond"), default="two-thirds")
    be.add_argument("--model", choices=("list", "matrix"), default="matrix")
    be.add_argument("--params-file")
    be.add_argument("--workers", type=_positive, default=1)

    di = sub.add_parser("distinguish", parents=[common], help="random-walk attack accuracy")
    di.add_argument("--variant", choices=("fixed", "broken"), required=True)
    di.add_argument("--N", type=_positive, required=True)
    di.add_argument("--eps", type=float, default=0.2)
    di.add_argument("--d", type=_positive, default=None)
    di.add_argument("--walk-len", type=_positive, default=None, help="default 2d")
    di.add_argument("--walks", type=_positive, default=32, help="walks per trial")
    di.add_argument("--trials", type=int, required=True)
    di.add_argument("--workers", type=_positive, default=1)
    di.add_argument("--per-trial", action="store_true", help="include per-trial rows")
    return ap


COMMANDS = {"gen": cmd_gen, "exact": cmd_exact, "estimate": cmd_estimate, "bench": cmd_bench,
            "distinguish": cmd_distinguish}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (UsageError, ValueError, GraphFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
