"""Command-line surface.

Subcommands: generate, count, estimate, diagnose, moments, simulate, sweep,
reproduce.  Exit codes: 0 success, 2 validation problem, 3 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import harness
from .census import DEFAULT_COPY_CAP, enumerate_copies, motif_count
from .errors import MotifHTError
from .estimator import (consistency_diagnostic, estimate, sample_vertices,
                        truncated_statistic_eps, truncated_statistic_m)
from .generators import EnsembleSpec
from .graphs import load_graph, save_edge_list_file, save_json_file
from .moments import exact_variance, moment_report
from .motifs import parse_motif


def _emit(obj: dict, out_path=None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_csv(summary_dict: dict, path: str) -> None:
    per = summary_dict.get("per_rep") or {}
    t = per.get("t") or []
    cols = {"rep": list(range(len(t))), "t": t}
    for key in ("ratio", "z", "sigma2_hat", "ci_cover"):
        if per.get(key) is not None:
            cols[key] = per[key]
    for mkey, vals in (per.get("t_trunc") or {}).items():
        cols[f"t_trunc_{mkey}"] = vals
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols.keys())
        for i in range(len(t)):
            writer.writerow([cols[k][i] for k in cols])


def _ensemble_from_args(args) -> EnsembleSpec:
    kind = args.ensemble
    params: dict = {}
    if kind == "erdos_renyi":
        params = {"n": args.n, "q": args.q}
    elif kind == "random_regular":
        params = {"n": args.n, "d": args.d}
    elif kind == "sbm":
        sizes = [int(s) for s in args.sizes.split(",")]
        probs = json.loads(args.probs)
        params = {"sizes": sizes, "probs": probs}
    elif kind == "graphon":
        params = {"n": args.n, "grid": json.loads(args.grid)}
    elif kind == "star":
        params = {"n": args.n}
    elif kind == "stars_plus_cliques":
        params = {"r": args.r, "a": args.a, "b": args.b}
    elif kind == "star_plus_matching":
        params = {"a": args.a, "b": args.b}
    return EnsembleSpec(kind=kind, params=params,
                        seed=args.seed if args.seed is not None else 0)


def _add_common(parser, top: bool) -> None:
    kw = {} if top else {"default": argparse.SUPPRESS}
    parser.add_argument("--seed", type=int,
                        help="master seed (default: 0, or the recipe's own seed)",
                        **({"default": None} if top else kw))
    parser.add_argument("--threads", type=int, **({"default": 1} if top else kw))
    parser.add_argument("--out", help="write JSON output here instead of stdout",
                        **({"default": None} if top else kw))
    parser.add_argument("--csv", help="write the per-replication table here",
                        **({"default": None} if top else kw))


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="motifht")
    _add_common(top, top=True)
    sub = top.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="draw a graph and write an edge list")
    g.add_argument("--ensemble", required=True,
                   choices=["erdos_renyi", "random_regular", "sbm", "graphon",
                            "star", "stars_plus_cliques", "star_plus_matching"])
    g.add_argument("--n", type=int)
    g.add_argument("--q", type=float)
    g.add_argument("--d", type=int)
    g.add_argument("--sizes", help="comma-separated block sizes")
    g.add_argument("--probs", help="JSON block probability matrix")
    g.add_argument("--grid", help="JSON graphon grid")
    g.add_argument("--r", type=int)
    g.add_argument("--a", type=int)
    g.add_argument("--b", type=int)
    g.add_argument("--output", required=True, help="edge-list (or .json) path")

    c = sub.add_parser("count", help="exact motif count")
    c.add_argument("--graph", required=True)
    c.add_argument("--motif", required=True)
    c.add_argument("--cap", type=int, default=DEFAULT_COPY_CAP)

    e = sub.add_parser("estimate", help="estimate the count from one sample")
    e.add_argument("--graph", required=True)
    e.add_argument("--motif", required=True)
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--alpha", type=float, default=0.05)
    e.add_argument("--cap", type=int, default=DEFAULT_COPY_CAP)

    d = sub.add_parser("diagnose", help="consistency and truncation diagnostics")
    d.add_argument("--graph", required=True)
    d.add_argument("--motif", required=True)
    d.add_argument("--p", type=float, required=True)
    d.add_argument("--eps-grid", default=",".join(str(x) for x in harness.DEFAULT_EPSILON_GRID))
    d.add_argument("--m-grid", default=",".join(str(x) for x in harness.DEFAULT_M_GRID))
    d.add_argument("--cap", type=int, default=DEFAULT_COPY_CAP)
    d.add_argument("--sample-seed", type=int,
                   help="also evaluate truncated statistics on one sample")

    mo = sub.add_parser("moments", help="exact or Monte Carlo moment report")
    mo.add_argument("--graph", required=True)
    mo.add_argument("--motif", required=True)
    mo.add_argument("--p", type=float, required=True)
    mo.add_argument("--mode", choices=["exact", "mc"], default="exact")
    mo.add_argument("--reps", type=int, default=100_000)
    mo.add_argument("--cap", type=int, default=DEFAULT_COPY_CAP)

    si = sub.add_parser("simulate", help="run a replication experiment")
    si.add_argument("--spec", help="JSON experiment spec file")
    si.add_argument("--graph")
    si.add_argument("--motif")
    si.add_argument("--p", type=float)
    si.add_argument("--reps", type=int, default=1000)
    si.add_argument("--alpha", type=float, default=0.05)
    si.add_argument("--statistics", default="ratio,z")
    si.add_argument("--cap", type=int, default=DEFAULT_COPY_CAP)

    sw = sub.add_parser("sweep", help="threshold sweep over a parameter grid")
    sw.add_argument("--spec", required=True, help="JSON experiment spec file")
    sw.add_argument("--grid-kind", choices=["p", "q", "diag"], required=True)
    sw.add_argument("--grid", required=True, help="comma-separated values")

    rp = sub.add_parser("reproduce", help="run a canned experiment recipe")
    rp.add_argument("name", choices=["ex51", "ex52", "ex53", "ex54", "fig1", "fig2"])
    rp.add_argument("--reps", type=int)

    for sp in (g, c, e, d, mo, si, sw, rp):
        _add_common(sp, top=False)
    return top


def _cmd_generate(args) -> dict:
    ens = _ensemble_from_args(args)
    graph = ens.generate()
    if args.output.endswith(".json"):
        save_json_file(graph, args.output)
    else:
        save_edge_list_file(graph, args.output)
    return {"ensemble": ens.to_json_dict(), "n": graph.n, "m": graph.m,
            "output": args.output}


def _cmd_count(args) -> dict:
    graph = load_graph(args.graph)
    motif = parse_motif(args.motif)
    return {"motif": motif.name, "n": graph.n, "m": graph.m,
            "count": motif_count(graph, motif, cap=args.cap),
            "aut": motif.aut,
            "balancedness": [motif.density_max.numerator,
                             motif.density_max.denominator]}


def _cmd_estimate(args) -> dict:
    graph = load_graph(args.graph)
    motif = parse_motif(args.motif)
    copies = enumerate_copies(graph, motif, cap=args.cap)
    seed = args.seed if args.seed is not None else 0
    mask = sample_vertices(graph, args.p, seed)
    rep = estimate(copies, mask, args.p, alpha=args.alpha)
    out = rep.to_json_dict()
    out["n_copies_true"] = len(copies)
    out["seed"] = seed
    return out


def _cmd_diagnose(args) -> dict:
    graph = load_graph(args.graph)
    motif = parse_motif(args.motif)
    copies = enumerate_copies(graph, motif, cap=args.cap)
    eps_grid = [float(x) for x in args.eps_grid.split(",") if x]
    m_grid = [float(x) for x in args.m_grid.split(",") if x]
    var_t = float(exact_variance(copies, args.p))
    out = {"motif": motif.name, "p": args.p, "n_copies": len(copies),
           "var_t": var_t, "epsilon": [], "m_threshold": []}
    for eps in eps_grid:
        rep = consistency_diagnostic(copies, args.p, eps)
        out["epsilon"].append(rep.to_json_dict())
    mask = (sample_vertices(graph, args.p, args.sample_seed)
            if args.sample_seed is not None else None)
    for m in m_grid:
        if mask is not None and var_t > 0:
            rep = truncated_statistic_m(copies, mask, args.p, m, var_t)
            out["m_threshold"].append(rep.to_json_dict())
        else:
            from .estimator import variance_scaled_numerators
            if var_t > 0:
                kept = int((variance_scaled_numerators(copies, args.p)
                            <= m * var_t).sum())
            else:
                kept = 0
            out["m_threshold"].append({"kind": "m_threshold", "value": m,
                                       "kept_copies": kept,
                                       "n_copies": len(copies)})
    if mask is not None:
        out["sampled_truncated_eps"] = [
            {"epsilon": eps,
             "t_trunc": truncated_statistic_eps(copies, mask, args.p, eps)}
            for eps in eps_grid]
    return out


def _cmd_moments(args) -> dict:
    graph = load_graph(args.graph)
    motif = parse_motif(args.motif)
    copies = enumerate_copies(graph, motif, cap=args.cap)
    mode = "exact" if args.mode == "exact" else "monte_carlo"
    rep = moment_report(copies, args.p, mode=mode, reps=args.reps,
                        seed=args.seed if args.seed is not None else 0)
    return rep.to_json_dict()


def _cmd_simulate(args) -> dict:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = harness.ExperimentSpec.from_json_dict(json.load(fh))
    else:
        if not (args.graph and args.motif and args.p is not None):
            raise MotifHTError("simulate needs --spec or --graph/--motif/--p")
        spec = harness.ExperimentSpec(
            motif=args.motif, p=args.p, reps=args.reps,
            master_seed=args.seed if args.seed is not None else 0,
            graph_path=args.graph, alpha=args.alpha,
            statistics=tuple(s for s in args.statistics.split(",") if s),
            copy_cap=args.cap)
    spec.threads = args.threads
    if args.seed is not None:
        spec.master_seed = args.seed
    summary = harness.run_experiment(spec)
    return summary.to_json_dict(include_reps=True)


def _cmd_sweep(args) -> dict:
    with open(args.spec, "r", encoding="utf-8") as fh:
        spec = harness.ExperimentSpec.from_json_dict(json.load(fh))
    spec.threads = args.threads
    grid = [float(x) for x in args.grid.split(",") if x]
    return harness.threshold_sweep(spec, args.grid_kind, grid)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            result = _cmd_generate(args)
        elif args.command == "count":
            result = _cmd_count(args)
        elif args.command == "estimate":
            result = _cmd_estimate(args)
        elif args.command == "diagnose":
            result = _cmd_diagnose(args)
        elif args.command == "moments":
            result = _cmd_moments(args)
        elif args.command == "simulate":
            result = _cmd_simulate(args)
            if args.csv:
                _write_csv(result, args.csv)
        elif args.command == "sweep":
            result = _cmd_sweep(args)
        elif args.command == "reproduce":
            result = harness.reproduce(args.name, reps=args.reps,
                                       threads=args.threads,
                                       master_seed=args.seed)
        else:  # pragma: no cover
            raise MotifHTError(f"unknown command {args.command}")
    except MotifHTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    _emit(result, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
