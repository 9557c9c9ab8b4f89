"""Command line interface: ``blockspec <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .clustering import DEFAULT_RESTARTS, assignment_from_clustering, lloyd_cluster
from .diagnostics import REPORT_COLUMNS, bound_suite
from .embedding import DEFAULT_OMEGA, KnowledgeMode, embed_graph, estimate_rank
from .evaluation import misassignment_count, misassignment_fraction
from .exceptions import BlockspecError, NoKFound
from .harness import STUDIES, load_config, run_study
from .model import resolve_params
from .sampler import grow_sample, sample_graph
from .seeding import Seed
from .selection import DEFAULT_XI, TRACE_COLUMNS, estimate_k_check, estimate_k_hat

log = logging.getLogger("blockspec")


def _r_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",")]


def _add_graph_args(p):
    p.add_argument("--graph", required=True, help="edge-list or dense graph file")
    p.add_argument("--R", required=True, type=_r_list, help="rank bound, or comma list per modality")
    p.add_argument("--mode", default="rows", choices=[m.value for m in KnowledgeMode])


def _add_cluster_args(p):
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)


def _k_max(args, g):
    if args.k_max:
        return args.k_max
    total_R = args.R[0] * g.S if len(args.R) == 1 else sum(args.R)
    return min(2 * total_R + 2, g.n)


def _features(args):
    g = io.read_graph(args.graph)
    R = args.R[0] if len(args.R) == 1 else args.R
    embeddings, Z = embed_graph(g.adjacency, R, args.mode)
    return g, embeddings, Z


def cmd_generate(args):
    params = resolve_params(args.params)
    seed = Seed(args.seed, args.stream)
    g = grow_sample(params, args.n, seed) if args.growth else sample_graph(params, args.n, seed)
    io.write_graph(g, args.out, args.format)
    if args.labels_out:
        io.write_labels(g.tau, args.labels_out)
    print(f"wrote n={g.n} S={g.S} directed={g.directed} to {args.out}")


def cmd_embed(args):
    g, embeddings, Z = _features(args)
    io.write_matrix(Z, args.out)
    if args.sigma_out:
        io.write_matrix(np.column_stack([e.sigma for e in embeddings]), args.sigma_out,
                        header=[f"sigma{s}" for s in range(len(embeddings))])
    ranks = [estimate_rank(e.sigma, g.n, args.omega) for e in embeddings]
    print(f"features {Z.shape[0]}x{Z.shape[1]} -> {args.out}; rank estimates {ranks}")


def cmd_partition(args):
    g, _, Z = _features(args)
    seed = Seed(args.seed, args.stream)
    if args.k is not None:
        labels = assignment_from_clustering(lloyd_cluster(Z, args.k, args.restarts, seed))
        k = args.k
    else:
        k_max = _k_max(args, g)
        k, trace = estimate_k_hat(Z, g.n, args.xi, k_max, restarts=args.restarts, seed=seed)
        labels = assignment_from_clustering(trace.clusterings[k])
    io.write_labels(labels, args.out)
    print(f"K={k}; labels -> {args.out}")


def cmd_select_k(args):
    g, _, Z = _features(args)
    seed = Seed(args.seed, args.stream)
    rows, chosen = [], {}
    if args.estimator in ("hat", "both"):
        k_max = _k_max(args, g)
        try:
            chosen["k_hat"], trace = estimate_k_hat(Z, g.n, args.xi, k_max, restarts=args.restarts, seed=seed)
        except NoKFound as exc:
            chosen["k_hat"], trace = None, exc.trace
        rows += trace.as_records()
    if args.estimator in ("check", "both"):
        chosen["k_check"], trace = estimate_k_check(Z, g.n, args.zeta, args.theta, restarts=args.restarts,
                                                    seed=seed)
        rows += trace.as_records()
    if args.out:
        io.write_table(rows, args.out, TRACE_COLUMNS)
    else:
        print(",".join(TRACE_COLUMNS))
        for r in rows:
            print(",".join(io.format_value(r[c]) for c in TRACE_COLUMNS))
    print(" ".join(f"{k}={v}" for k, v in chosen.items()))


def cmd_evaluate(args):
    tau, tau_hat = io.read_labels(args.truth), io.read_labels(args.pred)
    print(f"misassigned={misassignment_count(tau, tau_hat)} fraction={misassignment_fraction(tau, tau_hat)!r}")


def cmd_check_bounds(args):
    params = resolve_params(args.params)
    g = io.read_graph(args.graph, tau=io.read_labels(args.labels))
    reports = bound_suite(g, params, label=str(args.params))
    rows = [r.as_record() for r in reports]
    if args.out:
        io.write_table(rows, args.out, REPORT_COLUMNS)
    print(",".join(REPORT_COLUMNS))
    for r in rows:
        print(",".join(io.format_value(r[c]) for c in REPORT_COLUMNS))


def cmd_simulate(args):
    config = load_config(args.config, study=args.study, seed=args.seed)
    result = run_study(config, workers=args.workers)
    out = result.write(args.out)
    print(f"{len(result.records)} records -> {out}")
    print(",".join(map(str, result.aggregates[0].keys())) if result.aggregates else "")
    for row in result.aggregates:
        print(",".join(io.format_value(v) for v in row.values()))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blockspec", description="Adjacency-spectral partitioning of SBM graphs")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a graph from an SBM")
    p.add_argument("--params", required=True, help="preset (param1, kest) or YAML/JSON/text matrix file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--growth", action="store_true", help="build by one-vertex extensions")
    p.add_argument("--format", default="edgelist", choices=["edgelist", "dense"])
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("embed", help="write the spectral feature matrix")
    _add_graph_args(p)
    p.add_argument("--omega", type=float, default=DEFAULT_OMEGA)
    p.add_argument("--out", required=True)
    p.add_argument("--sigma-out")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("partition", help="estimate block labels (K known or selected)")
    _add_graph_args(p)
    _add_cluster_args(p)
    p.add_argument("--k", type=int, help="number of blocks; omit to select it")
    p.add_argument("--xi", type=float, default=DEFAULT_XI)
    p.add_argument("--k-max", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("select-k", help="estimate the number of blocks and write the trace")
    _add_graph_args(p)
    _add_cluster_args(p)
    p.add_argument("--xi", type=float, default=DEFAULT_XI)
    p.add_argument("--zeta", type=float, default=0.01)
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--k-max", type=int)
    p.add_argument("--estimator", default="hat", choices=["hat", "check", "both"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_select_k)

    p = sub.add_parser("evaluate", help="misassignment count between two label files")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("check-bounds", help="spectral bound reports for a graph with known labels")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_bounds)

    p = sub.add_parser("simulate", help="run a Monte Carlo study from a config file")
    p.add_argument("--study", choices=STUDIES)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (BlockspecError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
