"""Command line front end: generate, embed, align, test, simulate."""

import argparse
import sys
from dataclasses import replace

from .alignment import align
from .embedding import ase
from .harness import load_experiment_spec, run_experiment
from .io import (FLOAT_FMT, format_test_result, load_graph,
                 load_latent_config, load_positions, save_dense,
                 save_edge_list, save_embedding, save_matrix_csv,
                 save_null_samples, save_positions, save_test_result)
from .kernels import KernelSpec
from .models import Signature, sample_from_config
from .twosample import TestConfig, run_test


def _signature_flags(parser):
    parser.add_argument("-p", type=int, required=True,
                        help="number of positive-eigenvalue dimensions")
    parser.add_argument("-q", type=int, required=True,
                        help="number of negative-eigenvalue dimensions")


def _bandwidth(value: str):
    try:
        return float(value)
    except ValueError:
        return value


def cmd_generate(args) -> int:
    config = load_latent_config(args.model)
    graph, sample = sample_from_config(config, args.n, seed=args.seed)
    if args.format == "dense":
        save_dense(graph, args.out)
    else:
        save_edge_list(graph, args.out)
    print("wrote %s: n=%d edges=%d" % (args.out, graph.n, graph.edge_count()))
    if args.latent_out:
        save_positions(sample.positions, args.latent_out)
        print("wrote %s" % args.latent_out)
    return 0


def cmd_embed(args) -> int:
    graph = load_graph(args.graph)
    embedding = ase(graph, Signature(args.p, args.q))
    if args.scaled:
        embedding = replace(embedding,
                            positions=embedding.scaled_positions())
    save_embedding(embedding, args.out)
    print("wrote %s: n=%d d=%d sparsity=%.6g"
          % (args.out, graph.n, embedding.positions.shape[1],
             embedding.sparsity_estimate))
    return 0


def cmd_align(args) -> int:
    x = load_positions(args.x)
    y = load_positions(args.y)
    result = align(x, y, Signature(args.p, args.q),
                   eps_scale=args.eps_scale, restarts=args.restarts,
                   max_outer=args.max_outer, seed=args.seed)
    save_matrix_csv(result.w.matrix, args.out)
    row_err, col_err = result.coupling.marginal_errors()
    lines = [
        "w_csv            %s" % args.out,
        "transport_cost   " + FLOAT_FMT % result.transport_cost,
        "u_value          " + FLOAT_FMT % result.u_value,
        "converged        %s" % str(bool(result.converged)).lower(),
        "iterations       %d" % result.iterations,
        "restarts_tried   %d" % result.restarts_tried,
        "coupling_shape   %d x %d" % result.coupling.matrix.shape,
        "marginal_errors  %.3g, %.3g" % (row_err, col_err),
    ]
    print("\n".join(lines))
    if args.coupling_out:
        save_matrix_csv(result.coupling.matrix, args.coupling_out)
        print("coupling written to %s" % args.coupling_out)
    return 0


def cmd_test(args) -> int:
    g1 = load_graph(args.g1)
    g2 = load_graph(args.g2)
    cfg = TestConfig(
        signature=Signature(args.p, args.q),
        kernel=KernelSpec(family=args.kernel,
                          bandwidth=_bandwidth(args.bandwidth)),
        permutations=args.permutations,
        eps_scale=args.eps_scale,
        restarts=args.restarts,
        max_outer=args.max_outer,
        alpha_level=args.alpha,
        null_method=args.null_method,
        seed=args.seed,
    )
    result = run_test(g1, g2, cfg)
    print(format_test_result(result))
    if args.result_out:
        save_test_result(result, args.result_out)
    if args.null_out:
        save_null_samples(result.null_samples, args.null_out)
    return 0


def cmd_simulate(args) -> int:
    spec = load_experiment_spec(args.spec)
    outcome = run_experiment(spec)
    print("experiment %s (%s) written to %s"
          % (spec.name, spec.kind, outcome["output_dir"]))
    summary = outcome.get("summary")
    if isinstance(summary, dict):
        for key, value in summary.items():
            print("%-22s %s" % (key, value))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphtst",
        description="Two-sample testing between low-rank random graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample a graph from a model config")
    gen.add_argument("--model", required=True, help="model config YAML")
    gen.add_argument("--n", type=int, required=True, help="number of vertices")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output graph file")
    gen.add_argument("--format", choices=("edges", "dense"), default="edges")
    gen.add_argument("--latent-out", default=None,
                     help="also write sampled latent positions as CSV")
    gen.set_defaults(func=cmd_generate)

    emb = sub.add_parser("embed", help="spectrally embed a graph")
    emb.add_argument("--graph", required=True)
    _signature_flags(emb)
    emb.add_argument("--out", required=True, help="embedding CSV path")
    emb.add_argument("--scaled", action="store_true",
                     help="write density-rescaled positions")
    emb.set_defaults(func=cmd_embed)

    ali = sub.add_parser("align", help="align one embedding onto another")
    ali.add_argument("--x", required=True, help="reference embedding CSV")
    ali.add_argument("--y", required=True, help="embedding CSV to align")
    _signature_flags(ali)
    ali.add_argument("--out", required=True, help="where to write W as CSV")
    ali.add_argument("--eps-scale", type=float, default=0.05)
    ali.add_argument("--restarts", type=int, default=8)
    ali.add_argument("--max-outer", type=int, default=30)
    ali.add_argument("--seed", type=int, default=0)
    ali.add_argument("--coupling-out", default=None,
                     help="also write the transport plan as CSV")
    ali.set_defaults(func=cmd_align)

    tst = sub.add_parser("test", help="two-sample test between two graphs")
    tst.add_argument("--g1", required=True)
    tst.add_argument("--g2", required=True)
    _signature_flags(tst)
    tst.add_argument("--kernel", choices=("gaussian", "laplace"),
                     default="gaussian")
    tst.add_argument("--bandwidth", default="median-heuristic",
                     help="numeric bandwidth or 'median-heuristic'")
    tst.add_argument("--permutations", type=int, default=500)
    tst.add_argument("--eps-scale", type=float, default=0.05)
    tst.add_argument("--restarts", type=int, default=8)
    tst.add_argument("--max-outer", type=int, default=30)
    tst.add_argument("--alpha", type=float, default=0.05)
    tst.add_argument("--null-method", choices=("permute", "regraph"),
                     default="permute")
    tst.add_argument("--seed", type=int, default=0)
    tst.add_argument("--result-out", default=None,
                     help="write the result as YAML")
    tst.add_argument("--null-out", default=None,
                     help="write null statistics as CSV")
    tst.set_defaults(func=cmd_test)

    sim = sub.add_parser("simulate", help="run an experiment spec file")
    sim.add_argument("spec", help="experiment spec YAML")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
