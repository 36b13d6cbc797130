"""Command-line entry point: ``dissmlr <command> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io
from .bench import BENCH_FIELDS, bench_run
from .errors import DissmlrError, InvariantViolation
from .hca import cut, fast_hca, naive_hca_with_stats
from .mlr import DEFAULT_ALPHA, DEFAULT_EPSILON, multi_level_refine
from .rkm import DEFAULT_MAX_ITER, rkm_best_of
from .synthetic import gen_synthetic

log = logging.getLogger("dissmlr")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _add_input(p):
    p.add_argument("--input", required=True, help="matrix file")
    p.add_argument("--format", default="square_csv", choices=io.FORMATS)


def _build(args, D):
    if getattr(args, "naive", False):
        dend, stats = naive_hca_with_stats(D)
    else:
        dend, stats = fast_hca(D, checked=args.checked)
    log.info("hca: %d linkage evaluations", stats.linkage_evaluations)
    return dend


def cmd_validate(args):
    D = io.load_matrix(args.input, args.format)
    off = D.values[~np.eye(D.n, dtype=bool)]
    print(f"ok: n={D.n} min={off.min() if off.size else 0.0!r} max={off.max() if off.size else 0.0!r}")


def cmd_gen(args):
    D, labels = gen_synthetic(args.n, args.dims, args.clusters, args.spread, args.separation,
                              args.seed)
    io.save_matrix(D, io.ensure_parent(args.out), args.format)
    if args.labels_out:
        io.save_partition(labels, io.ensure_parent(args.labels_out))
    print(f"wrote {D.n}x{D.n} matrix to {args.out}")


def cmd_hca(args):
    D = io.load_matrix(args.input, args.format)
    dend = _build(args, D)
    if args.dendrogram_out:
        io.save_dendrogram(dend, io.ensure_parent(args.dendrogram_out))
    if args.k is not None:
        P = cut(dend, args.k, D)
        if args.checked:
            P.verify(D)
        if args.partition_out:
            io.save_partition(P, io.ensure_parent(args.partition_out))
        print(f"k={args.k} E={P.error()!r}")
    else:
        print(f"merges={len(dend)} E_total={dend.steps[-1].error_after!r}")


def cmd_refine(args):
    D = io.load_matrix(args.input, args.format)
    dend = io.load_dendrogram(args.dendrogram) if args.dendrogram else _build(args, D)
    base = cut(dend, args.k, D).error()
    P, level_errors = multi_level_refine(D, dend, args.k, args.alpha, args.epsilon,
                                         checked=args.checked)
    if args.partition_out:
        io.save_partition(P, io.ensure_parent(args.partition_out))
    print(f"k={args.k} E_hca={base!r} E_mlr={P.error()!r} levels={len(level_errors)}")


def cmd_rkm(args):
    D = io.load_matrix(args.input, args.format)
    best, worst, errors = rkm_best_of(D, args.k, args.restarts, args.seed, args.max_iter)
    if args.checked:
        best.assignment.verify(D)
    if args.partition_out:
        io.save_partition(best.assignment, io.ensure_parent(args.partition_out))
    print(f"k={args.k} E_best={best.error!r} E_worst={worst.error!r} restarts={len(errors)}")


def cmd_bench(args):
    D = io.load_matrix(args.input, args.format)
    records = bench_run(D, args.k_min, args.k_max, args.alpha, args.restarts, args.seed,
                        checked=args.checked)
    if args.out:
        io.write_records(records, BENCH_FIELDS, io.ensure_parent(args.out))
    else:
        print(",".join(BENCH_FIELDS))
        for r in records:
            print(",".join(repr(getattr(r, f)) for f in BENCH_FIELDS))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dissmlr",
        description="Dissimilarity clustering by hierarchical clustering and multi-level refinement.")
    parser.add_argument("--checked", action="store_true",
                        help="verify incremental sums and every merge from scratch (slow)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a matrix file")
    _add_input(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", help="write a synthetic squared Euclidean matrix")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--format", default="square_csv", choices=io.FORMATS)
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("hca", help="build the dendrogram and optionally cut it")
    _add_input(p)
    p.add_argument("--k", type=int)
    p.add_argument("--dendrogram-out")
    p.add_argument("--partition-out")
    p.add_argument("--naive", action="store_true", help="use the cubic reference builder")
    p.set_defaults(func=cmd_hca)

    p = sub.add_parser("refine", help="multi-level refinement of a dendrogram cut")
    _add_input(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--dendrogram", help="reuse a saved dendrogram instead of rebuilding")
    p.add_argument("--naive", action="store_true")
    p.add_argument("--partition-out")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("rkm", help="relational k-means with random restarts")
    _add_input(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--partition-out")
    p.set_defaults(func=cmd_rkm)

    p = sub.add_parser("bench", help="error versus k for HCA, HCA+MLR and RKM")
    _add_input(p)
    p.add_argument("--k-min", type=int, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (DissmlrError, InvariantViolation, OSError) as exc:
        print(f"dissmlr: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
