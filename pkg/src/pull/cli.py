"""Command-line entry point.

Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure,
1 when ``oracle-check`` finds a residual above tolerance.  Set
``PULL_VERBOSE=1`` (or 2) for progress logging on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .bench import bench_scaling, format_bench_csv
from .data import atomic_write, format_edges, format_features, gen_sbm, read_edges, read_features
from .errors import NumericError, PullError, ValidationError
from .experiment import RunConfig, run_config
from .oracle import run_checks
from .rng import derive_rng
from .splitter import split

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _cmd_split(args) -> int:
    if args.r_m == 0:
        print("warning: r_m is 0, the test set will be empty", file=sys.stderr)
    graph = read_edges(args.edges, num_nodes=args.num_nodes)
    sp = split(graph, args.r_m, args.r_valid, args.seed)
    atomic_write(args.out, sp.to_json())
    print(f"train={len(sp.train_edges)} valid={len(sp.valid_missing)} test={len(sp.test_missing)}")
    return 0


def _cmd_train(args) -> int:
    path = Path(args.config)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    rc = RunConfig.from_dict(doc, base_dir=path.parent)
    result = run_config(rc)
    r = result.report
    print(f"{r.method} seed={r.seed} test AUROC={r.test_auroc:.4f} AUPRC={r.test_auprc:.4f}")
    if r.test_auroc_observed is not None:
        print(f"  (observed-graph propagation: AUROC={r.test_auroc_observed:.4f} AUPRC={r.test_auprc_observed:.4f})")
    return 0


def _cmd_oracle(args) -> int:
    rows = run_checks(args.seed, args.trials, args.perturb)
    text = json.dumps(rows, sort_keys=True, indent=1)
    if args.out:
        atomic_write(args.out, text + "\n")
    failed = [r for r in rows if not r["passed"]]
    worst = {}
    for r in rows:
        worst[r["check"]] = max(worst.get(r["check"], 0.0), r["residual"])
    for name, res in worst.items():
        print(f"{name}: max residual {res:.3e}")
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed")
    return 1 if failed else 0


def _parse_portions(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"bad --portions value {text!r}") from None
    if not vals or any(not 0.0 < v <= 1.0 for v in vals):
        raise UsageError("portions must lie in (0, 1]")
    return vals


def _cmd_bench(args) -> int:
    portions = _parse_portions(args.portions)
    if args.features:
        x = read_features(args.features)
        graph = read_edges(args.edges, num_nodes=x.shape[0])
    else:
        graph = read_edges(args.edges)
        x = derive_rng(args.seed, "bench", "features").standard_normal((graph.num_nodes, args.feature_dim))
    rows = bench_scaling(graph, x, portions, args.seed, args.outer, args.inner, args.repeats)
    text = format_bench_csv(rows)
    if args.out:
        atomic_write(args.out, text)
    sys.stdout.write(text)
    return 0


def _cmd_gen_sbm(args) -> int:
    graph, x = gen_sbm(args.nodes, args.blocks, args.p_in, args.p_out, args.feature_dim, args.seed)
    atomic_write(args.out_edges, format_edges(graph.edges))
    atomic_write(args.out_features, format_features(x))
    print(f"nodes={graph.num_nodes} edges={graph.num_edges}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pull", description="Positive-unlabeled link prediction.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="hold out valid/test edges and sample negatives")
    p.add_argument("--edges", required=True)
    p.add_argument("--num-nodes", type=int, default=None)
    p.add_argument("--r-m", type=float, required=True)
    p.add_argument("--r-valid", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="train a method from a JSON run config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("oracle-check", help="verify the closed-form identities by enumeration")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--perturb", type=float, default=0.0,
                   help="shift potentials on the brute-force side (harness self-test)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("bench-scaling", help="runtime against edge count on subsampled graphs")
    p.add_argument("--edges", required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--portions", default="0.25,0.5,0.75,1.0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outer", type=int, default=3)
    p.add_argument("--inner", type=int, default=50)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("gen-sbm", help="write a stochastic block model graph and features")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, required=True)
    p.add_argument("--feature-dim", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-features", required=True)
    p.set_defaults(func=_cmd_gen_sbm)
    return ap


def main(argv=None) -> int:
    level = {"1": logging.INFO, "2": logging.DEBUG}.get(os.environ.get("PULL_VERBOSE", ""), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, PullError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
