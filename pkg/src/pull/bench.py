"""Runtime versus edge count on random edge subsamples."""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.stats import linregress

from .errors import ArgumentError
from .graph import Graph
from .rng import derive_rng
from .trainer import TrainConfig, train_pull


def subsample_edges(graph: Graph, portion: float, seed: int) -> Graph:
    """Keep ``floor(portion * |E|)`` uniformly chosen edges and every node."""
    if not 0.0 < portion <= 1.0:
        raise ArgumentError(f"portion must lie in (0, 1], got {portion}")
    k = math.floor(portion * graph.num_edges)
    idx = np.sort(derive_rng(seed, "bench", repr(portion)).choice(graph.num_edges, size=k, replace=False))
    return Graph(graph.num_nodes, graph.edges[idx])


def bench_scaling(graph: Graph, x, portions, seed: int = 0, max_outer: int = 3,
                  inner_epochs: int = 50, repeats: int = 1) -> list[dict]:
    """Time a fixed-budget PULL run (no validation, no early stop) per portion.

    With ``repeats > 1`` the fastest of the repeated runs is reported.
    """
    portions = [float(p) for p in portions]
    for p in portions:
        if not 0.0 < p <= 1.0:
            raise ArgumentError(f"portion must lie in (0, 1], got {p}")
    cfg = TrainConfig(max_outer=max_outer, inner_epochs=inner_epochs, seed=seed, early_stop=False)
    rows = []
    for p in portions:
        sub = subsample_edges(graph, p, seed)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            train_pull(sub, x, None, cfg)
            best = min(best, time.perf_counter() - t0)
        rows.append({"portion": p, "edges": sub.num_edges, "seconds": best})
    return rows


def linear_fit_r2(xs, ys) -> float:
    """R^2 of the least-squares line; NaN when fewer than two distinct x values."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if len(xs) < 2 or np.all(xs == xs[0]):
        return math.nan
    fit = linregress(xs, ys)
    return float(fit.rvalue ** 2)


def format_bench_csv(rows: list[dict]) -> str:
    lines = ["portion,edges,seconds"]
    lines += [f"{r['portion']!r},{r['edges']},{r['seconds']:.6f}" for r in rows]
    r2 = linear_fit_r2([r["edges"] for r in rows], [r["seconds"] for r in rows])
    lines.append(f"# r2,{'NA' if math.isnan(r2) else f'{r2:.6f}'}")
    return "\n".join(lines) + "\n"
