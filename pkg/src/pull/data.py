"""File formats, atomic writes and the stochastic block model generator."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ValidationError
from .graph import Graph
from .rng import derive_rng


def read_edges(path, num_nodes: int | None = None) -> Graph:
    """Parse a ``u v`` edge list.  Duplicates (either orientation) and self-loops are errors."""
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected two node ids, got {line.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: node ids must be integers") from None
            if u < 0 or v < 0:
                raise ValidationError(f"{path}:{lineno}: node ids must be non-negative")
            if u == v:
                raise ValidationError(f"{path}:{lineno}: self-loop {u} {v}")
            rows.append((u, v))
    edges = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
    n = int(edges.max()) + 1 if len(edges) else 0
    if num_nodes is not None:
        if num_nodes < n:
            raise ValidationError(f"edge list references node {n - 1} but only {num_nodes} nodes declared")
        n = num_nodes
    return Graph(n, edges)


def format_edges(edges) -> str:
    return "".join(f"{u} {v}\n" for u, v in np.asarray(edges).reshape(-1, 2).tolist())


def read_features(path) -> np.ndarray:
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValidationError(f"{path}: first line must be 'N d'")
        n, d = int(header[0]), int(header[1])
        data = np.loadtxt(f, dtype=np.float64, ndmin=2)
    if n == 0:
        return np.empty((0, d))
    if data.shape != (n, d):
        raise ValidationError(f"{path}: expected {n}x{d} values, got {data.shape[0]}x{data.shape[1]}")
    if not np.all(np.isfinite(data)):
        raise ValidationError(f"{path}: non-finite feature values")
    return data


def format_features(x) -> str:
    x = np.asarray(x, dtype=np.float64)
    lines = [f"{x.shape[0]} {x.shape[1]}\n"]
    lines += [" ".join(repr(float(v)) for v in row) + "\n" for row in x]
    return "".join(lines)


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def gen_sbm(num_nodes: int, num_blocks: int, p_in: float, p_out: float, feature_dim: int,
            seed: int) -> tuple[Graph, np.ndarray]:
    """Stochastic block model with contiguous, near-equal blocks.

    Features are the one-hot block id followed by ``feature_dim - num_blocks``
    standard-normal noise columns.
    """
    if not 0.0 <= p_out < p_in <= 1.0:
        raise ArgumentError("need 0 <= p_out < p_in <= 1")
    if num_blocks < 1 or num_nodes < num_blocks:
        raise ArgumentError("need 1 <= num_blocks <= num_nodes")
    if feature_dim < num_blocks:
        raise ArgumentError("feature_dim must be at least num_blocks")
    rng = derive_rng(seed, "sbm", "edges")
    blocks = np.array_split(np.arange(num_nodes), num_blocks)
    membership = np.concatenate([np.full(len(b), k) for k, b in enumerate(blocks)])
    parts = []
    for a in range(num_blocks):
        for b in range(a, num_blocks):
            ra, rb = blocks[a], blocks[b]
            p = p_in if a == b else p_out
            if p == 0.0:
                continue
            hit = rng.random((len(ra), len(rb))) < p
            if a == b:
                hit = np.triu(hit, 1)
            i, j = np.nonzero(hit)
            parts.append(np.stack([ra[i], rb[j]], axis=1))
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    x = np.zeros((num_nodes, feature_dim))
    x[np.arange(num_nodes), membership] = 1.0
    x[:, num_blocks:] = derive_rng(seed, "sbm", "features").standard_normal((num_nodes, feature_dim - num_blocks))
    return Graph(num_nodes, edges), x
