"""Undirected graph storage, candidate pairs and GCN propagation operators.

Node pairs are kept canonical (``i < j``) and, where set operations are
needed, encoded as a single int64 pair id ``i * N + j``.  Ascending pair id
is the deterministic order used for every tie-break in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError, ValidationError


def pair_ids(pairs: np.ndarray, num_nodes: int) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return pairs[:, 0] * np.int64(num_nodes) + pairs[:, 1]


def pairs_from_ids(ids: np.ndarray, num_nodes: int) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    return np.stack([ids // num_nodes, ids % num_nodes], axis=1)


def canonicalize(pairs: np.ndarray) -> np.ndarray:
    """Return (min, max) rows for an ``(k, 2)`` pair array."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.stack([pairs.min(axis=1), pairs.max(axis=1)], axis=1)


@dataclass(frozen=True)
class Graph:
    """Observed undirected graph G_P.

    ``edges`` is an ``(E, 2)`` int64 array of canonical pairs sorted by pair
    id.  The unconnected pairs E_U are never stored; they are the complement.
    """

    num_nodes: int
    edges: np.ndarray
    _adj: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        n = int(self.num_nodes)
        if n < 0:
            raise ValidationError("num_nodes must be non-negative")
        if len(edges):
            if edges.min() < 0 or edges.max() >= n:
                raise ValidationError(f"edge endpoint out of range for {n} nodes")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValidationError("self-loops are not allowed")
        edges = canonicalize(edges)
        ids = pair_ids(edges, n)
        order = np.argsort(ids, kind="stable")
        ids = ids[order]
        if len(ids) > 1 and np.any(ids[1:] == ids[:-1]):
            raise ValidationError("duplicate edges are not allowed")
        edges = edges[order]
        edges.setflags(write=False)
        ids.setflags(write=False)
        object.__setattr__(self, "num_nodes", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_ids", ids)

    @classmethod
    def from_edges(cls, num_nodes, edges) -> "Graph":
        return cls(num_nodes, np.asarray(edges, dtype=np.int64).reshape(-1, 2))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_ids(self) -> np.ndarray:
        """Sorted pair ids of the observed edges."""
        return self._ids

    @property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.num_nodes)

    @property
    def adjacency(self) -> list[np.ndarray]:
        """Per-node sorted neighbour arrays (built lazily)."""
        if self._adj is None:
            rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
            cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
            order = np.lexsort((cols, rows))
            rows, cols = rows[order], cols[order]
            splits = np.searchsorted(rows, np.arange(1, self.num_nodes))
            object.__setattr__(self, "_adj", np.split(cols, splits))
        return self._adj

    def has_edge(self, i: int, j: int) -> bool:
        i, j = min(i, j), max(i, j)
        pid = i * self.num_nodes + j
        k = np.searchsorted(self._ids, pid)
        return bool(k < len(self._ids) and self._ids[k] == pid)

    def num_nonedges(self) -> int:
        n = self.num_nodes
        return n * (n - 1) // 2 - self.num_edges


def degree(graph: Graph, node: int) -> int:
    if not 0 <= node < graph.num_nodes:
        raise ArgumentError(f"node {node} out of range [0, {graph.num_nodes})")
    return len(graph.adjacency[node])


def top_m_nodes(graph: Graph, m: int) -> np.ndarray:
    """The ``m`` highest-degree nodes, ties broken by ascending node id."""
    if m < 1:
        raise ArgumentError("M must be at least 1")
    deg = graph.degrees
    order = np.lexsort((np.arange(graph.num_nodes), -deg))
    return order[: min(m, graph.num_nodes)]


def candidate_pairs(graph: Graph, m: int) -> np.ndarray:
    """Unobserved canonical pairs touching at least one top-``m`` degree node.

    Returned as an ``(k, 2)`` array sorted by pair id.
    """
    top = top_m_nodes(graph, m)
    n = graph.num_nodes
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    others = np.arange(n, dtype=np.int64)
    a = np.repeat(top.astype(np.int64), n)
    b = np.tile(others, len(top))
    keep = a != b
    pairs = canonicalize(np.stack([a[keep], b[keep]], axis=1))
    ids = np.unique(pair_ids(pairs, n))
    ids = ids[~np.isin(ids, graph.edge_ids, assume_unique=True)]
    return pairs_from_ids(ids, n)


@dataclass(frozen=True)
class WeightedGraph:
    """Sparse weighted graph; observed edges always carry weight 1.

    ``pairs`` is canonical and sorted by pair id, ``weights`` in (0, 1].
    """

    num_nodes: int
    pairs: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pairs = canonicalize(self.pairs)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(pairs) != len(weights):
            raise ValidationError("pairs and weights differ in length")
        if len(pairs):
            if pairs.min() < 0 or pairs.max() >= self.num_nodes:
                raise ValidationError("pair endpoint out of range")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise ValidationError("self-loops are not allowed")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0) or np.any(weights > 1):
            raise ValidationError("weights must lie in (0, 1]")
        ids = pair_ids(pairs, self.num_nodes)
        order = np.argsort(ids, kind="stable")
        ids = ids[order]
        if len(ids) > 1 and np.any(ids[1:] == ids[:-1]):
            raise ValidationError("duplicate pairs are not allowed")
        pairs, weights = pairs[order], weights[order]
        pairs.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_graph(cls, graph: Graph) -> "WeightedGraph":
        return cls(graph.num_nodes, graph.edges, np.ones(graph.num_edges))

    @property
    def num_edges(self) -> int:
        return len(self.pairs)

    def to_tsv(self) -> str:
        return "".join(f"{u}\t{v}\t{w:.17g}\n" for (u, v), w in zip(self.pairs.tolist(), self.weights.tolist()))


def normalized_adjacency(wg: WeightedGraph, num_nodes: int | None = None) -> sp.csr_matrix:
    """D^{-1/2} (W + I) D^{-1/2} as a CSR matrix with sorted indices.

    Each off-diagonal value is computed as ``w * (s_i * s_j)`` so that the
    (i, j) and (j, i) entries are bit-identical.
    """
    n = wg.num_nodes if num_nodes is None else int(num_nodes)
    if n != wg.num_nodes:
        raise ArgumentError("weighted graph built for a different node count")
    w = np.asarray(wg.weights, dtype=np.float64)
    if len(w) and (np.any(w <= 0) or np.any(w > 1)):
        raise ValidationError("weights must lie in (0, 1]")
    u, v = wg.pairs[:, 0], wg.pairs[:, 1]
    deg = np.ones(n)
    np.add.at(deg, u, w)
    np.add.at(deg, v, w)
    s = 1.0 / np.sqrt(deg)
    off = w * (s[u] * s[v])
    nodes = np.arange(n)
    rows = np.concatenate([u, v, nodes])
    cols = np.concatenate([v, u, nodes])
    vals = np.concatenate([off, off, s * s])
    a = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    a.sort_indices()
    return a
