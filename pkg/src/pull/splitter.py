"""Seeded train/valid/test edge splits and non-edge sampling."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, CapacityError, ValidationError
from .graph import Graph, canonicalize, pair_ids, pairs_from_ids
from .rng import derive_rng

# enumerate the complement instead of rejection sampling below this many pairs
_ENUMERATE_LIMIT = 1 << 14


def _member(sorted_ids: np.ndarray, ids: np.ndarray) -> np.ndarray:
    if len(sorted_ids) == 0:
        return np.zeros(len(ids), dtype=bool)
    k = np.searchsorted(sorted_ids, ids)
    k[k == len(sorted_ids)] = 0
    return sorted_ids[k] == ids


def sample_pairs_excluding(num_nodes: int, count: int, rng: np.random.Generator,
                           excluded: np.ndarray) -> np.ndarray:
    """Draw ``count`` distinct canonical pairs uniformly, avoiding ``excluded``.

    ``excluded`` must be a sorted, duplicate-free array of pair ids.  Returns
    pair ids in draw order.
    """
    n = num_nodes
    total = n * (n - 1) // 2
    available = total - len(excluded)
    if count < 0:
        raise ArgumentError("count must be non-negative")
    if count > available:
        raise CapacityError(f"requested {count} non-edges but only {available} exist")
    if count == 0:
        return np.empty(0, dtype=np.int64)
    if total <= _ENUMERATE_LIMIT or count * 4 > available:
        iu, ju = np.triu_indices(n, 1)
        ids = iu.astype(np.int64) * n + ju
        ids = ids[~_member(excluded, ids)]
        return ids[rng.choice(len(ids), size=count, replace=False)]
    out = np.empty(0, dtype=np.int64)
    while len(out) < count:
        need = count - len(out)
        draw = int(need * 1.3 * total / available) + 16
        u = rng.integers(0, n, size=draw)
        v = rng.integers(0, n, size=draw)
        keep = u != v
        pairs = canonicalize(np.stack([u[keep], v[keep]], axis=1))
        ids = pair_ids(pairs, n)
        ids = ids[~_member(excluded, ids)]
        ids = np.concatenate([out, ids])
        _, first = np.unique(ids, return_index=True)
        out = ids[np.sort(first)]
    return out[:count]


def sample_nonedges(graph: Graph, count: int, seed: int, exclude=()) -> np.ndarray:
    """``count`` distinct non-edges of ``graph`` outside ``exclude``, as ``(count, 2)``."""
    n = graph.num_nodes
    ex = np.asarray(exclude, dtype=np.int64).reshape(-1, 2)
    ex_ids = pair_ids(canonicalize(ex), n) if len(ex) else np.empty(0, dtype=np.int64)
    blocked = np.union1d(graph.edge_ids, ex_ids)
    ids = sample_pairs_excluding(n, count, derive_rng(seed, "nonedges"), blocked)
    return pairs_from_ids(ids, n)


@dataclass(frozen=True)
class Split:
    num_nodes: int
    train_edges: np.ndarray
    valid_missing: np.ndarray
    valid_neg: np.ndarray
    test_missing: np.ndarray
    test_neg: np.ndarray
    seed: int
    r_m: float
    r_valid: float

    def train_graph(self) -> Graph:
        return Graph(self.num_nodes, self.train_edges)

    def eval_set(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        """Pairs and 0/1 labels for ``"valid"`` or ``"test"``."""
        pos = getattr(self, f"{which}_missing")
        neg = getattr(self, f"{which}_neg")
        pairs = np.concatenate([pos, neg]).reshape(-1, 2)
        labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
        return pairs, labels

    def to_json(self) -> str:
        doc = {
            "num_nodes": self.num_nodes,
            "seed": self.seed,
            "r_m": self.r_m,
            "r_valid": self.r_valid,
        }
        for key in ("train_edges", "valid_missing", "valid_neg", "test_missing", "test_neg"):
            doc[key] = getattr(self, key).tolist()
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Split":
        doc = json.loads(text)
        arrays = {k: np.asarray(doc[k], dtype=np.int64).reshape(-1, 2)
                  for k in ("train_edges", "valid_missing", "valid_neg", "test_missing", "test_neg")}
        n = doc.get("num_nodes")
        if n is None:
            n = 1 + max((int(a.max()) for a in arrays.values() if len(a)), default=-1)
        return cls(num_nodes=int(n), seed=int(doc["seed"]), r_m=float(doc["r_m"]),
                   r_valid=float(doc["r_valid"]), **arrays)


def split(graph: Graph, r_m: float, r_valid: float, seed: int) -> Split:
    """Hold out ``floor(r_m |E|)`` test and ``floor(r_valid |E|)`` valid edges.

    Each held-out set is paired with an equal number of sampled non-edges of
    the original graph; valid and test negatives never overlap.
    """
    for name, r in (("r_m", r_m), ("r_valid", r_valid)):
        if not 0.0 <= r < 1.0:
            raise ArgumentError(f"{name} must lie in [0, 1), got {r}")
    if r_m + r_valid >= 1.0:
        raise ArgumentError("r_m + r_valid must be below 1")
    e = graph.num_edges
    n_test = math.floor(r_m * e)
    n_valid = math.floor(r_valid * e)
    if e < math.ceil((r_m + r_valid) * e) + 1:
        raise ArgumentError("split would leave no training edges")

    perm = derive_rng(seed, "split", "edges").permutation(e)
    test_idx = np.sort(perm[:n_test])
    valid_idx = np.sort(perm[n_test:n_test + n_valid])
    train_idx = np.sort(perm[n_test + n_valid:])

    n = graph.num_nodes
    test_neg = sample_pairs_excluding(n, n_test, derive_rng(seed, "split", "test_neg"), graph.edge_ids)
    blocked = np.union1d(graph.edge_ids, test_neg)
    valid_neg = sample_pairs_excluding(n, n_valid, derive_rng(seed, "split", "valid_neg"), blocked)

    return Split(
        num_nodes=n,
        train_edges=graph.edges[train_idx],
        valid_missing=graph.edges[valid_idx],
        valid_neg=pairs_from_ids(valid_neg, n),
        test_missing=graph.edges[test_idx],
        test_neg=pairs_from_ids(test_neg, n),
        seed=int(seed),
        r_m=float(r_m),
        r_valid=float(r_valid),
    )


def check_split(sp: Split, graph: Graph) -> None:
    """Raise ``ValidationError`` if ``sp`` breaks any split invariant for ``graph``."""
    n = graph.num_nodes
    sets = {k: pair_ids(getattr(sp, k), n) for k in
            ("train_edges", "valid_missing", "valid_neg", "test_missing", "test_neg")}
    seen = np.concatenate(list(sets.values()))
    if len(np.unique(seen)) != len(seen):
        raise ValidationError("split sets overlap or contain duplicates")
    pos = np.sort(np.concatenate([sets["train_edges"], sets["valid_missing"], sets["test_missing"]]))
    if not np.array_equal(pos, graph.edge_ids):
        raise ValidationError("train/valid/test edges do not cover the original edge set")
    if len(sets["valid_neg"]) != len(sets["valid_missing"]) or len(sets["test_neg"]) != len(sets["test_missing"]):
        raise ValidationError("negative counts do not match missing counts")
    neg = np.concatenate([sets["valid_neg"], sets["test_neg"]])
    if np.any(np.isin(neg, graph.edge_ids)):
        raise ValidationError("a sampled negative is an edge of the original graph")
