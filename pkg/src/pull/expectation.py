"""Expected graph weights and their sparse top-K / weighted-sample approximations.

Under the factorised latent-edge distribution the expected adjacency of an
unobserved pair equals its node potential, so the expected graph restricted
to observed edges plus candidates is just: 1 on observed edges, the current
model score on candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ArgumentError
from .gcn import GCNParams, forward, score
from .graph import Graph, WeightedGraph, normalized_adjacency, pair_ids
from .rng import derive_rng


@dataclass(frozen=True)
class NodePotentialTable:
    """Linking potentials phi(z=1) for observed edges and candidate pairs.

    ``pairs`` are canonical, observed first (weight exactly 1) then
    candidates in pair-id order.
    """

    num_nodes: int
    pairs: np.ndarray
    weights: np.ndarray
    observed: np.ndarray

    @property
    def candidate_pairs(self) -> np.ndarray:
        return self.pairs[~self.observed]

    @property
    def candidate_weights(self) -> np.ndarray:
        return self.weights[~self.observed]

    @property
    def observed_pairs(self) -> np.ndarray:
        return self.pairs[self.observed]


@dataclass
class ExpectationConfig:
    """Growth ratio ``r``, candidate cutoff ``m`` and the real-valued budget ``k``."""

    r: float = 0.05
    m: int = 100
    k: float = 0.0
    steps: int = 0
    k0: float | None = None

    def __post_init__(self):
        if self.k0 is None:
            self.k0 = float(self.k)
        if self.r <= 0:
            raise ArgumentError("growth ratio r must be positive")
        if self.m < 1:
            raise ArgumentError("M must be at least 1")


def expected_weights(params: GCNParams, x, graph: Graph, prop_graph: WeightedGraph,
                     candidates: np.ndarray, a=None) -> NodePotentialTable:
    """Potentials for observed edges and ``candidates``.

    Embeddings come from propagating over ``prop_graph`` (the previous
    approximation, or the observed graph itself on the first pass).  ``a``
    may carry a precomputed operator for ``prop_graph``.
    """
    if a is None:
        a = normalized_adjacency(prop_graph)
    h = forward(params, x, a)
    candidates = np.asarray(candidates, dtype=np.int64).reshape(-1, 2)
    cand_w = score(h, candidates[:, 0], candidates[:, 1]) if len(candidates) else np.empty(0)
    pairs = np.concatenate([graph.edges, candidates]).reshape(-1, 2)
    weights = np.concatenate([np.ones(graph.num_edges), cand_w])
    observed = np.concatenate([np.ones(graph.num_edges, dtype=bool), np.zeros(len(candidates), dtype=bool)])
    return NodePotentialTable(graph.num_nodes, pairs, weights, observed)


def selection_budget(k: float, num_observed: int) -> int:
    return max(0, math.floor(k) - num_observed)


def _assemble(table: NodePotentialTable, chosen: np.ndarray) -> tuple[WeightedGraph, np.ndarray, np.ndarray]:
    cand = table.candidate_pairs
    cw = table.candidate_weights
    chosen = np.sort(chosen)
    sel_pairs, sel_w = cand[chosen], cw[chosen]
    obs = table.observed_pairs
    wg = WeightedGraph(table.num_nodes, np.concatenate([obs, sel_pairs]).reshape(-1, 2),
                       np.concatenate([np.ones(len(obs)), sel_w]))
    order = np.argsort(pair_ids(sel_pairs, table.num_nodes), kind="stable")
    return wg, sel_pairs[order], sel_w[order]


def approximate_topk(table: NodePotentialTable, k: float) -> tuple[WeightedGraph, np.ndarray, np.ndarray]:
    """Keep observed edges plus the ``floor(k) - |E_P|`` heaviest candidates.

    Ties go to the smaller pair id.  Returns the weighted graph and the
    selected candidates with their weights (pair-id order).
    """
    if k < 0:
        raise ArgumentError("K must be non-negative")
    cand = table.candidate_pairs
    budget = min(selection_budget(k, int(table.observed.sum())), len(cand))
    ids = pair_ids(cand, table.num_nodes)
    order = np.lexsort((ids, -table.candidate_weights))
    return _assemble(table, order[:budget])


def approximate_weighted_sample(table: NodePotentialTable, k: float, seed,
                                ) -> tuple[WeightedGraph, np.ndarray, np.ndarray]:
    """Like :func:`approximate_topk`, but candidates are drawn without
    replacement with probability proportional to weight.

    Uses exponential keys ``log(u) / w`` (largest keys win), which has the
    same law as drawing one candidate at a time proportionally to weight
    among those not yet drawn.  ``seed`` may be an int or a label tuple
    passed on to :func:`pull.rng.derive_rng`.
    """
    if k < 0:
        raise ArgumentError("K must be non-negative")
    cand = table.candidate_pairs
    budget = min(selection_budget(k, int(table.observed.sum())), len(cand))
    if budget == 0:
        return _assemble(table, np.empty(0, dtype=np.int64))
    ids = pair_ids(cand, table.num_nodes)
    base = np.argsort(ids, kind="stable")
    w = table.candidate_weights[base]
    if not np.any(w > 0):
        w = np.ones_like(w)
    seed = seed if isinstance(seed, tuple) else (seed,)
    u = derive_rng(*seed, "weighted-sample").random(len(w))
    with np.errstate(divide="ignore"):
        keys = np.where(w > 0, np.log(u) / np.where(w > 0, w, 1.0), -np.inf)
    top = np.lexsort((np.arange(len(w)), -keys))[:budget]
    return _assemble(table, base[top])


def k_update(cfg: ExpectationConfig, ep_size: int) -> float:
    """Grow the budget by ``r * |E_P|`` (kept real-valued; floored only on use).

    K is recomputed as ``K_0 + r |E_P| t`` in exact rational arithmetic (``r``
    read from its shortest decimal form) and rounded once, so there is no
    drift: 100 edges at r = 0.05 give exactly 115 after three updates.
    """
    cfg.steps += 1
    r = Fraction(repr(float(cfg.r)))
    cfg.k = float(Fraction(cfg.k0) + r * ep_size * cfg.steps)
    return cfg.k
