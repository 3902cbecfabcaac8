import math

import numpy as np
import pytest

from pull.errors import ArgumentError, ClampWarning
from pull.gcn import GCNParams, forward, logits
from pull.graph import Graph, WeightedGraph, normalized_adjacency
from pull.losses import (LossBatch, loss_lc, loss_le_full, loss_le_prime, sample_loss_batch,
                         total_loss_and_grad)
from pull.prob import sigmoid
from pull.rng import derive_rng

from conftest import random_loss_instance

LN2 = math.log(2)


def zero_params(d=2, h=3):
    return GCNParams(np.zeros((d, h)), np.zeros((h, h)))


def test_le_full_examples():
    assert loss_le_full([0.5], [], [], []) == pytest.approx(LN2, abs=1e-15)
    y = 0.37
    assert loss_le_full([], [y], [1.0], []) == loss_le_full([y], [], [], [])
    assert loss_le_full([], [0.5], [0.5], []) == pytest.approx(LN2, abs=1e-15)


def test_le_full_clamps_with_warning():
    with pytest.warns(ClampWarning):
        v = loss_le_full([0.0], [], [], [1.0])
    assert math.isfinite(v) and v > 0


def test_le_prime_perfect_scores_go_to_zero():
    g = Graph(4, [(0, 1), (2, 3)])
    x = np.array([[1.0, 0], [1, 0], [0, 1], [0, 1]])
    a = normalized_adjacency(WeightedGraph.from_graph(g))
    empty = np.empty((0, 2), dtype=np.int64)
    batch = LossBatch(g.edges, empty, np.empty(0), np.array([[0, 2], [1, 3]]), np.array([[0, 2], [1, 3]]))
    # block embeddings (c, -c) and (-c, c): same-block logit 2c^2, cross-block -2c^2
    losses = []
    for c in (1.0, 2.0, 3.0):
        p = GCNParams(np.eye(2) * c, np.array([[1.0, -1.0], [-1.0, 1.0]]))
        losses.append(loss_le_prime(p, x, a, batch))
    assert losses[0] > losses[1] > losses[2] and losses[2] < 1e-6


def test_le_prime_equals_full_when_batch_covers_everything():
    inst = random_loss_instance(1)
    p, x, a, b = inst["params"], inst["x"], inst["a_exp"], inst["batch"]
    prob = lambda pairs: sigmoid(logits(forward(p, x, a), pairs))
    full = loss_le_full(prob(b.positives), prob(b.pseudo_pairs), b.pseudo_labels, prob(b.sampled_negatives))
    assert loss_le_prime(p, x, a, b) == pytest.approx(full, rel=1e-14)


def test_sample_loss_batch_invariants_and_determinism():
    rng = np.random.default_rng(0)
    iu, ju = np.triu_indices(30, 1)
    keep = rng.random(len(iu)) < 0.1
    g = Graph(30, np.stack([iu[keep], ju[keep]], 1))
    sel = np.array([[0, 29], [1, 28]])
    sel = sel[~np.array([g.has_edge(i, j) for i, j in sel])]
    w = np.full(len(sel), 0.6)
    b1 = sample_loss_batch(g, sel, w, derive_rng(5, "epoch", 0, 0))
    b2 = sample_loss_batch(g, sel, w, derive_rng(5, "epoch", 0, 0))
    assert np.array_equal(b1.sampled_negatives, b2.sampled_negatives)
    assert np.array_equal(b1.correction_negatives, b2.correction_negatives)
    assert len(b1.sampled_negatives) == g.num_edges + len(sel)
    assert len(b1.correction_negatives) == g.num_edges
    blocked = set(map(tuple, g.edges.tolist())) | set(map(tuple, sel.tolist()))
    for arr in (b1.sampled_negatives, b1.correction_negatives):
        rows = list(map(tuple, arr.tolist()))
        assert len(set(rows)) == len(rows) and not blocked & set(rows)


def test_lc_rejects_size_mismatch():
    g = Graph(4, [(0, 1), (1, 2)])
    a = normalized_adjacency(WeightedGraph.from_graph(g))
    with pytest.raises(ArgumentError):
        loss_lc(zero_params(), np.ones((4, 2)), a, g.edges, [[0, 3]])
    b = LossBatch(g.edges, np.empty((0, 2), int), np.empty(0), np.array([[0, 3], [2, 3]]), np.array([[0, 3]]))
    with pytest.raises(ArgumentError):
        b.lc_terms()


@pytest.mark.parametrize("k", [1, 2, 5])
def test_lc_half_everywhere(k):
    n = 2 * k + 2
    g = Graph(n, [(2 * i, 2 * i + 1) for i in range(k)])
    a = normalized_adjacency(WeightedGraph.from_graph(g))
    neg = [(0, n - 1 - i) for i in range(k)]
    assert loss_lc(zero_params(), np.ones((n, 2)), a, g.edges, neg) == pytest.approx(2 * k * LN2, abs=1e-12)


def test_lc_propagation_graph_matters():
    # adding edge (2,3) to the propagation graph changes node 2's embedding
    g = Graph(4, [(0, 1), (1, 2)])
    g_bar = WeightedGraph(4, [(0, 1), (1, 2), (2, 3)], [1.0, 1.0, 0.8])
    x = np.eye(4)
    p = GCNParams(np.arange(12, dtype=float).reshape(4, 3) / 10, np.eye(3))
    pos, neg = g.edges, np.array([[0, 3], [0, 2]])
    on_obs = loss_lc(p, x, normalized_adjacency(WeightedGraph.from_graph(g)), pos, neg)
    on_bar = loss_lc(p, x, normalized_adjacency(g_bar), pos, neg)
    assert abs(on_obs - on_bar) > 1e-6


def test_total_and_ablation():
    inst = random_loss_instance(3)
    p, x, b = inst["params"], inst["x"], inst["batch"]
    le, lc, g = total_loss_and_grad(p, x, inst["a_exp"], inst["a_obs"], b)
    assert le == pytest.approx(loss_le_prime(p, x, inst["a_exp"], b), rel=1e-13)
    assert lc == pytest.approx(loss_lc(p, x, inst["a_obs"], b.positives, b.correction_negatives), rel=1e-13)
    le2, lc2, g2 = total_loss_and_grad(p, x, inst["a_exp"], inst["a_obs"], b, ablate_lc=True)
    assert le2 == le and lc2 == 0.0
    assert not np.allclose(g.w1, g2.w1)


def test_losses_nonnegative_and_finite():
    for s in range(10):
        inst = random_loss_instance(s)
        le, lc, _ = total_loss_and_grad(inst["params"], inst["x"], inst["a_exp"], inst["a_obs"], inst["batch"])
        assert math.isfinite(le) and math.isfinite(lc) and le >= 0 and lc >= 0
