"""PU cross-entropy objectives.

All losses are sums over pairs.  ``L_E'`` uses pseudo-labels from the
approximated expected graph and propagates over it; the correction term
``L_C`` scores the same pairs' model but propagates over the observed graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError
from .gcn import GCNParams, PairBatch, backward, forward, logits
from .graph import Graph, pair_ids, pairs_from_ids
from .prob import bce_sum, sigmoid
from .splitter import sample_pairs_excluding


@dataclass(frozen=True)
class LossBatch:
    positives: np.ndarray
    pseudo_pairs: np.ndarray
    pseudo_labels: np.ndarray
    sampled_negatives: np.ndarray
    correction_negatives: np.ndarray

    def le_terms(self) -> PairBatch:
        return PairBatch.concat([
            PairBatch.of(self.positives, np.ones(len(self.positives))),
            PairBatch.of(self.pseudo_pairs, self.pseudo_labels),
            PairBatch.of(self.sampled_negatives, np.zeros(len(self.sampled_negatives))),
        ])

    def lc_terms(self) -> PairBatch:
        if len(self.correction_negatives) != len(self.positives):
            raise ArgumentError("correction negatives must match the number of observed edges")
        return PairBatch.concat([
            PairBatch.of(self.positives, np.ones(len(self.positives))),
            PairBatch.of(self.correction_negatives, np.zeros(len(self.correction_negatives))),
        ])


def sample_loss_batch(graph: Graph, selected: np.ndarray, selected_weights: np.ndarray,
                      rng: np.random.Generator) -> LossBatch:
    """Draw E_U' (size |E_P| + |E_P^r|) and E_U'' (size |E_P|) from E_U^r.

    Both are drawn without replacement, independently of each other.
    """
    n = graph.num_nodes
    selected = np.asarray(selected, dtype=np.int64).reshape(-1, 2)
    blocked = np.union1d(graph.edge_ids, pair_ids(selected, n))
    e = graph.num_edges
    neg = sample_pairs_excluding(n, e + len(selected), rng, blocked)
    corr = sample_pairs_excluding(n, e, rng, blocked)
    return LossBatch(graph.edges, selected, np.asarray(selected_weights, dtype=np.float64),
                     pairs_from_ids(neg, n), pairs_from_ids(corr, n))


def loss_le_full(yhat_pos, yhat_pseudo, pseudo_labels, yhat_unlabeled) -> float:
    """-sum log y over positives - sum log(1-y) over unlabeled - pseudo-labelled BCE."""
    return (bce_sum(yhat_pos, np.ones(len(yhat_pos)))
            + bce_sum(yhat_unlabeled, np.zeros(len(yhat_unlabeled)))
            + bce_sum(yhat_pseudo, pseudo_labels))


def _pair_probs(params, x, a, pairs, ax=None):
    return sigmoid(logits(forward(params, x, a, ax), pairs))


def loss_le_prime(params: GCNParams, x, a_expected: sp.csr_matrix, batch: LossBatch, ax=None) -> float:
    return loss_le_full(_pair_probs(params, x, a_expected, batch.positives, ax),
                        _pair_probs(params, x, a_expected, batch.pseudo_pairs, ax),
                        batch.pseudo_labels,
                        _pair_probs(params, x, a_expected, batch.sampled_negatives, ax))


def loss_lc(params: GCNParams, x, a_observed: sp.csr_matrix, positives, negatives, ax=None) -> float:
    positives = np.asarray(positives).reshape(-1, 2)
    negatives = np.asarray(negatives).reshape(-1, 2)
    if len(negatives) != len(positives):
        raise ArgumentError("correction negatives must match the number of observed edges")
    return (bce_sum(_pair_probs(params, x, a_observed, positives, ax), np.ones(len(positives)))
            + bce_sum(_pair_probs(params, x, a_observed, negatives, ax), np.zeros(len(negatives))))


def total_loss_and_grad(params: GCNParams, x, a_expected, a_observed, batch: LossBatch,
                        ablate_lc: bool = False, ax_expected=None, ax_observed=None,
                        ) -> tuple[float, float, GCNParams]:
    """``(L_E', L_C, grad of L_E' + L_C)``; with ``ablate_lc`` the L_C term is 0 and skipped."""
    le, g = backward(params, x, a_expected, batch.le_terms(), ax_expected)
    if ablate_lc:
        return le, 0.0, g
    lc, gc = backward(params, x, a_observed, batch.lc_terms(), ax_observed)
    return le, lc, GCNParams(g.w1 + gc.w1, g.w2 + gc.w2)
