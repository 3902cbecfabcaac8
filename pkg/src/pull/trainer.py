"""The PULL outer/inner training loop and the GCN+CE baseline."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, NumericError
from .expectation import (ExpectationConfig, approximate_topk, approximate_weighted_sample,
                          expected_weights, k_update)
from .gcn import AdamState, GCNParams, PairBatch, adam_step, backward, forward, init_params, propagate, score
from .graph import Graph, WeightedGraph, candidate_pairs, normalized_adjacency
from .losses import sample_loss_batch, total_loss_and_grad
from .metrics import auprc, auroc
from .rng import derive_rng
from .splitter import Split, sample_pairs_excluding

log = logging.getLogger(__name__)

APPROX_MODES = ("topk", "sample")


@dataclass
class TrainConfig:
    inner_epochs: int = 200
    max_outer: int = 10
    lr: float = 0.01
    hidden: int = 16
    r: float = 0.05
    m: int = 100
    seed: int = 0
    ablate_lc: bool = False
    approx: str = "topk"
    early_stop: bool = True
    reset_optimizer: bool = False
    # GCN+CE baseline
    max_epochs: int = 2000
    patience: int = 20
    min_epoch: int = 500

    def __post_init__(self):
        for name in ("inner_epochs", "max_outer", "hidden", "m", "max_epochs", "patience"):
            if getattr(self, name) < 1:
                raise ArgumentError(f"{name} must be positive")
        if self.lr <= 0 or self.r <= 0:
            raise ArgumentError("lr and r must be positive")
        if self.min_epoch < 0:
            raise ArgumentError("min_epoch must be non-negative")
        if self.approx not in APPROX_MODES:
            raise ArgumentError(f"approx must be one of {APPROX_MODES}")


@dataclass
class HistoryRow:
    iteration: int
    k: float
    num_selected: int
    loss_le_prime: float
    loss_lc: float
    valid_auroc: float
    valid_auprc: float


CSV_FIELDS = ("iteration", "K", "num_selected", "loss_le_prime", "loss_lc", "valid_auroc", "valid_auprc")


@dataclass
class TrainHistory:
    label: str
    rows: list[HistoryRow] = field(default_factory=list)
    final_k: float | None = None
    best_iteration: int | None = None
    stop_reason: str = ""
    epoch_losses: list[float] = field(default_factory=list)
    epoch_valid_auroc: list[float] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_FIELDS) + "\n")
        for r in self.rows:
            vals = (r.iteration, r.k, r.num_selected, r.loss_le_prime, r.loss_lc, r.valid_auroc, r.valid_auprc)
            buf.write(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in vals) + "\n")
        return buf.getvalue()

    def curve_csv(self) -> str:
        buf = io.StringIO()
        buf.write("epoch,loss,valid_auroc\n")
        for i, (loss, auc) in enumerate(zip(self.epoch_losses, self.epoch_valid_auroc), start=1):
            buf.write(f"{i},{loss!r},{auc!r}\n")
        return buf.getvalue()


@dataclass
class PullResult:
    params: GCNParams
    expected_graph: WeightedGraph
    history: TrainHistory


@dataclass
class BaselineResult:
    params: GCNParams
    history: TrainHistory
    best_epoch: int


def evaluate_checkpoint(params: GCNParams, x, prop_graph: WeightedGraph, pairs, labels) -> dict[str, float]:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        raise ArgumentError("evaluation set is empty")
    h = forward(params, x, normalized_adjacency(prop_graph))
    s = score(h, pairs[:, 0], pairs[:, 1])
    return {"auroc": auroc(s, labels), "auprc": auprc(s, labels)}


def _eval_with(params, a, ax, pairs, labels):
    h = forward(params, None, a, ax)
    s = score(h, pairs[:, 0], pairs[:, 1])
    return auroc(s, labels), auprc(s, labels)


def train_pull(graph: Graph, x, split: Split | None, cfg: TrainConfig) -> PullResult:
    """Alternate expectation and inner optimisation until the outer budget is
    spent or validation AUROC falls below the previous iteration's.

    Returns the parameters and approximated graph of the best-validation
    iteration (earliest on ties).  Without validation pairs, the last
    iteration is kept and no early stop happens.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != graph.num_nodes:
        raise ArgumentError("feature rows do not match the node count")
    label = "pull-ws" if cfg.approx == "sample" else ("pull-no-lc" if cfg.ablate_lc else "pull")
    history = TrainHistory(label)

    valid_pairs, valid_labels = split.eval_set("valid") if split is not None else (np.empty((0, 2)), np.empty(0))
    valid_pairs = valid_pairs.astype(np.int64)
    has_valid = len(valid_pairs) > 0 and 0 < valid_labels.sum() < len(valid_labels)

    m = min(cfg.m, graph.num_nodes) if graph.num_nodes else 1
    ecfg = ExpectationConfig(r=cfg.r, m=m, k=float(graph.num_edges))
    cands = candidate_pairs(graph, m)

    observed = WeightedGraph.from_graph(graph)
    a_obs = normalized_adjacency(observed)
    ax_obs = propagate(a_obs, x)

    theta_new = init_params(cfg.seed, x.shape[1], cfg.hidden)
    prop, a_prop = observed, a_obs
    best = None
    prev_auc = None
    state = AdamState.zeros_like(theta_new, cfg.lr)
    try:
        for t in range(cfg.max_outer):
            theta = theta_new
            table = expected_weights(theta, x, graph, prop, cands, a=a_prop)
            if cfg.approx == "sample":
                g_bar, sel, sel_w = approximate_weighted_sample(table, ecfg.k, (cfg.seed, "ws", t))
            else:
                g_bar, sel, sel_w = approximate_topk(table, ecfg.k)
            k_used = ecfg.k
            k_update(ecfg, graph.num_edges)

            a_exp = normalized_adjacency(g_bar)
            ax_exp = propagate(a_exp, x)
            params = theta.copy()
            if cfg.reset_optimizer:
                state = AdamState.zeros_like(params, cfg.lr)
            le = lc = math.nan
            for epoch in range(cfg.inner_epochs):
                batch = sample_loss_batch(graph, sel, sel_w, derive_rng(cfg.seed, "epoch", t, epoch))
                le, lc, grads = total_loss_and_grad(params, x, a_exp, a_obs, batch, cfg.ablate_lc,
                                                    ax_expected=ax_exp, ax_observed=ax_obs)
                params, state = adam_step(params, grads, state)
            theta_new = params
            prop, a_prop = g_bar, a_exp

            if has_valid:
                v_auc, v_ap = _eval_with(params, a_exp, ax_exp, valid_pairs, valid_labels)
            else:
                v_auc = v_ap = math.nan
            history.rows.append(HistoryRow(t, k_used, len(sel), float(le), float(lc), v_auc, v_ap))
            log.info("outer %d: K=%.2f selected=%d L_E'=%.4f L_C=%.4f valid AUROC=%.4f",
                     t, k_used, len(sel), le, lc, v_auc)

            if best is None or not has_valid or v_auc > best[0]:
                best = (v_auc, t, params, g_bar)
            if cfg.early_stop and has_valid and prev_auc is not None and v_auc < prev_auc:
                history.stop_reason = "valid-auroc-drop"
                break
            prev_auc = v_auc
        else:
            history.stop_reason = "max-outer"
    except NumericError as exc:
        history.stop_reason = "numeric-failure"
        history.final_k = ecfg.k
        exc.history = history
        raise
    history.final_k = ecfg.k
    history.best_iteration = best[1]
    return PullResult(best[2], best[3], history)


class EarlyStopper:
    """Patience-based stopping that never fires before ``min_epoch``."""

    def __init__(self, patience: int, min_epoch: int):
        self.patience = patience
        self.min_epoch = min_epoch
        self.best = -math.inf
        self.best_epoch = 0

    def update(self, epoch: int, value: float) -> bool:
        """Record ``value`` for ``epoch`` (1-based); return True to stop."""
        if value > self.best:
            self.best = value
            self.best_epoch = epoch
            return False
        return epoch >= self.min_epoch and epoch - self.best_epoch >= self.patience


def train_baseline_gcn_ce(graph: Graph, x, split: Split | None, cfg: TrainConfig) -> BaselineResult:
    """GCN + cross-entropy with |E_P| fresh random non-edges every epoch."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != graph.num_nodes:
        raise ArgumentError("feature rows do not match the node count")
    history = TrainHistory("gcn-ce")
    valid_pairs, valid_labels = split.eval_set("valid") if split is not None else (np.empty((0, 2)), np.empty(0))
    valid_pairs = valid_pairs.astype(np.int64)
    has_valid = len(valid_pairs) > 0 and 0 < valid_labels.sum() < len(valid_labels)

    a = normalized_adjacency(WeightedGraph.from_graph(graph))
    ax = propagate(a, x)
    params = init_params(cfg.seed, x.shape[1], cfg.hidden)
    state = AdamState.zeros_like(params, cfg.lr)
    stopper = EarlyStopper(cfg.patience, cfg.min_epoch)
    best_params, best_epoch = params, 0
    pos = PairBatch.of(graph.edges, np.ones(graph.num_edges))
    n = graph.num_nodes
    try:
        for epoch in range(1, cfg.max_epochs + 1):
            neg_ids = sample_pairs_excluding(n, graph.num_edges, derive_rng(cfg.seed, "baseline", epoch),
                                             graph.edge_ids)
            neg = np.stack([neg_ids // n, neg_ids % n], axis=1)
            batch = PairBatch.concat([pos, PairBatch.of(neg, np.zeros(len(neg)))])
            loss, grads = backward(params, x, a, batch, ax)
            params, state = adam_step(params, grads, state)
            history.epoch_losses.append(float(loss))
            if not has_valid:
                history.epoch_valid_auroc.append(math.nan)
                best_params, best_epoch = params, epoch
                continue
            v_auc, _ = _eval_with(params, a, ax, valid_pairs, valid_labels)
            history.epoch_valid_auroc.append(v_auc)
            improved = v_auc > stopper.best
            stop = stopper.update(epoch, v_auc)
            if improved:
                best_params, best_epoch = params, epoch
            if stop:
                history.stop_reason = "patience"
                break
        else:
            history.stop_reason = "max-epochs"
    except NumericError as exc:
        history.stop_reason = "numeric-failure"
        exc.history = history
        raise
    history.best_iteration = best_epoch
    return BaselineResult(best_params, history, best_epoch)
