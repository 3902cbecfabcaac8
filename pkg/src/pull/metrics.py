"""AUROC and average precision with explicit tie handling."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import ArgumentError


def _as_arrays(scores, labels):
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if len(s) != len(y):
        raise ArgumentError("scores and labels differ in length")
    if not np.all((y == 0) | (y == 1)):
        raise ArgumentError("labels must be 0 or 1")
    return s, y.astype(bool)


def auroc(scores, labels) -> float:
    """Mann-Whitney AUROC; tied scores get their average rank."""
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ArgumentError("AUROC needs at least one positive and one negative")
    ranks = rankdata(s, method="average")
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def auprc(scores, labels) -> float:
    """Average precision, sum over thresholds of (R_k - R_{k-1}) P_k.

    Tied scores form one threshold, so the whole tie group enters at once.
    """
    s, y = _as_arrays(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ArgumentError("average precision needs at least one positive")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of every tie group in descending-score order
    ends = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    tp = np.cumsum(y)[ends]
    seen = ends + 1
    precision = tp / seen
    recall = tp / n_pos
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


def ranking_metrics(scores, labels) -> dict[str, float]:
    return {"auroc": auroc(scores, labels), "auprc": auprc(scores, labels)}
