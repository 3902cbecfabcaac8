"""Two-layer GCN encoder with a sigmoid dot-product decoder.

    H = A relu(A X W1) W2,    f(i, j) = sigmoid(h_i . h_j)

Gradients are derived by hand; ``A`` is always a symmetric CSR operator from
:func:`pull.graph.normalized_adjacency`, so ``A.T`` is replaced by ``A``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError, NumericError
from .prob import bce_sum, sigmoid
from .rng import derive_rng

HIDDEN = 16


@dataclass
class GCNParams:
    w1: np.ndarray
    w2: np.ndarray
    seed: int | None = None

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    def arrays(self) -> list[np.ndarray]:
        return [self.w1, self.w2]

    def copy(self) -> "GCNParams":
        return GCNParams(self.w1.copy(), self.w2.copy(), self.seed)

    def to_json(self) -> str:
        # json writes floats with repr(), the shortest string that round-trips
        doc = {
            "hidden": self.hidden,
            "seed": self.seed,
            "w1": {"shape": list(self.w1.shape), "data": self.w1.ravel().tolist()},
            "w2": {"shape": list(self.w2.shape), "data": self.w2.ravel().tolist()},
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GCNParams":
        doc = json.loads(text)
        w1 = np.asarray(doc["w1"]["data"], dtype=np.float64).reshape(doc["w1"]["shape"])
        w2 = np.asarray(doc["w2"]["data"], dtype=np.float64).reshape(doc["w2"]["shape"])
        return cls(w1, w2, doc.get("seed"))


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_params(seed: int, d: int, h: int = HIDDEN) -> GCNParams:
    if d < 1 or h < 1:
        raise ArgumentError("feature and hidden widths must be positive")
    rng = derive_rng(seed, "init")
    return GCNParams(glorot(rng, d, h), glorot(rng, h, h), int(seed))


def _check(x: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {what}")
    return x


def propagate(a: sp.csr_matrix, x: np.ndarray) -> np.ndarray:
    """``A @ X`` as a dense array; cache this per operator, it never changes."""
    if a.shape[1] != x.shape[0]:
        raise ArgumentError(f"operator is {a.shape} but features have {x.shape[0]} rows")
    return np.asarray(a @ x)


def _layers(params, x, a, ax):
    if ax is None:
        ax = propagate(a, np.asarray(x, dtype=np.float64))
    if ax.shape[1] != params.w1.shape[0]:
        raise ArgumentError(f"features have {ax.shape[1]} columns, W1 expects {params.w1.shape[0]}")
    z1 = ax @ params.w1
    r = np.maximum(z1, 0.0)
    ar = a @ r
    h = ar @ params.w2
    return ax, z1, ar, _check(h, "embeddings")


def forward(params: GCNParams, x, a: sp.csr_matrix, ax: np.ndarray | None = None) -> np.ndarray:
    """Node embeddings ``H`` (N x h)."""
    return _layers(params, x, a, ax)[3]


def logits(h: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.einsum("ij,ij->i", h[pairs[:, 0]], h[pairs[:, 1]])


def score(h: np.ndarray, i, j):
    """Linking probability ``sigmoid(h_i . h_j)``; vectorised over index arrays."""
    i = np.asarray(i)
    j = np.asarray(j)
    # h_i * h_j is commutative elementwise, so score(i, j) == score(j, i) bitwise
    s = np.sum(h[i] * h[j], axis=-1)
    return sigmoid(s)


@dataclass
class PairBatch:
    """Weighted BCE terms: ``sum_k weight_k * BCE(label_k, f(pair_k))``."""

    pairs: np.ndarray
    labels: np.ndarray
    weights: np.ndarray

    @classmethod
    def of(cls, pairs, labels, weights=None) -> "PairBatch":
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        labels = np.asarray(labels, dtype=np.float64).reshape(-1)
        if weights is None:
            weights = np.ones(len(pairs))
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        if not (len(pairs) == len(labels) == len(weights)):
            raise ArgumentError("pairs, labels and weights differ in length")
        if np.any(labels < 0) or np.any(labels > 1):
            raise ArgumentError("labels must lie in [0, 1]")
        return cls(pairs, labels, weights)

    @classmethod
    def concat(cls, batches) -> "PairBatch":
        batches = list(batches)
        return cls(np.concatenate([b.pairs for b in batches]).reshape(-1, 2),
                   np.concatenate([b.labels for b in batches]),
                   np.concatenate([b.weights for b in batches]))

    def __len__(self):
        return len(self.pairs)


def backward(params: GCNParams, x, a: sp.csr_matrix, batch: PairBatch,
             ax: np.ndarray | None = None) -> tuple[float, GCNParams]:
    """Loss value and exact gradients w.r.t. ``W1`` and ``W2``."""
    ax, z1, ar, h = _layers(params, x, a, ax)
    n = h.shape[0]
    s = logits(h, batch.pairs)
    p = sigmoid(s)
    loss = bce_sum(p, batch.labels, batch.weights)
    g = batch.weights * (p - batch.labels)
    u, v = batch.pairs[:, 0], batch.pairs[:, 1]
    # dL/dH = (G + G^T) H with G holding g at (u, v); coo->csr sums duplicates in fixed order
    gm = sp.csr_matrix((np.concatenate([g, g]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                       shape=(n, n))
    dh = np.asarray(gm @ h)
    dw2 = ar.T @ dh
    dr = np.asarray(a @ (dh @ params.w2.T))
    dz1 = dr * (z1 > 0)
    dw1 = ax.T @ dz1
    return loss, GCNParams(_check(dw1, "W1 gradient"), _check(dw2, "W2 gradient"))


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: GCNParams, lr: float = 0.01) -> "AdamState":
        return cls([np.zeros_like(w) for w in params.arrays()],
                   [np.zeros_like(w) for w in params.arrays()], 0, lr)


def adam_step(params: GCNParams, grads: GCNParams, state: AdamState) -> tuple[GCNParams, AdamState]:
    """One bias-corrected Adam update; inputs are not modified."""
    t = state.t + 1
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    new_w, new_m, new_v = [], [], []
    for w, g, m, v in zip(params.arrays(), grads.arrays(), state.m, state.v):
        if w.shape != g.shape or m.shape != w.shape:
            raise ArgumentError("gradient or moment shape does not match parameters")
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        new_w.append(w - state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps))
        new_m.append(m)
        new_v.append(v)
    out = GCNParams(new_w[0], new_w[1], params.seed)
    return out, AdamState(new_m, new_v, t, state.lr, state.beta1, state.beta2, state.eps)
