"""Brute-force enumeration over latent edge states for tiny graphs.

Every unlabeled pair gets a binary latent variable; the joint probability
of a state is the product of the pairs' node potentials.  Enumerating all
``2^|E_U|`` states gives independent reference values for the normaliser,
the expected adjacency, and the expected complete-data log likelihood, which
the fast code paths compute in closed form.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError
from .expectation import NodePotentialTable, expected_weights
from .gcn import forward, init_params, score
from .graph import Graph, WeightedGraph, candidate_pairs, normalized_adjacency
from .losses import loss_le_full
from .prob import clamp
from .rng import derive_rng

MAX_UNLABELED = 20


def _latent_potentials(potentials) -> np.ndarray:
    if isinstance(potentials, NodePotentialTable):
        return np.asarray(potentials.candidate_weights, dtype=np.float64)
    return np.asarray(potentials, dtype=np.float64).reshape(-1)


def enumerate_states(k: int) -> np.ndarray:
    """All ``2^k`` assignments as a ``(2^k, k)`` 0/1 array; column 0 is the lowest bit."""
    if k > MAX_UNLABELED:
        raise CapacityError(f"{k} unlabeled pairs exceeds the enumeration cap of {MAX_UNLABELED}")
    codes = np.arange(1 << k, dtype=np.int64)
    return ((codes[:, None] >> np.arange(k)) & 1).astype(np.uint8)


def enumerate_distribution(potentials) -> tuple[np.ndarray, np.ndarray]:
    """States and their probabilities ``prod phi(z_ij)`` over the unlabeled pairs."""
    phi = _latent_potentials(potentials)
    z = enumerate_states(len(phi))
    factors = np.where(z == 1, phi, 1.0 - phi)
    probs = np.ones(len(z))
    for col in range(len(phi)):
        probs *= factors[:, col]
    return z, probs


def check_lemma1(potentials) -> float:
    """Largest deviation from 1 of the total mass and of every conditional mass.

    The conditional mass for pair ij sums the product of the other pairs'
    potentials over states with ``z_ij = 1``.
    """
    phi = _latent_potentials(potentials)
    z, probs = enumerate_distribution(phi)
    residual = abs(probs.sum() - 1.0)
    for col in range(len(phi)):
        on = z[:, col] == 1
        others = np.ones(int(on.sum()))
        zs = z[on]
        for c in range(len(phi)):
            if c != col:
                others *= np.where(zs[:, c] == 1, phi[c], 1.0 - phi[c])
        residual = max(residual, abs(others.sum() - 1.0))
    return float(residual)


def brute_expected_adjacency(table: NodePotentialTable) -> np.ndarray:
    """Dense ``sum_z p(z) A(z)``.  ``table`` must list every unlabeled pair."""
    n = table.num_nodes
    z, probs = enumerate_distribution(table)
    out = np.zeros((n, n))
    for i, j in table.observed_pairs:
        out[i, j] = out[j, i] = probs.sum()
    for col, (i, j) in enumerate(table.candidate_pairs):
        out[i, j] = out[j, i] = probs[z[:, col] == 1].sum()
    return out


def brute_q(potentials, yhat_observed, yhat_unlabeled) -> float:
    """Expected log likelihood ``sum_z p(z) log p(E_P, z)`` under the factorised model."""
    phi = _latent_potentials(potentials)
    z, probs = enumerate_distribution(phi)
    y_obs = clamp(yhat_observed)
    y_unl = clamp(yhat_unlabeled)
    log_on = np.log(y_unl)
    log_off = np.log1p(-y_unl)
    per_state = np.log(y_obs).sum() + np.where(z == 1, log_on, log_off).sum(axis=1)
    return float(np.dot(probs, per_state))


def random_instance(rng: np.random.Generator, max_unlabeled: int = 12):
    """A random small graph whose complement has at most ``max_unlabeled`` pairs."""
    while True:
        n = int(rng.integers(3, 7))
        total = n * (n - 1) // 2
        min_edges = max(0, total - max_unlabeled)
        e = int(rng.integers(min_edges, total + 1))
        iu, ju = np.triu_indices(n, 1)
        pick = np.sort(rng.choice(total, size=e, replace=False))
        return Graph(n, np.stack([iu[pick], ju[pick]], axis=1))


def _instance_report(seed: int, trial: int, perturb: float = 0.0) -> list[dict]:
    rng = derive_rng(seed, "oracle", trial)
    g = random_instance(rng)
    d = int(rng.integers(1, 4))
    x = rng.standard_normal((g.num_nodes, d))
    theta = init_params(int(rng.integers(1 << 31)), d, 4)
    theta_new = init_params(int(rng.integers(1 << 31)), d, 4)
    cands = candidate_pairs(g, g.num_nodes)
    wg = WeightedGraph.from_graph(g)
    table = expected_weights(theta, x, g, wg, cands)
    if perturb:
        table = NodePotentialTable(table.num_nodes, table.pairs,
                                   np.where(table.observed, 1.0, np.clip(table.weights + perturb, 1e-6, 1 - 1e-6)),
                                   table.observed)
    desc = f"trial={trial} N={g.num_nodes} |E_P|={g.num_edges} |E_U|={len(cands)}"

    lemma = check_lemma1(table)

    fast = expected_weights(theta, x, g, wg, cands)
    brute = brute_expected_adjacency(table)
    adj_res = float(max((abs(brute[i, j] - w) for (i, j), w in zip(fast.pairs, fast.weights)), default=0.0))

    h_new = forward(theta_new, x, normalized_adjacency(wg))
    y_obs = score(h_new, g.edges[:, 0], g.edges[:, 1])
    y_unl = score(h_new, cands[:, 0], cands[:, 1]) if len(cands) else np.empty(0)
    q = brute_q(table, y_obs, y_unl)
    le = loss_le_full(y_obs, y_unl, fast.candidate_weights, np.empty(0))
    q_res = abs(q + le)

    return [
        {"check": "lemma1", "instance": desc, "residual": lemma, "tolerance": 1e-9},
        {"check": "expected_adjacency", "instance": desc, "residual": adj_res, "tolerance": 1e-12},
        {"check": "q_equals_neg_le", "instance": desc, "residual": q_res, "tolerance": 1e-9},
    ]


def run_checks(seed: int = 0, trials: int = 20, perturb: float = 0.0) -> list[dict]:
    """Run all identity checks on ``trials`` random tiny instances.

    ``perturb`` shifts the potentials fed to the brute-force side only; any
    non-zero value should make the adjacency and Q checks fail.
    """
    rows = []
    for t in range(trials):
        rows.extend(_instance_report(seed, t, perturb))
    for row in rows:
        row["passed"] = bool(row["residual"] < row["tolerance"])
    return rows
