import numpy as np
import pytest

from pull.gcn import init_params
from pull.graph import Graph, WeightedGraph, candidate_pairs, normalized_adjacency
from pull.losses import LossBatch


def random_graph(rng, n, p=0.4):
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    return Graph(n, np.stack([iu[keep], ju[keep]], axis=1))


def random_loss_instance(seed):
    """Small graph, features, params, an expanded graph and a full loss batch."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 9))
    g = random_graph(rng, n, 0.35)
    while g.num_edges < 2 or g.num_nonedges() < g.num_edges + 3:
        g = random_graph(rng, n, 0.35)
    d = int(rng.integers(2, 5))
    x = rng.standard_normal((n, d))
    params = init_params(int(rng.integers(1 << 30)), d, int(rng.integers(2, 6)))
    cands = candidate_pairs(g, n)
    k_sel = int(rng.integers(0, min(3, len(cands)) + 1))
    sel_idx = np.sort(rng.choice(len(cands), size=k_sel, replace=False))
    sel = cands[sel_idx]
    sel_w = rng.uniform(0.05, 0.95, size=k_sel)
    rest = np.delete(cands, sel_idx, axis=0)
    neg = rest[rng.choice(len(rest), size=min(len(rest), g.num_edges + k_sel), replace=False)]
    corr = rest[rng.choice(len(rest), size=g.num_edges, replace=False)]
    batch = LossBatch(g.edges, sel, sel_w, neg, corr)
    g_bar = WeightedGraph(n, np.concatenate([g.edges, sel]), np.concatenate([np.ones(g.num_edges), sel_w]))
    a_exp = normalized_adjacency(g_bar)
    a_obs = normalized_adjacency(WeightedGraph.from_graph(g))
    return dict(graph=g, x=x, params=params, batch=batch, a_exp=a_exp, a_obs=a_obs, g_bar=g_bar)


@pytest.fixture
def path3():
    return Graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def triangle():
    return Graph(3, [(0, 1), (1, 2), (0, 2)])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
