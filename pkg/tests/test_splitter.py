import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pull.errors import ArgumentError, CapacityError
from pull.graph import Graph
from pull.splitter import Split, check_split, sample_nonedges, sample_pairs_excluding, split

from conftest import random_graph


def ten_edge_graph():
    return Graph(8, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 7), (1, 5)])


def test_split_counts_follow_floor():
    g = ten_edge_graph()
    sp = split(g, 0.2, 0.1, seed=3)
    assert (len(sp.test_missing), len(sp.valid_missing), len(sp.train_edges)) == (2, 1, 7)
    assert len(sp.test_neg) == 2 and len(sp.valid_neg) == 1
    check_split(sp, g)


def test_split_zero_ratios():
    g = ten_edge_graph()
    sp = split(g, 0.0, 0.0, seed=0)
    assert np.array_equal(sp.train_edges, g.edges)
    assert all(len(getattr(sp, k)) == 0 for k in ("valid_missing", "valid_neg", "test_missing", "test_neg"))


def test_split_deterministic():
    g = ten_edge_graph()
    assert split(g, 0.2, 0.1, 5).to_json() == split(g, 0.2, 0.1, 5).to_json()
    assert split(g, 0.2, 0.1, 5).to_json() != split(g, 0.2, 0.1, 6).to_json()


@pytest.mark.parametrize("r_m,r_valid", [(-0.1, 0.1), (1.0, 0.0), (0.6, 0.5), (0.5, 0.45)])
def test_split_rejects_bad_ratios(r_m, r_valid):
    with pytest.raises(ArgumentError):
        split(ten_edge_graph(), r_m, r_valid, 0)


def test_split_json_roundtrip():
    sp = split(ten_edge_graph(), 0.2, 0.1, 1)
    doc = json.loads(sp.to_json())
    assert set(doc) >= {"train_edges", "valid_missing", "valid_neg", "test_missing", "test_neg", "seed", "r_m", "r_valid"}
    back = Split.from_json(sp.to_json())
    assert back.to_json() == sp.to_json()


def test_split_invariants_over_100_seeds():
    rng = np.random.default_rng(0)
    for seed in range(100):
        g = random_graph(rng, int(rng.integers(8, 16)), 0.3)
        if g.num_edges < 5:
            continue
        sp = split(g, 0.2, 0.1, seed)
        check_split(sp, g)


def test_sample_nonedges_examples():
    with pytest.raises(CapacityError):
        sample_nonedges(Graph(3, [(0, 1), (1, 2), (0, 2)]), 1, seed=0)
    out = sample_nonedges(Graph(3, [(0, 1)]), 2, seed=0)
    assert sorted(map(tuple, out.tolist())) == [(0, 2), (1, 2)]
    assert sample_nonedges(Graph(3, [(0, 1)]), 0, seed=0).shape == (0, 2)


def test_sample_nonedges_respects_exclude():
    g = Graph(4, [(0, 1)])
    out = sample_nonedges(g, 3, seed=2, exclude=[(2, 3), (1, 3)])
    assert sorted(map(tuple, out.tolist())) == [(0, 2), (0, 3), (1, 2)]
    with pytest.raises(CapacityError):
        sample_nonedges(g, 4, seed=2, exclude=[(2, 3), (1, 3)])


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 400), seed=st.integers(0, 1000), frac=st.floats(0.0, 1.0))
def test_sample_pairs_excluding_distinct_and_valid(n, seed, frac):
    total = n * (n - 1) // 2
    rng = np.random.default_rng(seed)
    k_ex = int(rng.integers(0, total + 1)) // 2
    iu, ju = np.triu_indices(n, 1)
    all_ids = iu.astype(np.int64) * n + ju
    excluded = np.sort(rng.choice(all_ids, size=k_ex, replace=False))
    count = int(frac * (total - k_ex))
    out = sample_pairs_excluding(n, count, np.random.default_rng(seed), excluded)
    assert len(out) == count == len(np.unique(out))
    assert not np.any(np.isin(out, excluded))
    i, j = out // n, out % n
    assert np.all(i < j) and np.all(j < n)
