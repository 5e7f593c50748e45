import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_graph, simple_paths
from signtrust.egonet import EgoEdge, build_all_egonets, build_egonet, infer_path_sign
from signtrust.graph import SignedDigraph

sign_lists = st.lists(st.sampled_from([1, -1]), min_size=1, max_size=10)


@pytest.mark.parametrize("signs,expected", [([1, -1], -1), ([-1, -1], 1), ([1], 1), ([-1], -1)])
def test_path_sign_examples(signs, expected):
    assert infer_path_sign(signs) == expected


def test_path_sign_exhaustive():
    for k in range(1, 11):
        for signs in itertools.product((1, -1), repeat=k):
            assert infer_path_sign(signs) == int(np.prod(signs))


@given(sign_lists, sign_lists)
def test_path_sign_parity_composes(xs, ys):
    assert infer_path_sign(xs) * infer_path_sign(ys) == infer_path_sign(xs + ys)


@pytest.mark.parametrize("bad", [[], [0], [1, 2]])
def test_path_sign_rejects(bad):
    with pytest.raises(ValueError):
        infer_path_sign(bad)


def as_triples(ego):
    return sorted((e.neighbor, e.sign, e.path_len) for e in ego.edges)


def test_three_routes_give_three_edges():
    # center 0 reaches 6 via 1, via 2 and via 3-4
    g = SignedDigraph.from_edges(7, [(0, 1, 1), (1, 6, 1), (2, 0, -1), (2, 6, 1), (0, 3, 1),
                                     (4, 3, -1), (4, 6, -1)])
    ego = build_egonet(g, 0, 3)
    to6 = [e for e in ego.edges if e.neighbor == 6]
    assert sorted((e.sign, e.path_len) for e in to6) == [(-1, 2), (1, 2), (1, 3)]
    assert all(not e.is_direct for e in to6)


def test_isolated_node():
    g = SignedDigraph.from_edges(3, [(1, 2, 1)])
    assert build_egonet(g, 0, 3).edges == []


def test_single_edge_both_sides():
    table = build_all_egonets(SignedDigraph.from_edges(2, [(0, 1, 1)]), 3)
    assert table[0].edges == [EgoEdge(1, 1, 1, True)]
    assert table[1].edges == [EgoEdge(0, 1, 1, True)]


def test_direct_edge_overrides_longer_paths():
    g = SignedDigraph.from_edges(3, [(0, 1, 1), (1, 2, -1), (0, 2, 1)])
    ego = build_egonet(g, 0, 3)
    assert as_triples(ego) == [(1, 1, 1), (2, 1, 1)]


def test_conflicting_pair_gives_two_direct_edges():
    g = SignedDigraph.from_edges(3, [(0, 1, 1), (1, 0, -1), (1, 2, 1)])
    assert as_triples(build_egonet(g, 0, 2)) == [(1, -1, 1), (1, 1, 1), (2, -1, 2), (2, 1, 2)]


def test_invalid_arguments():
    g = SignedDigraph.from_edges(2, [(0, 1, 1)])
    with pytest.raises(ValueError):
        build_egonet(g, 5, 2)
    with pytest.raises(ValueError):
        build_egonet(g, 0, 0)


@st.composite
def small_graphs(draw, max_nodes=8):
    n = draw(st.integers(2, max_nodes))
    m = draw(st.integers(0, min(n * (n - 1), 3 * n)))
    return random_graph(np.random.default_rng(draw(st.integers(0, 2**32 - 1))), n, m)


@settings(max_examples=60, deadline=None)
@given(small_graphs(), st.integers(1, 4))
def test_egonet_matches_path_oracle(g, n):
    for c in range(g.node_count):
        assert as_triples(build_egonet(g, c, n)) == simple_paths(g, c, n)


@settings(max_examples=60, deadline=None)
@given(small_graphs(), st.integers(1, 4))
def test_batch_equals_per_node(g, n):
    table = build_all_egonets(g, n, block=3)
    assert len(table) == g.node_count
    for c in range(g.node_count):
        assert Counter(table[c].edges) == Counter(build_egonet(g, c, n).edges)


@settings(max_examples=40, deadline=None)
@given(small_graphs(), st.integers(1, 4))
def test_override_and_hop_bound(g, n):
    for c in range(g.node_count):
        ego = build_egonet(g, c, n)
        direct = {e.neighbor for e in ego.edges if e.is_direct}
        assert all(e.path_len == 1 for e in ego.edges if e.neighbor in direct)
        assert all(1 <= e.path_len <= n for e in ego.edges)
        assert all(e.is_direct == (e.path_len == 1) for e in ego.edges)
        assert all(e.neighbor != c for e in ego.edges)


def test_egonet_order_is_sorted():
    g = random_graph(np.random.default_rng(5), 10, 30)
    table = build_all_egonets(g, 3)
    for c in range(g.node_count):
        keys = [(e.neighbor, e.path_len) for e in table[c].edges]
        assert keys == sorted(keys)


def test_table_compresses_duplicates():
    # two length-2 paths from 0 to 3 with the same sign collapse into one row
    g = SignedDigraph.from_edges(4, [(0, 1, 1), (1, 3, 1), (0, 2, -1), (2, 3, -1)])
    table = build_all_egonets(g, 2)
    rows = [(int(n), int(s), int(p), int(k)) for c, n, s, p, k in
            zip(table.center, table.neighbor, table.sign, table.path_len, table.count) if c == 0]
    assert (3, 1, 2, 2) in rows
    assert table.total_edges() == sum(len(table[c].edges) for c in range(4))
