from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynwalk.errors import EmptyGraph, InvalidDelta, ParseError, SelfLoop, UnknownVertex
from dynwalk.graph import (
    DynamicGraph,
    GraphDelta,
    IdMap,
    affected_vertices,
    apply_delta,
    degree,
    density,
    largest_connected_component,
    load_edge_list,
    neighbors,
    read_edge_pairs,
    write_edge_list,
)
from dynwalk.stream import random_churn_delta

from conftest import A, B, C, D, random_graph_edges


def bfs_lcc(g):
    """Independent oracle: plain BFS over adjacency, tie -> smallest id."""
    seen = set()
    best = None
    for s in sorted(g.adjacency):
        if s in seen:
            continue
        comp = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in g.adjacency[u]:
                if w not in comp:
                    comp.add(w)
                    q.append(w)
        seen |= comp
        if best is None or len(comp) > len(best):
            best = comp
    return best


def test_apply_fig1_delta(fig1a, fig1_delta):
    g2 = apply_delta(fig1a, fig1_delta)
    assert g2.edge_set() == {(A, B), (B, C), (B, D)}
    assert g2.snapshot_index == fig1a.snapshot_index + 1
    assert g2.degree(B) == 3
    # input snapshot untouched
    assert fig1a.edge_set() == {(A, B), (B, C)}
    assert D not in fig1a


def test_empty_delta_is_identity(fig1a):
    g2 = apply_delta(fig1a, GraphDelta())
    assert g2.edge_set() == fig1a.edge_set()
    assert g2.vertices == fig1a.vertices
    assert g2.snapshot_index == 1


def test_vertex_deletion_drops_incident_edges(fig1a):
    g2 = apply_delta(fig1a, GraphDelta(deleted_vertices={B}))
    assert g2.vertices == {A, C}
    assert g2.num_edges == 0
    assert B in g2.retired


@pytest.mark.parametrize(
    "delta",
    [
        GraphDelta(deleted_vertices={9}),
        GraphDelta(deleted_edges={(A, C)}),
        GraphDelta(added_edges={(A, 9)}),
        GraphDelta(added_edges={(A, B)}),
        GraphDelta(added_vertices={A}),
        GraphDelta(added_vertices={5}, deleted_vertices={5}),
        GraphDelta(added_edges={(A, C)}, deleted_edges={(A, C)}),
        GraphDelta(added_edges={(A, C)}, deleted_vertices={C}),
    ],
)
def test_invalid_deltas(fig1a, delta):
    with pytest.raises(InvalidDelta):
        apply_delta(fig1a, delta)


def test_retired_ids_not_reused(fig1a):
    g2 = apply_delta(fig1a, GraphDelta(deleted_vertices={C}))
    with pytest.raises(InvalidDelta):
        apply_delta(g2, GraphDelta(added_vertices={C}))


def test_affected_vertices(fig1a, fig1_delta):
    assert affected_vertices(fig1_delta) == {B, D}
    assert affected_vertices(GraphDelta()) == set()
    assert affected_vertices(GraphDelta(deleted_edges={(A, B)}, deleted_vertices={A})) == {B}
    # implicit incident edges count when the old graph is supplied
    assert affected_vertices(GraphDelta(deleted_vertices={B}), fig1a) == {A, C}


def test_lcc_examples():
    g = DynamicGraph([0, 1, 2, 3], [(0, 1), (1, 2)])
    assert largest_connected_component(g) == {0, 1, 2}
    g = DynamicGraph([0, 1, 2, 3], [(0, 1), (2, 3)])
    assert largest_connected_component(g) == {0, 1}
    g = DynamicGraph([5, 6, 1, 2], [(5, 6), (1, 2)])
    assert largest_connected_component(g) == {1, 2}
    with pytest.raises(EmptyGraph):
        largest_connected_component(DynamicGraph())


def test_lcc_matches_bfs_oracle(rng):
    for trial in range(30):
        n = int(rng.integers(2, 60))
        m = int(rng.integers(0, n * 2))
        m = min(m, n * (n - 1) // 2)
        g = DynamicGraph(range(n), random_graph_edges(n, m, rng))
        if trial % 3 == 0 and n > 3:
            # non-contiguous live ids
            g = apply_delta(g, GraphDelta(deleted_vertices={1, n - 2}))
        lcc = largest_connected_component(g)
        oracle = bfs_lcc(g)
        assert len(lcc) == len(oracle)
        assert lcc == oracle


def test_degree_neighbors_density(fig1a, fig1_delta):
    g2 = apply_delta(fig1a, fig1_delta)
    assert degree(g2, B) == 3
    assert neighbors(g2, B) == [A, C, D]
    assert density(DynamicGraph([0])) == 0.0
    assert density(fig1a) == pytest.approx(2 * 2 / (3 * 2))
    with pytest.raises(UnknownVertex):
        degree(g2, 42)
    with pytest.raises(UnknownVertex):
        neighbors(g2, 42)


def test_load_edge_list_basic_and_dedup():
    g = load_edge_list("0 1\n1 2")
    assert g.edge_set() == {(0, 1), (1, 2)}
    g = load_edge_list("0 1\n1 0\n0 1")
    assert g.edge_set() == {(0, 1)}
    g = load_edge_list("# comment\n\n3 1\n")
    assert g.vertices == {0, 1}  # labels 1, 3 ranked to dense ids


def test_load_edge_list_errors():
    with pytest.raises(SelfLoop) as e:
        load_edge_list("0 1\n2 2\n")
    assert e.value.line == 2
    with pytest.raises(ParseError) as e:
        load_edge_list("0 1\n7\n")
    assert e.value.line == 2


def test_string_labels_and_idmap_roundtrip(tmp_path):
    edges, ids = read_edge_pairs("x y\ny z\n")
    assert edges == [(0, 1), (1, 2)]
    ids.write(tmp_path / "ids.txt")
    again = IdMap.read(tmp_path / "ids.txt")
    assert again.labels == ["x", "y", "z"]


def test_edge_list_roundtrip(tmp_path, rng):
    ring = [(i, (i + 1) % 30) for i in range(30)]
    g = DynamicGraph(range(30), ring + random_graph_edges(30, 60, rng))
    write_edge_list(g, tmp_path / "e.txt")
    g2 = load_edge_list(tmp_path / "e.txt")
    assert g2.edge_set() == g.edge_set()


def _check_symmetric(g):
    for u, nb in g.adjacency.items():
        assert u not in nb
        for v in nb:
            assert u in g.adjacency[v]
    assert g.num_edges == sum(len(nb) for nb in g.adjacency.values()) // 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_delta_sequences_keep_graph_symmetric(seed):
    rng = np.random.default_rng(seed)
    g = DynamicGraph(range(8), random_graph_edges(8, 10, rng))
    for _ in range(15):
        d = random_churn_delta(g, rng)
        aff = affected_vertices(d, g)
        g2 = apply_delta(g, d)
        _check_symmetric(g2)
        assert not (aff & d.deleted_vertices)
        assert aff <= g2.vertices
        g = g2


def test_disjoint_deltas_compose(rng):
    g = DynamicGraph(range(10), random_graph_edges(10, 12, rng))
    free = [(u, v) for u in range(10) for v in range(u + 1, 10) if not g.has_edge(u, v)]
    d1 = GraphDelta(added_edges={free[0]}, added_vertices={10})
    d2 = GraphDelta(added_edges={free[1], (3, 11)}, added_vertices={11})
    merged = GraphDelta(added_edges=d1.added_edges | d2.added_edges,
                        added_vertices=d1.added_vertices | d2.added_vertices)
    two = apply_delta(apply_delta(g, d1), d2)
    one = apply_delta(g, merged)
    assert two.edge_set() == one.edge_set()
    assert two.vertices == one.vertices
