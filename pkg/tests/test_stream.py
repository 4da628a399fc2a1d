import csv
import json

import numpy as np
import pytest

from dynwalk.datasets import from_graph
from dynwalk.embed import TrainConfig
from dynwalk.errors import EmptyDataset, IncompatibleCombo
from dynwalk.graph import DynamicGraph
from dynwalk.stream import (
    RunRecord,
    SnapshotSchedule,
    affected_fraction_sweep,
    build_schedule,
    count_affected_walks,
    resolve_eval_points,
    run_stream,
    write_records,
)
from dynwalk.walks import WalkParams, filter_affected, static_all

from conftest import random_graph_edges

SMALL = dict(params=WalkParams(4, 6, 0), cfg=TrainConfig(dim=8, epochs=1))


def test_schedule_partition_sizes():
    edges = [(i, i + 1) for i in range(10)]
    deltas = build_schedule(edges, SnapshotSchedule(0.5, 2, rng_seed=1))
    assert [len(d.added_edges) for d in deltas] == [5, 2, 2, 1]
    all_edges = set().union(*(d.added_edges for d in deltas))
    assert all_edges == set(edges)
    # new vertices are exactly the endpoints not seen before
    seen = set()
    for d in deltas:
        ends = {x for e in d.added_edges for x in e}
        assert d.added_vertices == ends - seen
        seen |= ends


def test_schedule_seeded_and_max_steps():
    rng = np.random.default_rng(0)
    edges = random_graph_edges(50, 200, rng)
    a = build_schedule(edges, SnapshotSchedule(0.1, 5, rng_seed=3))
    b = build_schedule(edges, SnapshotSchedule(0.1, 5, rng_seed=3))
    assert a == b
    assert len(a[0].added_edges) == 20
    c = build_schedule(edges, SnapshotSchedule(0.1, 5, max_steps=4, rng_seed=3))
    assert len(c) == 5 and c == a[:5]


def test_schedule_errors():
    with pytest.raises(EmptyDataset):
        build_schedule([], SnapshotSchedule(0.5, 2))
    with pytest.raises(EmptyDataset):
        build_schedule([(0, 1)], SnapshotSchedule(0.1, 2))
    with pytest.raises(ValueError):
        SnapshotSchedule(0.0, 2)
    with pytest.raises(ValueError):
        SnapshotSchedule(0.5, 0)


def test_eval_points():
    assert resolve_eval_points("ends", 11) == {0, 5, 10}
    assert resolve_eval_points("every:4", 11) == {0, 4, 8, 10}
    assert resolve_eval_points([0, -1], 11) == {0, 10}
    assert resolve_eval_points("none", 11) == set()


def test_m1_u2_rejected(planted):
    with pytest.raises(IncompatibleCombo):
        run_stream(planted, SnapshotSchedule(0.5, 5), "M1", "U2", **SMALL)


@pytest.mark.parametrize("alg,upd", [("M1", "U1"), ("M2", "U2"), ("M3", "U2"), ("M4", "U1")])
def test_run_stream_records(planted, alg, upd):
    sched = SnapshotSchedule(0.5, 7, rng_seed=2)
    recs = run_stream(planted, sched, alg, upd, eval_points="ends", n_splits=2, **SMALL)
    n = len(build_schedule(planted.edges, sched))
    assert len(recs) == n
    assert [r.snapshot_index for r in recs] == list(range(n))
    # conservation: every dataset edge is in the final snapshot
    assert recs[-1].num_edges == planted.num_edges
    for r in recs:
        assert all(t >= 0 for t in r.wall_times.values())
        assert r.walks_regenerated <= r.corpus_size
        assert r.corpus_size == 4 * r.num_vertices
        assert r.bias is not None
    assert {i for i, r in enumerate(recs) if r.eval} == {0, (n - 1) // 2, n - 1}
    if upd == "U2":
        assert all(r.pairs_emitted > 0 or r.walks_regenerated == 0 for r in recs)


def test_run_stream_replay_deterministic(planted):
    sched = SnapshotSchedule(0.6, 10, rng_seed=4)
    a = run_stream(planted, sched, "M2", "U2", n_splits=2, **SMALL)
    b = run_stream(planted, sched, "M2", "U2", n_splits=2, **SMALL)
    assert [x.comparable() for x in a] == [y.comparable() for y in b]


def test_run_stream_corpus_valid_at_end(planted):
    from dynwalk.walks import validate_corpus

    recs, state = run_stream(planted, SnapshotSchedule(0.5, 9, rng_seed=1), "M4", "U2",
                             eval_points="none", keep_state=True, **SMALL)
    assert validate_corpus(state["graph"], state["corpus"]) == []
    assert set(state["table"].ids.tolist()) == set(state["graph"].adjacency)


def test_m2_regenerates_few_walks(planted):
    recs = run_stream(planted, SnapshotSchedule(0.5, 2, max_steps=20, rng_seed=0), "M2", "U2",
                      eval_points="none", **SMALL)
    fracs = [r.bias.regenerated_fraction for r in recs[1:]]
    assert max(fracs) < 0.5


def test_records_csv_and_jsonl(tmp_path, planted):
    recs = run_stream(planted, SnapshotSchedule(0.8, 20, rng_seed=0), "M2", "U2", n_splits=2, **SMALL)
    write_records(recs, tmp_path / "r.csv", tmp_path / "r.jsonl")
    with open(tmp_path / "r.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == RunRecord.CSV_HEADER
    assert len(rows) == len(recs) + 1
    lines = (tmp_path / "r.jsonl").read_text().splitlines()
    assert json.loads(lines[0])["walk_algorithm"] == "M2"


def test_count_affected_matches_index(planted):
    corpus = static_all(planted.graph, WalkParams(3, 8, 0))
    aff = {0, 5, 77}
    assert count_affected_walks(corpus, aff) == len(filter_affected(corpus, aff))
    assert count_affected_walks(corpus, set()) == 0


def test_affected_fraction_sweep(planted):
    rates = [0, 1, 5, 20]
    means = np.mean([list(affected_fraction_sweep(planted, rates, params=WalkParams(4, 10, s), seed=s).values())
                     for s in range(5)], axis=0)
    assert means[0] == 0.0
    assert all(b >= a for a, b in zip(means, means[1:]))


def test_denser_graph_more_affected():
    rng = np.random.default_rng(1)
    sparse = from_graph("sparse", DynamicGraph(range(100), random_graph_edges(100, 150, rng)))
    dense = from_graph("dense", DynamicGraph(range(100), random_graph_edges(100, 1200, rng)))
    f = lambda ds: np.mean([affected_fraction_sweep(ds, [10], params=WalkParams(4, 10, s), seed=s)[10]
                            for s in range(5)])
    assert f(dense) > f(sparse)
