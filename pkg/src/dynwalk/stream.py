"""Snapshot streams and experiment runs.

A static dataset becomes a stream by shuffling its edges, seeding the first
snapshot with a fraction of them and then adding ``update_rate`` edges per
step. :func:`run_stream` replays the stream through one walk algorithm
(M1-M4) and one embedding update method (U1/U2), timing each phase.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import rng as rngmod
from .embed import TrainConfig, build_noise_distribution, train_full, train_warm_start
from .errors import EmptyDataset, IncompatibleCombo
from .evaluation import ClassifierConfig, EvalReport, evaluate
from .graph import DynamicGraph, GraphDelta, affected_vertices, apply_delta, largest_connected_component, norm_edge
from .pairs import BiasReport, bias_report, generate_pairs
from .walks import ALGORITHMS, WalkParams, static_all, update_corpus

UPDATE_METHODS = ("U1", "U2")


@dataclass(frozen=True)
class SnapshotSchedule:
    initial_fraction: float = 0.1
    update_rate: int = 5
    max_steps: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.initial_fraction <= 1:
            raise ValueError("initial_fraction must be in (0, 1]")
        if self.update_rate < 1:
            raise ValueError("update_rate must be positive")


def _unique_edges(edges) -> list[tuple[int, int]]:
    seen = set()
    out = []
    for u, v in edges:
        e = norm_edge(u, v)
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out


def shuffled_edges(edges, seed: int) -> list[tuple[int, int]]:
    edges = sorted(_unique_edges(edges))
    order = np.random.default_rng(seed).permutation(len(edges))
    return [edges[i] for i in order]


def initial_count(num_edges: int, fraction: float) -> int:
    return int(round(fraction * num_edges))


def _batch_delta(batch, seen: set[int]) -> GraphDelta:
    new = {x for e in batch for x in e} - seen
    seen |= new
    return GraphDelta(added_vertices=new, added_edges=set(batch))


def build_schedule(edge_list, schedule: SnapshotSchedule) -> list[GraphDelta]:
    """Initial delta plus ``update_rate``-edge deltas covering every edge once.

    ``max_steps`` truncates the update deltas (the initial one is always kept).
    """
    edges = shuffled_edges(edge_list, schedule.rng_seed)
    if not edges:
        raise EmptyDataset("edge list is empty")
    n0 = initial_count(len(edges), schedule.initial_fraction)
    if n0 < 1:
        raise EmptyDataset("initial fraction selects no edges")
    seen: set[int] = set()
    deltas = [_batch_delta(edges[:n0], seen)]
    rate = schedule.update_rate
    for a in range(n0, len(edges), rate):
        if schedule.max_steps is not None and len(deltas) > schedule.max_steps:
            break
        deltas.append(_batch_delta(edges[a:a + rate], seen))
    return deltas


def step_seed(seed: int, step: int) -> int:
    # snapshot 0 uses the configured seed as-is so a one-snapshot stream
    # matches the stand-alone stage commands
    return int(seed) if step == 0 else rngmod.derive_seed(seed, step)


def empty_graph() -> DynamicGraph:
    # the initial delta brings it to snapshot 0
    return DynamicGraph(snapshot_index=-1)


def random_churn_delta(g: DynamicGraph, rng: np.random.Generator, max_changes: int = 4,
                       next_id: int | None = None) -> GraphDelta:
    """Random valid delta mixing edge/vertex insertions and deletions (fuzzing aid)."""
    verts = sorted(g.adjacency)
    edges = sorted(g.edges())
    next_id = g.id_bound if next_id is None else next_id
    d = GraphDelta()
    for _ in range(int(rng.integers(1, max_changes + 1))):
        kind = rng.choice(4, p=[0.45, 0.3, 0.15, 0.1])
        if kind == 0 and len(verts) >= 2:
            u, v = (int(x) for x in rng.choice(verts, 2, replace=False))
            e = norm_edge(u, v)
            if not g.has_edge(*e) and u not in d.deleted_vertices and v not in d.deleted_vertices \
                    and e not in d.deleted_edges:
                d.added_edges.add(e)
        elif kind == 1 and edges:
            e = edges[int(rng.integers(len(edges)))]
            if e not in d.added_edges:
                d.deleted_edges.add(e)
        elif kind == 2:
            new = next_id
            next_id += 1
            d.added_vertices.add(new)
            live = [v for v in verts if v not in d.deleted_vertices]
            for u in rng.choice(live, min(len(live), int(rng.integers(0, 3))), replace=False) if live else []:
                d.added_edges.add(norm_edge(int(u), new))
        elif kind == 3 and len(verts) > 3:
            v = int(rng.choice(verts))
            if all(v not in e for e in d.added_edges):
                d.deleted_vertices.add(v)
    # explicit edge deletions on deleted vertices are redundant but legal
    return d


@dataclass
class RunRecord:
    snapshot_index: int
    walk_algorithm: str
    update_method: str
    walks_regenerated: int
    pairs_emitted: int
    corpus_size: int
    affected_walks: int
    num_vertices: int
    num_edges: int
    bias: BiasReport | None = None
    eval: EvalReport | None = None
    wall_times: dict[str, float] = field(default_factory=dict)

    CSV_HEADER = (
        "snapshot_index", "walk_algorithm", "update_method", "walks_regenerated",
        "pairs_emitted", "corpus_size", "affected_walks", "num_vertices", "num_edges",
        "mean_error", "max_error", "regenerated_fraction", "macro_f1_mean", "macro_f1_std",
        "t_walk", "t_pairs", "t_train", "t_eval",
    )

    def csv_row(self) -> list:
        b, e, w = self.bias, self.eval, self.wall_times
        return [
            self.snapshot_index, self.walk_algorithm, self.update_method, self.walks_regenerated,
            self.pairs_emitted, self.corpus_size, self.affected_walks, self.num_vertices, self.num_edges,
            b.mean_error if b else "", b.max_error if b else "", b.regenerated_fraction if b else "",
            e.macro_f1_mean if e else "", e.macro_f1_std if e else "",
            w.get("walk", 0.0), w.get("pairs", 0.0), w.get("train", 0.0), w.get("eval", 0.0),
        ]

    def to_json(self) -> str:
        d = asdict(self)
        if self.bias is not None:
            d["bias"] = {k: v for k, v in d["bias"].items() if k != "per_vertex_error"}
        return json.dumps(d)

    def comparable(self) -> dict:
        """Everything except wall-clock timings."""
        d = asdict(self)
        d.pop("wall_times")
        return d

    @property
    def update_time(self) -> float:
        return self.wall_times.get("walk", 0.0) + self.wall_times.get("pairs", 0.0) + self.wall_times.get("train", 0.0)


def resolve_eval_points(eval_points, n_snapshots: int) -> set[int]:
    """``"ends"`` -> first/middle/last; ``"every:k"``; ``"none"``; or explicit indices."""
    last = n_snapshots - 1
    if eval_points is None or eval_points == "none":
        return set()
    if eval_points == "ends":
        return {0, last // 2, last}
    if isinstance(eval_points, str) and eval_points.startswith("every:"):
        k = int(eval_points.split(":", 1)[1])
        return set(range(0, n_snapshots, k)) | {last}
    return {last + 1 + i if i < 0 else i for i in eval_points}


def write_records(records, csv_path=None, jsonl_path=None) -> None:
    if csv_path:
        new = not os.path.exists(csv_path)
        with open(csv_path, "a", newline="") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(RunRecord.CSV_HEADER)
            for r in records:
                w.writerow(r.csv_row())
    if jsonl_path:
        with open(jsonl_path, "a") as fh:
            for r in records:
                fh.write(r.to_json() + "\n")


def run_stream(
    dataset,
    schedule: SnapshotSchedule,
    walk_alg: str,
    update_method: str,
    params: WalkParams,
    cfg: TrainConfig,
    eval_points="ends",
    *,
    window: int = 8,
    train_fraction: float = 0.09,
    n_splits: int = 10,
    classifier: ClassifierConfig | None = None,
    compute_bias: bool = True,
    u1_train: str = "needed",
    eval_seed: int = 0,
    workers: int = 1,
    deltas: list[GraphDelta] | None = None,
    on_record=None,
    keep_state: bool = False,
    train: bool = True,
):
    """Replay a stream and return one :class:`RunRecord` per snapshot.

    With ``u1_train="needed"`` U1 only trains where embeddings are used
    (evaluation points and the final snapshot); U1 has no state carried
    between snapshots, so skipping the rest changes no reported value.
    ``u1_train="all"`` trains at every snapshot. ``train=False`` only
    maintains walks (pairs, training and evaluation are skipped).

    If ``keep_state`` is true, returns ``(records, state)`` where ``state``
    holds the final graph, corpus and embedding table.
    """
    if walk_alg not in ALGORITHMS:
        raise ValueError(f"unknown walk algorithm {walk_alg!r}")
    if update_method not in UPDATE_METHODS:
        raise ValueError(f"unknown update method {update_method!r}")
    if walk_alg == "M1" and update_method == "U2":
        raise IncompatibleCombo("M1 regenerates every walk, so U2 has no update subset to train on")
    if deltas is None:
        deltas = build_schedule(dataset.edges, schedule)
    labels = getattr(dataset, "labels", None)
    evals = resolve_eval_points(eval_points, len(deltas)) if labels is not None and train else set()
    last = len(deltas) - 1
    g = empty_graph()
    corpus = None
    table = None
    records = []
    for step, d in enumerate(deltas):
        affected = affected_vertices(d, g)
        g_new = apply_delta(g, d)
        times = {}

        t0 = time.perf_counter()
        if corpus is None or walk_alg == "M1":
            p = WalkParams(params.r, params.l, step_seed(params.corpus_seed, step))
            corpus = static_all(g_new, p if walk_alg == "M1" else params, workers)
        else:
            corpus = update_corpus(walk_alg, g_new, corpus, affected, params, inplace=True, workers=workers)
        times["walk"] = time.perf_counter() - t0
        regenerated = len(corpus.changed_ids)

        step_cfg = TrainConfig(**{**asdict(cfg), "rng_seed": step_seed(cfg.rng_seed, step)})
        incremental = update_method == "U2" and table is not None
        train_now = train and (update_method == "U2" or u1_train == "all" or step in evals or step == last)
        pairs = None
        t0 = time.perf_counter()
        if train_now:
            ids = corpus.changed_ids if incremental else None
            pairs = generate_pairs(corpus, window, walk_ids=ids)
        times["pairs"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        if train_now:
            if incremental:
                noise = build_noise_distribution(corpus, cfg.noise_exponent, window)
                new_vertices = [v for v in g_new.adjacency if v not in table]
                table = train_warm_start(table, new_vertices, pairs, step_cfg, noise)
            else:
                table = train_full(pairs, g_new.adjacency, step_cfg)
        times["train"] = time.perf_counter() - t0

        bias = bias_report(g_new, corpus, regenerated) if compute_bias else None

        report = None
        t0 = time.perf_counter()
        if step in evals:
            lcc = largest_connected_component(g_new)
            report = evaluate(table, labels, lcc, train_fraction, n_splits,
                              step_seed(eval_seed, step), classifier)
        times["eval"] = time.perf_counter() - t0

        rec = RunRecord(
            snapshot_index=g_new.snapshot_index,
            walk_algorithm=walk_alg,
            update_method=update_method,
            walks_regenerated=regenerated,
            pairs_emitted=len(pairs) if pairs is not None else 0,
            corpus_size=len(corpus),
            affected_walks=corpus.affected_walks,
            num_vertices=g_new.num_vertices,
            num_edges=g_new.num_edges,
            bias=bias,
            eval=report,
            wall_times=times,
        )
        records.append(rec)
        if on_record is not None:
            on_record(rec)
        g = g_new
    if keep_state:
        return records, {"graph": g, "corpus": corpus, "table": table}
    return records


def count_affected_walks(corpus, affected) -> int:
    """Number of walks visiting any vertex of ``affected`` (vectorised scan)."""
    if not affected:
        return 0
    _, seq, lens = corpus.arrays()
    hit = np.isin(seq, np.fromiter(affected, dtype=np.int64)) & (np.arange(seq.shape[1])[None, :] < lens[:, None])
    return int(hit.any(axis=1).sum())


def affected_fraction_sweep(dataset, rates, initial_fraction: float = 0.9, params: WalkParams | None = None,
                            seed: int = 0, workers: int = 1) -> dict[int, float]:
    """Fraction of walks affected by one update of each size from the same initial graph."""
    params = params or WalkParams(corpus_seed=seed)
    edges = shuffled_edges(dataset.edges, seed)
    n0 = initial_count(len(edges), initial_fraction)
    seen: set[int] = set()
    g0 = apply_delta(empty_graph(), _batch_delta(edges[:n0], seen))
    corpus = static_all(g0, params, workers)
    total = len(corpus)
    out = {}
    for rate in rates:
        if rate <= 0:
            out[rate] = 0.0
            continue
        d = _batch_delta(edges[n0:n0 + rate], set(seen))
        out[rate] = count_affected_walks(corpus, affected_vertices(d, g0)) / total
    return out
