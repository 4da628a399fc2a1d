"""First-order random walks and walk-corpus maintenance.

Four strategies keep a corpus in step with a changing graph:

``static_all`` (M1)
    regenerate everything on the new snapshot.
``incremental_trim`` (M2)
    cut each affected walk just after its first affected vertex and resume
    it on the new snapshot. Unbiased.
``incremental_restart`` (M3)
    rerun affected walks from their start vertex.
``naive_vertex_only`` (M4)
    rerun only the walks that start at affected vertices.

Walks live in a padded ``(capacity, l)`` array indexed by walk id; ids are
never reused. Each walk keeps a stream seed derived from
``(corpus_seed, walk_id, generation)`` and step ``i`` draws its neighbour from
``uniforms(seed, i)``, so results do not depend on worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import rng
from .errors import StaleCorpus
from .graph import DynamicGraph

ALGORITHMS = ("M1", "M2", "M3", "M4")


@dataclass(frozen=True)
class WalkParams:
    walks_per_vertex: int = 80
    walk_length: int = 10
    corpus_seed: int = 0

    def __post_init__(self):
        if self.walks_per_vertex < 1:
            raise ValueError("walks_per_vertex must be >= 1")
        if self.walk_length < 2:
            raise ValueError("walk_length must be >= 2")

    @property
    def r(self) -> int:
        return self.walks_per_vertex

    @property
    def l(self) -> int:  # noqa: E743
        return self.walk_length


@dataclass
class Walk:
    walk_id: int
    start: int
    sequence: list[int]
    rng_seed: int
    generation: int = 0

    def __len__(self) -> int:
        return len(self.sequence)


class WalkCorpus:
    """Walks keyed by id plus an inverted index vertex -> walk ids.

    The index is built on first use and then maintained incrementally by the
    update functions.
    """

    def __init__(self, params: WalkParams, snapshot_index: int = 0, capacity: int = 0):
        self.params = params
        self.snapshot_index = snapshot_index
        cap = max(capacity, 16)
        l = params.walk_length
        self._seq = np.full((cap, l), -1, dtype=np.int64)
        self._len = np.zeros(cap, dtype=np.int64)
        self._seed = np.zeros(cap, dtype=np.uint64)
        self._gen = np.zeros(cap, dtype=np.int64)
        self._alive = np.zeros(cap, dtype=bool)
        self._n = 0
        self._index: dict[int, set[int]] | None = None
        # bookkeeping from the update that produced this corpus
        self.changed_ids = np.zeros(0, dtype=np.int64)
        self.affected_walks = 0

    # -- storage ----------------------------------------------------------
    def _reserve(self, extra: int) -> None:
        need = self._n + extra
        cap = len(self._len)
        if need <= cap:
            return
        new_cap = max(need, 2 * cap)
        grow = new_cap - cap
        self._seq = np.vstack([self._seq, np.full((grow, self._seq.shape[1]), -1, dtype=np.int64)])
        self._len = np.concatenate([self._len, np.zeros(grow, dtype=np.int64)])
        self._seed = np.concatenate([self._seed, np.zeros(grow, dtype=np.uint64)])
        self._gen = np.concatenate([self._gen, np.zeros(grow, dtype=np.int64)])
        self._alive = np.concatenate([self._alive, np.zeros(grow, dtype=bool)])

    def _append_stubs(self, starts: np.ndarray) -> np.ndarray:
        """Add length-1 walks; returns their ids."""
        k = len(starts)
        self._reserve(k)
        ids = np.arange(self._n, self._n + k, dtype=np.int64)
        self._seq[ids, 0] = starts
        self._len[ids] = 1
        self._gen[ids] = 0
        self._seed[ids] = rng.walk_seeds(self.params.corpus_seed, ids, 0)
        self._alive[ids] = True
        self._n += k
        return ids

    @classmethod
    def from_sequences(cls, sequences, params: WalkParams, snapshot_index: int = 0) -> "WalkCorpus":
        """Corpus holding the given walks as-is (ids in list order)."""
        seqs = [list(s) for s in sequences]
        if any(not 1 <= len(s) <= params.l for s in seqs):
            raise ValueError(f"walk lengths must be in 1..{params.l}")
        c = cls(params, snapshot_index, capacity=len(seqs))
        ids = c._append_stubs(np.array([s[0] for s in seqs], dtype=np.int64))
        for wid, s in zip(ids.tolist(), seqs):
            c._seq[wid, : len(s)] = s
            c._len[wid] = len(s)
        return c

    def copy(self) -> "WalkCorpus":
        c = WalkCorpus.__new__(WalkCorpus)
        c.params = self.params
        c.snapshot_index = self.snapshot_index
        c._seq = self._seq.copy()
        c._len = self._len.copy()
        c._seed = self._seed.copy()
        c._gen = self._gen.copy()
        c._alive = self._alive.copy()
        c._n = self._n
        c._index = None if self._index is None else {v: set(s) for v, s in self._index.items()}
        c.changed_ids = self.changed_ids.copy()
        c.affected_walks = self.affected_walks
        return c

    # -- views --------------------------------------------------------------
    def __len__(self) -> int:
        return int(self._alive[: self._n].sum())

    def walk_ids(self) -> np.ndarray:
        return np.flatnonzero(self._alive[: self._n])

    def __contains__(self, walk_id) -> bool:
        return 0 <= walk_id < self._n and bool(self._alive[walk_id])

    def __getitem__(self, walk_id: int) -> Walk:
        if walk_id not in self:
            raise KeyError(walk_id)
        n = int(self._len[walk_id])
        return Walk(
            walk_id=int(walk_id),
            start=int(self._seq[walk_id, 0]),
            sequence=self._seq[walk_id, :n].tolist(),
            rng_seed=int(self._seed[walk_id]),
            generation=int(self._gen[walk_id]),
        )

    def __iter__(self) -> Iterator[Walk]:
        for wid in self.walk_ids():
            yield self[int(wid)]

    @property
    def walks(self) -> dict[int, Walk]:
        return {w.walk_id: w for w in self}

    def arrays(self, ids: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(walk ids, padded sequences, lengths) for ``ids`` or all live walks."""
        if ids is None:
            ids = self.walk_ids()
        ids = np.asarray(ids, dtype=np.int64)
        return ids, self._seq[ids], self._len[ids]

    def sequences(self) -> list[list[int]]:
        return [w.sequence for w in self]

    def starts(self) -> np.ndarray:
        return self._seq[self.walk_ids(), 0]

    def total_positions(self) -> int:
        return int(self._len[self.walk_ids()].sum())

    @property
    def by_vertex_index(self) -> dict[int, set[int]]:
        if self._index is None:
            self._index = build_index(*self.arrays())
        return self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, WalkCorpus):
            return NotImplemented
        a_ids, a_seq, a_len = self.arrays()
        b_ids, b_seq, b_len = other.arrays()
        return (
            self.params == other.params
            and self.snapshot_index == other.snapshot_index
            and np.array_equal(a_ids, b_ids)
            and np.array_equal(a_seq, b_seq)
            and np.array_equal(a_len, b_len)
            and np.array_equal(self._seed[a_ids], other._seed[b_ids])
        )

    def __repr__(self) -> str:
        return (
            f"WalkCorpus(walks={len(self)}, r={self.params.r}, l={self.params.l}, "
            f"t={self.snapshot_index})"
        )

    # -- I/O ----------------------------------------------------------------
    def dump(self, path, with_state: bool = True) -> None:
        """Write one walk per line after a ``r l corpus_seed snapshot`` header.

        ``with_state`` also writes ``<path>.state.npz`` with walk ids, seeds and
        generations so the corpus reloads exactly, not just its sequences.
        """
        p = self.params
        ids, seq, lens = self.arrays()
        with open(path, "w") as fh:
            fh.write(f"{p.r} {p.l} {p.corpus_seed} {self.snapshot_index}\n")
            for row, n in zip(seq, lens):
                fh.write(" ".join(map(str, row[:n].tolist())))
                fh.write("\n")
        if with_state:
            with open(f"{path}.state.npz", "wb") as fh:
                np.savez(fh, ids=ids, seeds=self._seed[ids], gens=self._gen[ids])

    @classmethod
    def load(cls, path) -> "WalkCorpus":
        with open(path) as fh:
            header = fh.readline().split()
            r, l, seed, snap = (int(x) for x in header)
            seqs = [[int(x) for x in line.split()] for line in fh if line.strip()]
        params = WalkParams(r, l, seed)
        state = f"{path}.state.npz"
        if os.path.exists(state):
            z = np.load(state)
            ids, seeds, gens = z["ids"], z["seeds"], z["gens"]
        else:
            ids = np.arange(len(seqs), dtype=np.int64)
            gens = np.zeros(len(seqs), dtype=np.int64)
            seeds = rng.walk_seeds(seed, ids, 0)
        n = int(ids.max()) + 1 if len(ids) else 0
        c = cls(params, snap, capacity=n)
        c._n = n
        for wid, s in zip(ids.tolist(), seqs):
            c._seq[wid, : len(s)] = s
            c._len[wid] = len(s)
        c._seed[ids] = seeds
        c._gen[ids] = gens
        c._alive[ids] = True
        return c


def build_index(ids: np.ndarray, seq: np.ndarray, lens: np.ndarray) -> dict[int, set[int]]:
    """Inverted index vertex -> ids of walks visiting it."""
    if len(ids) == 0:
        return {}
    l = seq.shape[1]
    valid = np.arange(l)[None, :] < lens[:, None]
    verts = seq[valid]
    owners = np.broadcast_to(ids[:, None], seq.shape)[valid]
    order = np.lexsort((owners, verts))
    verts, owners = verts[order], owners[order]
    keep = np.ones(len(verts), dtype=bool)
    keep[1:] = (verts[1:] != verts[:-1]) | (owners[1:] != owners[:-1])
    verts, owners = verts[keep], owners[keep]
    cuts = np.flatnonzero(np.diff(verts)) + 1
    index: dict[int, set[int]] = {}
    for vs, os_ in zip(np.split(verts, cuts), np.split(owners, cuts)):
        index[int(vs[0])] = set(os_.tolist())
    return index


def _index_remove(index, ids, seq, lens) -> None:
    for wid, row, n in zip(ids.tolist(), seq, lens.tolist()):
        for v in set(row[:n].tolist()):
            s = index.get(v)
            if s is not None:
                s.discard(wid)
                if not s:
                    del index[v]


def _index_add(index, ids, seq, lens) -> None:
    for wid, row, n in zip(ids.tolist(), seq, lens.tolist()):
        for v in set(row[:n].tolist()):
            index.setdefault(v, set()).add(wid)


# -- walk generation ---------------------------------------------------------

def _extend_block(indptr, indices, seq, lens, seeds, l) -> None:
    rows = np.arange(len(lens))
    if len(rows) == 0:
        return
    for pos in range(int(lens.min()), l):
        sel = rows[lens == pos]
        if len(sel) == 0:
            continue
        cur = seq[sel, pos - 1]
        lo = indptr[cur]
        deg = indptr[cur + 1] - lo
        moving = deg > 0
        sel, lo, deg = sel[moving], lo[moving], deg[moving]
        if len(sel) == 0:
            continue
        u = rng.uniforms(seeds[sel], np.full(len(sel), pos, dtype=np.int64))
        step = np.minimum((u * deg).astype(np.int64), deg - 1)
        seq[sel, pos] = indices[lo + step]
        lens[sel] = pos + 1


def extend_walks(
    g: DynamicGraph,
    seq: np.ndarray,
    lens: np.ndarray,
    seeds: np.ndarray,
    l: int,
    workers: int = 1,
    chunk: int = 65536,
) -> tuple[np.ndarray, np.ndarray]:
    """Extend every row of ``seq`` in place to length ``l`` on graph ``g``.

    A walk stops early only at a vertex with no neighbours. Returns the
    (possibly new) arrays; callers should use the return value.
    """
    indptr, indices = g.csr()
    n = len(lens)
    if n == 0:
        return seq, lens
    if workers <= 1 or n <= chunk:
        _extend_block(indptr, indices, seq, lens, seeds, l)
        return seq, lens
    bounds = list(range(0, n, chunk)) + [n]

    def work(i):
        a, b = bounds[i], bounds[i + 1]
        s, ln = seq[a:b], lens[a:b]
        _extend_block(indptr, indices, s, ln, seeds[a:b], l)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(work, range(len(bounds) - 1)))
    return seq, lens


def init_walks(vertices: Iterable[int], r: int, corpus_seed: int = 0, first_id: int = 0) -> list[Walk]:
    """``r`` length-1 walk stubs per vertex, ids assigned in sorted vertex order."""
    verts = sorted(int(v) for v in vertices)
    starts = np.repeat(np.array(verts, dtype=np.int64), r)
    ids = np.arange(first_id, first_id + len(starts), dtype=np.int64)
    seeds = rng.walk_seeds(corpus_seed, ids, 0)
    return [
        Walk(int(w), int(s), [int(s)], int(sd))
        for w, s, sd in zip(ids, starts, seeds)
    ]


def random_walk(g: DynamicGraph, walk: Walk, l: int) -> Walk:
    """Extend ``walk`` on ``g`` to length ``l`` (or until a dead end)."""
    seq = np.full((1, l), -1, dtype=np.int64)
    n = min(len(walk.sequence), l)
    seq[0, :n] = walk.sequence[:n]
    lens = np.array([n], dtype=np.int64)
    seeds = np.array([walk.rng_seed], dtype=np.uint64)
    extend_walks(g, seq, lens, seeds, l)
    return Walk(walk.walk_id, walk.start, seq[0, : lens[0]].tolist(), walk.rng_seed, walk.generation)


def static_all(g: DynamicGraph, params: WalkParams, workers: int = 1) -> WalkCorpus:
    """M1: ``r`` fresh walks from every vertex of ``g``."""
    verts = np.array(sorted(g.adjacency), dtype=np.int64)
    starts = np.repeat(verts, params.r)
    corpus = WalkCorpus(params, g.snapshot_index, capacity=len(starts))
    ids = corpus._append_stubs(starts)
    corpus._seq, corpus._len = _extend_ids(g, corpus, ids, workers)
    corpus.changed_ids = ids
    corpus.affected_walks = 0
    return corpus


def _extend_ids(g, corpus, ids, workers):
    seq = corpus._seq[ids]
    lens = corpus._len[ids]
    extend_walks(g, seq, lens, corpus._seed[ids], corpus.params.l, workers)
    corpus._seq[ids] = seq
    corpus._len[ids] = lens
    return corpus._seq, corpus._len


def filter_affected(corpus: WalkCorpus, affected: Iterable[int]) -> set[int]:
    """Ids of walks that visit at least one vertex in ``affected``."""
    index = corpus.by_vertex_index
    out: set[int] = set()
    for v in affected:
        s = index.get(v)
        if s:
            out |= s
    return out


# -- incremental updates ------------------------------------------------------

def _begin(g_new: DynamicGraph, corpus: WalkCorpus, inplace: bool):
    if corpus.snapshot_index != g_new.snapshot_index - 1:
        raise StaleCorpus(
            f"corpus is at snapshot {corpus.snapshot_index}, "
            f"graph is at {g_new.snapshot_index}"
        )
    c = corpus if inplace else corpus.copy()
    live = g_new.live_mask()
    ids = c.walk_ids()
    starts = c._seq[ids, 0]
    in_range = starts < len(live)
    dead_start = np.ones(len(ids), dtype=bool)
    dead_start[in_range] = ~live[starts[in_range]]
    deleted = set(np.unique(starts[dead_start]).tolist())
    started = np.zeros(len(live), dtype=bool)
    started[starts[in_range]] = True
    new_vertices = np.flatnonzero(live & ~started)
    return c, ids[dead_start], deleted, new_vertices


def _drop(c: WalkCorpus, ids: np.ndarray) -> None:
    if len(ids) == 0:
        return
    if c._index is not None:
        _index_remove(c._index, ids, c._seq[ids], c._len[ids])
    c._alive[ids] = False
    c._seq[ids] = -1
    c._len[ids] = 0


def _resume(c: WalkCorpus, g_new, ids: np.ndarray, keep: np.ndarray, workers: int) -> np.ndarray:
    """Truncate walks ``ids`` to ``keep`` vertices and continue them on g_new.

    Returns the subset of ``ids`` whose contents actually changed.
    """
    if len(ids) == 0:
        return ids
    old_seq = c._seq[ids].copy()
    old_len = c._len[ids].copy()
    l = c.params.l
    seq = old_seq.copy()
    seq[np.arange(l)[None, :] >= keep[:, None]] = -1
    lens = keep.astype(np.int64).copy()
    resumed = keep < l
    gens = c._gen[ids] + resumed
    seeds = np.where(resumed, rng.walk_seeds(c.params.corpus_seed, ids, gens), c._seed[ids])
    extend_walks(g_new, seq, lens, seeds, l, workers)
    changed = (lens != old_len) | np.any(seq != old_seq, axis=1)
    ch = ids[changed]
    if c._index is not None and len(ch):
        _index_remove(c._index, ch, old_seq[changed], old_len[changed])
        _index_add(c._index, ch, seq[changed], lens[changed])
    c._seq[ids] = seq
    c._len[ids] = lens
    c._gen[ids] = gens
    c._seed[ids] = seeds
    return ch


def _add_new(c: WalkCorpus, g_new, vertices: np.ndarray, workers: int) -> np.ndarray:
    if len(vertices) == 0:
        return np.zeros(0, dtype=np.int64)
    ids = c._append_stubs(np.repeat(vertices.astype(np.int64), c.params.r))
    _extend_ids(g_new, c, ids, workers)
    if c._index is not None:
        _index_add(c._index, ids, c._seq[ids], c._len[ids])
    return ids


def _first_hit(seq: np.ndarray, lens: np.ndarray, marked: np.ndarray) -> np.ndarray:
    """Position of the first element of each row found in ``marked``."""
    hit = np.isin(seq, marked) & (np.arange(seq.shape[1])[None, :] < lens[:, None])
    return np.argmax(hit, axis=1)


def _finish(c: WalkCorpus, g_new, changed: list[np.ndarray], affected_walks: int) -> WalkCorpus:
    c.snapshot_index = g_new.snapshot_index
    parts = [x for x in changed if len(x)]
    c.changed_ids = np.unique(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)
    c.affected_walks = affected_walks
    return c


def _params_check(corpus: WalkCorpus, params: WalkParams | None) -> None:
    if params is not None and params != corpus.params:
        raise ValueError("params differ from the corpus's own params")


def incremental_trim(
    g_new: DynamicGraph,
    corpus: WalkCorpus,
    affected: Iterable[int],
    params: WalkParams | None = None,
    *,
    inplace: bool = False,
    workers: int = 1,
) -> WalkCorpus:
    """M2: trim affected walks at their first affected vertex and resume.

    The first affected vertex stays as the last kept element. If the first
    hit is a deleted vertex the walk is cut just before it; walks that start
    at a deleted vertex are dropped.
    """
    _params_check(corpus, params)
    c, dead_ids, deleted, new_vertices = _begin(g_new, corpus, inplace)
    _drop(c, dead_ids)
    bad = set(affected) | deleted
    ids = np.array(sorted(filter_affected(c, bad)), dtype=np.int64)
    changed = []
    if len(ids):
        seq, lens = c._seq[ids], c._len[ids]
        k = _first_hit(seq, lens, np.fromiter(bad, dtype=np.int64))
        hit_vertex = seq[np.arange(len(ids)), k]
        is_deleted = np.isin(hit_vertex, np.fromiter(deleted, dtype=np.int64, count=len(deleted)))
        keep = np.maximum(np.where(is_deleted, k, k + 1), 1)
        changed.append(_resume(c, g_new, ids, keep, workers))
    changed.append(_add_new(c, g_new, new_vertices, workers))
    return _finish(c, g_new, changed, len(ids))


def incremental_restart(
    g_new: DynamicGraph,
    corpus: WalkCorpus,
    affected: Iterable[int],
    params: WalkParams | None = None,
    *,
    inplace: bool = False,
    workers: int = 1,
) -> WalkCorpus:
    """M3: rerun every affected walk from its start vertex."""
    _params_check(corpus, params)
    c, dead_ids, deleted, new_vertices = _begin(g_new, corpus, inplace)
    _drop(c, dead_ids)
    ids = np.array(sorted(filter_affected(c, set(affected) | deleted)), dtype=np.int64)
    changed = []
    if len(ids):
        _resume(c, g_new, ids, np.ones(len(ids), dtype=np.int64), workers)
        changed.append(ids)  # every affected walk counts as regenerated
    changed.append(_add_new(c, g_new, new_vertices, workers))
    return _finish(c, g_new, changed, len(ids))


def _first_invalid(g_new: DynamicGraph, seq: np.ndarray, lens: np.ndarray) -> np.ndarray:
    """Length of the longest valid prefix of each walk on ``g_new``."""
    live = g_new.live_mask()
    indptr, indices = g_new.csr()
    n, l = seq.shape
    ok = np.zeros((n, l), dtype=bool)
    v0 = seq[:, 0]
    ok[:, 0] = (v0 >= 0) & (v0 < len(live)) & live[np.clip(v0, 0, len(live) - 1)]
    keys = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr)) * len(live) + indices
    for i in range(1, l):
        a, b = seq[:, i - 1], seq[:, i]
        has = i < lens
        ok[:, i] = has & np.isin(a * len(live) + b, keys)
    # prefix length = index of first False among valid positions
    bad = ~ok & (np.arange(l)[None, :] < lens[:, None])
    return np.where(bad.any(axis=1), np.argmax(bad, axis=1), lens)


def naive_vertex_only(
    g_new: DynamicGraph,
    corpus: WalkCorpus,
    affected: Iterable[int],
    params: WalkParams | None = None,
    *,
    inplace: bool = False,
    workers: int = 1,
) -> WalkCorpus:
    """M4: replace the walks that start at affected vertices; add walks for new ones.

    Other affected walks are left alone, which is what biases this strategy.
    Walks that would become invalid paths (through a deleted vertex or edge)
    are cut at the last valid vertex and resumed so the corpus stays valid.
    """
    _params_check(corpus, params)
    c, dead_ids, deleted, new_vertices = _begin(g_new, corpus, inplace)
    _drop(c, dead_ids)
    affected = set(affected)
    ids = c.walk_ids()
    starts = c._seq[ids, 0]
    aff_arr = np.fromiter(affected, dtype=np.int64, count=len(affected))
    replace = ids[np.isin(starts, aff_arr)]
    changed = []
    if len(replace):
        _resume(c, g_new, replace, np.ones(len(replace), dtype=np.int64), workers)
        changed.append(replace)
    # repair walks invalidated by deletions
    touched = np.array(sorted(filter_affected(c, affected | deleted)), dtype=np.int64)
    touched = np.setdiff1d(touched, replace)
    if len(touched):
        seq, lens = c._seq[touched], c._len[touched]
        prefix = _first_invalid(g_new, seq, lens)
        broken = prefix < lens
        if broken.any():
            fix = touched[broken]
            keep = np.maximum(prefix[broken], 1)
            changed.append(_resume(c, g_new, fix, keep, workers))
    changed.append(_add_new(c, g_new, new_vertices, workers))
    return _finish(c, g_new, changed, len(touched) + len(replace))


UPDATERS = {
    "M2": incremental_trim,
    "M3": incremental_restart,
    "M4": naive_vertex_only,
}


def update_corpus(
    algorithm: str,
    g_new: DynamicGraph,
    corpus: WalkCorpus | None,
    affected: Iterable[int],
    params: WalkParams,
    *,
    inplace: bool = False,
    workers: int = 1,
) -> WalkCorpus:
    """Dispatch on algorithm name; M1 ignores the previous corpus."""
    if algorithm == "M1" or corpus is None:
        return static_all(g_new, params, workers)
    try:
        fn = UPDATERS[algorithm]
    except KeyError:
        raise ValueError(f"unknown walk algorithm {algorithm!r}") from None
    return fn(g_new, corpus, affected, inplace=inplace, workers=workers)


def validate_corpus(g: DynamicGraph, corpus: WalkCorpus) -> list[str]:
    """List invariant violations of ``corpus`` against snapshot ``g`` (empty if none)."""
    problems = []
    r, l = corpus.params.r, corpus.params.l
    ids, seq, lens = corpus.arrays()
    if len(ids):
        prefix = _first_invalid(g, seq, lens)
        bad = np.flatnonzero(prefix < lens)
        if len(bad):
            problems.append(f"{len(bad)} walks are not valid paths, e.g. {ids[bad[0]]}")
        indptr, _ = g.csr()
        last = seq[np.arange(len(ids)), lens - 1]
        short = lens < l
        if short.any():
            deg = indptr[last[short] + 1] - indptr[last[short]]
            if (deg > 0).any():
                problems.append("walk terminated early at a vertex with neighbours")
    counts = np.bincount(seq[:, 0], minlength=g.id_bound) if len(ids) else np.zeros(g.id_bound, int)
    for v in g.adjacency:
        if counts[v] != r:
            problems.append(f"vertex {v} starts {counts[v]} walks, expected {r}")
            break
    extra = set(np.flatnonzero(counts).tolist()) - set(g.adjacency)
    if extra:
        problems.append(f"walks start at non-live vertices {sorted(extra)[:5]}")
    if corpus._index is not None:
        if corpus._index != build_index(ids, seq, lens):
            problems.append("inverted index out of sync")
    return problems
