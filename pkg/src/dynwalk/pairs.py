"""Target-context pairs from walks, and corpus-statistics audits.

For a walk ``w`` and window ``p`` each position ``i`` emits
``(w[i], w[i-d])`` for ``d = 1..min(i, p)`` (the *minus* side) and
``(w[i], w[i+d])`` for ``d = 1..min(len-i-1, p)`` (the *plus* side).

The window-1 plus-side pairs estimate transition probabilities:
``count(u, v) / count(u, .)`` should approach ``1 / deg(u)`` for an
unbiased corpus. :func:`bias_report` measures the gap.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .graph import DynamicGraph
from .walks import WalkCorpus

SIDES = ("both", "plus", "minus")


@dataclass
class PairCorpus:
    """Flat stream of (target, context) pairs."""

    targets: np.ndarray
    contexts: np.ndarray
    window: int
    source_snapshot: int = 0

    def __len__(self) -> int:
        return len(self.targets)

    def __iter__(self):
        return zip(self.targets.tolist(), self.contexts.tolist())

    def as_list(self) -> list[tuple[int, int]]:
        return list(self)

    def vertices(self) -> np.ndarray:
        return np.union1d(self.targets, self.contexts)

    def dump(self, path) -> None:
        """``t c`` per line under a ``# window p snapshot t`` comment."""
        np.savetxt(path, np.column_stack([self.targets, self.contexts]), fmt="%d",
                   header=f"window {self.window} snapshot {self.source_snapshot}")

    @classmethod
    def load(cls, path, window: int | None = None, source_snapshot: int | None = None) -> "PairCorpus":
        with open(path) as fh:
            first = fh.readline().lstrip("#").split()
        meta = dict(zip(first[0::2], first[1::2])) if first[:1] == ["window"] else {}
        if window is None:
            window = int(meta.get("window", 0))
        if source_snapshot is None:
            source_snapshot = int(meta.get("snapshot", 0))
        arr = np.loadtxt(path, dtype=np.int64, ndmin=2)
        if arr.size == 0:
            arr = np.zeros((0, 2), dtype=np.int64)
        return cls(arr[:, 0].copy(), arr[:, 1].copy(), window, source_snapshot)


def pairs_from_arrays(seq: np.ndarray, lens: np.ndarray, p: int, sides: str = "both",
                      chunk: int = 16384) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised pair expansion over padded walks.

    Output order is walk-major, then position, then offset ``-p..-1, 1..p``.
    """
    if p < 1:
        raise ValueError("window must be >= 1")
    if sides not in SIDES:
        raise ValueError(f"sides must be one of {SIDES}")
    n, l = seq.shape
    offs = []
    if sides in ("both", "minus"):
        offs += list(range(-p, 0))
    if sides in ("both", "plus"):
        offs += list(range(1, p + 1))
    offs = np.array([o for o in offs if abs(o) < l], dtype=np.int64)
    if n == 0 or len(offs) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy()
    pos = np.arange(l)
    ctx_pos = pos[:, None] + offs[None, :]  # (l, k)
    inside = (ctx_pos >= 0) & (ctx_pos < l)
    ctx_pos_c = np.clip(ctx_pos, 0, l - 1)
    t_out, c_out = [], []
    for a in range(0, n, chunk):
        s = seq[a:a + chunk]
        ln = lens[a:a + chunk]
        valid = inside[None] & (pos[None, :, None] < ln[:, None, None]) & (ctx_pos[None] < ln[:, None, None])
        tgt = np.broadcast_to(s[:, :, None], valid.shape)
        ctx = s[:, ctx_pos_c]
        t_out.append(tgt[valid])
        c_out.append(ctx[valid])
    return np.concatenate(t_out), np.concatenate(c_out)


def generate_pairs(corpus: WalkCorpus, p: int, sides: str = "both", walk_ids=None) -> PairCorpus:
    """Pair corpus from all walks, or from ``walk_ids`` only."""
    _, seq, lens = corpus.arrays(walk_ids)
    t, c = pairs_from_arrays(seq, lens, p, sides)
    return PairCorpus(t, c, p, corpus.snapshot_index)


def pairs_from_walks(walks, p: int, sides: str = "both") -> PairCorpus:
    """Same as :func:`generate_pairs` for a plain list of vertex sequences."""
    walks = [list(w) for w in walks]
    l = max((len(w) for w in walks), default=1)
    seq = np.full((len(walks), l), -1, dtype=np.int64)
    lens = np.array([len(w) for w in walks], dtype=np.int64)
    for i, w in enumerate(walks):
        seq[i, : len(w)] = w
    t, c = pairs_from_arrays(seq, lens, p, sides)
    return PairCorpus(t, c, p)


def _pair_counts(pc: PairCorpus):
    keys = np.stack([pc.targets, pc.contexts], axis=1)
    if len(keys) == 0:
        z = np.zeros((0, 2), dtype=np.int64)
        return z, np.zeros(0, dtype=np.int64)
    uniq, counts = np.unique(keys, axis=0, return_counts=True)
    return uniq, counts


def empirical_transition(pc: PairCorpus) -> dict[tuple[int, int], float]:
    """count(u, v) / count(u, .) for every observed pair.

    ``pc`` should be the window-1 plus-side corpus.
    """
    uniq, counts = _pair_counts(pc)
    if len(uniq) == 0:
        return {}
    _, inv = np.unique(uniq[:, 0], return_inverse=True)
    ratio = counts / np.bincount(inv, weights=counts)[inv]
    return {(int(u), int(v)): float(x) for (u, v), x in zip(uniq, ratio)}


def unigram_distribution(pc: PairCorpus) -> dict[int, float]:
    """Relative frequency of each vertex as a target."""
    if len(pc) == 0:
        return {}
    verts, counts = np.unique(pc.targets, return_counts=True)
    freq = counts / counts.sum()
    return {int(v): float(f) for v, f in zip(verts, freq)}


@dataclass
class BiasReport:
    per_vertex_error: dict[int, float] = field(default_factory=dict)
    mean_error: float = 0.0
    max_error: float = 0.0
    regenerated_fraction: float = 0.0

    def csv_row(self, snapshot_index: int, algorithm: str) -> list:
        return [snapshot_index, algorithm, self.mean_error, self.max_error, self.regenerated_fraction]


BIAS_CSV_HEADER = ["snapshot_index", "algorithm", "mean_error", "max_error", "regenerated_fraction"]


def transition_errors(g: DynamicGraph, targets: np.ndarray, contexts: np.ndarray):
    """Per-vertex mean |empirical - 1/deg| over true neighbours.

    Returns (vertex ids with degree >= 1, their errors).
    """
    indptr, indices = g.csr()
    n = len(indptr) - 1
    deg = np.diff(indptr)
    src = np.repeat(np.arange(n), deg)
    edge_keys = src * n + indices
    edge_cnt = np.zeros(len(edge_keys), dtype=np.int64)
    out_tot = np.zeros(n, dtype=np.int64)
    # pairs whose target is outside the snapshot cannot match any edge
    keep = (targets >= 0) & (targets < n)
    targets, contexts = targets[keep], contexts[keep]
    if len(targets):
        uk, cnt = np.unique(targets * n + contexts, return_counts=True)
        pos = np.minimum(np.searchsorted(uk, edge_keys), len(uk) - 1)
        edge_cnt = np.where(uk[pos] == edge_keys, cnt[pos], 0)
        out_tot = np.bincount(targets, minlength=n)
    tot = out_tot[src]
    emp = np.divide(edge_cnt, tot, out=np.zeros(len(src)), where=tot > 0)
    err = np.abs(emp - 1.0 / deg[src])
    per = np.bincount(src, weights=err, minlength=n)
    has = deg > 0
    verts = np.flatnonzero(has)
    return verts, per[has] / deg[has]


def bias_report(g: DynamicGraph, corpus: WalkCorpus, regenerated: int = 0) -> BiasReport:
    """Compare window-1 plus-side frequencies of ``corpus`` with ``1/deg``."""
    pc = generate_pairs(corpus, 1, "plus")
    verts, errs = transition_errors(g, pc.targets, pc.contexts)
    total = len(corpus)
    return BiasReport(
        per_vertex_error={int(v): float(e) for v, e in zip(verts, errs)},
        mean_error=float(errs.mean()) if len(errs) else 0.0,
        max_error=float(errs.max()) if len(errs) else 0.0,
        regenerated_fraction=(regenerated / total) if total else 0.0,
    )


def append_bias_csv(path, rows) -> None:
    new = not os.path.exists(path)
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(BIAS_CSV_HEADER)
        w.writerows(rows)
