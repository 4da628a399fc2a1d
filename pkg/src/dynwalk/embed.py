"""Skip-gram with negative sampling over vertex pairs.

Two ways to produce embeddings for a new snapshot:

* :func:`train_full` (U1) starts from a random table and trains on every pair.
* :func:`train_warm_start` (U2) copies the previous table, adds random rows
  for new vertices and trains only on pairs from walks that changed.

The per-pair update is the exact gradient step of

    loss = -log sigmoid(z_t . y_c) - sum_n log sigmoid(-z_t . y_n)

evaluated at the pre-update parameters, where ``z`` are input vectors (the
exported embeddings) and ``y`` are output vectors. Negatives are drawn from
a unigram^0.75 alias table with a counter-based RNG keyed by the pair's
position in the epoch, so single-worker runs are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from . import rng as rngmod
from .alias import build_alias
from .errors import MissingVertex, UnknownVertex
from .pairs import PairCorpus
from .walks import WalkCorpus


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.025
    epochs: int = 3
    batch_size: int = 200
    negatives_per_pair: int = 5
    noise_exponent: float = 0.75
    rng_seed: int = 0
    dim: int = 128
    workers: int = 1
    min_lr_fraction: float = 1e-4

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.negatives_per_pair < 1:
            raise ValueError("negatives_per_pair must be >= 1")
        if self.epochs < 1 or self.batch_size < 1 or self.dim < 1:
            raise ValueError("epochs, batch_size and dim must be positive")


class EmbeddingTable:
    """Input and output vectors for a set of vertex ids.

    Rows are stored in dense arrays; ``ids[i]`` owns row ``i``.
    """

    def __init__(self, ids, input_vectors: np.ndarray, output_vectors: np.ndarray | None = None):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.input = np.ascontiguousarray(input_vectors, dtype=np.float64)
        if output_vectors is None:
            output_vectors = np.zeros_like(self.input)
        self.output = np.ascontiguousarray(output_vectors, dtype=np.float64)
        if self.input.shape != self.output.shape or len(self.ids) != len(self.input):
            raise ValueError("ids, input and output shapes disagree")
        self.losses: list[float] = []
        self._reindex()

    def _reindex(self) -> None:
        bound = int(self.ids.max()) + 1 if len(self.ids) else 0
        self._lookup = np.full(bound, -1, dtype=np.int64)
        self._lookup[self.ids] = np.arange(len(self.ids))

    @property
    def dim(self) -> int:
        return self.input.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, v) -> bool:
        return 0 <= v < len(self._lookup) and self._lookup[v] >= 0

    def rows(self, vertices) -> np.ndarray:
        v = np.asarray(vertices, dtype=np.int64)
        ok = (v >= 0) & (v < len(self._lookup))
        r = np.full(v.shape, -1, dtype=np.int64)
        r[ok] = self._lookup[v[ok]]
        if (r < 0).any():
            missing = v[r < 0]
            raise UnknownVertex(f"vertices not in table: {missing[:5].tolist()}")
        return r

    def vector(self, v: int) -> np.ndarray:
        return self.input[self.rows([v])[0]]

    def matrix(self, vertices) -> np.ndarray:
        return self.input[self.rows(vertices)]

    @property
    def input_vectors(self) -> dict[int, np.ndarray]:
        return {int(v): self.input[i] for i, v in enumerate(self.ids)}

    @property
    def output_vectors(self) -> dict[int, np.ndarray]:
        return {int(v): self.output[i] for i, v in enumerate(self.ids)}

    def copy(self) -> "EmbeddingTable":
        t = EmbeddingTable(self.ids.copy(), self.input.copy(), self.output.copy())
        t.losses = list(self.losses)
        return t

    def extended(self, new_ids, seed: int) -> "EmbeddingTable":
        """Copy with randomly initialised rows appended for ``new_ids``."""
        new_ids = np.array(sorted(set(int(v) for v in new_ids) - set(self.ids.tolist())), dtype=np.int64)
        fresh = init_embeddings(new_ids, self.dim, seed)
        return EmbeddingTable(
            np.concatenate([self.ids, fresh.ids]),
            np.vstack([self.input, fresh.input]),
            np.vstack([self.output, fresh.output]),
        )

    def finite(self) -> bool:
        return bool(np.isfinite(self.input).all() and np.isfinite(self.output).all())

    # -- export -------------------------------------------------------------
    def save_text(self, path) -> None:
        """word2vec text format: ``count dim`` header, then ``id v1 .. vN``."""
        order = np.argsort(self.ids)
        with open(path, "w") as fh:
            fh.write(f"{len(self.ids)} {self.dim}\n")
            for i in order:
                vals = " ".join(f"{x:.6g}" for x in self.input[i])
                fh.write(f"{self.ids[i]} {vals}\n")

    @classmethod
    def load_text(cls, path) -> "EmbeddingTable":
        with open(path) as fh:
            count, dim = (int(x) for x in fh.readline().split())
            ids = np.empty(count, dtype=np.int64)
            vecs = np.empty((count, dim), dtype=np.float64)
            for i in range(count):
                parts = fh.readline().split()
                if len(parts) != dim + 1:
                    raise ValueError(f"{path}: row {i + 1} has {len(parts) - 1} values, expected {dim}")
                ids[i] = int(parts[0])
                vecs[i] = [float(x) for x in parts[1:]]
        return cls(ids, vecs)

    def save_npz(self, path) -> None:
        with open(path, "wb") as fh:
            np.savez(fh, ids=self.ids, input=self.input, output=self.output)

    @classmethod
    def load_npz(cls, path) -> "EmbeddingTable":
        z = np.load(path)
        return cls(z["ids"], z["input"], z["output"])


def init_embeddings(vertices, dim: int, seed=0) -> EmbeddingTable:
    """Inputs uniform in [-0.5/dim, 0.5/dim], outputs zero."""
    ids = np.array(sorted(int(v) for v in vertices), dtype=np.int64)
    g = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    bound = 0.5 / dim
    vecs = g.uniform(-bound, bound, size=(len(ids), dim))
    return EmbeddingTable(ids, vecs, np.zeros((len(ids), dim)))


def softmax_prob(t: int, c: int, table: EmbeddingTable) -> float:
    """Full softmax p(c | t) over all vertices using input vectors on both sides."""
    if t not in table or c not in table:
        raise UnknownVertex((t, c))
    z = table.input
    scores = z @ table.vector(t)
    scores -= scores.max()
    e = np.exp(scores)
    return float(e[table.rows([c])[0]] / e.sum())


class NoiseDistribution:
    """P(v) proportional to count(v)**exponent, sampled through an alias table."""

    def __init__(self, vertices, counts, exponent: float = 0.75):
        self.vertices = np.asarray(vertices, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.float64)
        keep = counts > 0
        self.vertices = self.vertices[keep]
        weights = counts[keep] ** exponent
        if len(weights) == 0:
            raise ValueError("noise distribution needs at least one vertex with a positive count")
        self.probabilities = weights / weights.sum()
        self.prob, self.alias = build_alias(weights)
        self.exponent = exponent

    def __len__(self) -> int:
        return len(self.vertices)

    def as_dict(self) -> dict[int, float]:
        return {int(v): float(p) for v, p in zip(self.vertices, self.probabilities)}

    def sample(self, size: int, seed: int = 0) -> np.ndarray:
        u = rngmod.uniforms(np.full(size, rngmod.seed_u64(seed)), np.arange(size, dtype=np.int64) * 2)
        u2 = rngmod.uniforms(np.full(size, rngmod.seed_u64(seed)), np.arange(size, dtype=np.int64) * 2 + 1)
        n = len(self.prob)
        i = np.minimum((u * n).astype(np.int64), n - 1)
        return self.vertices[np.where(u2 < self.prob[i], i, self.alias[i])]


def target_counts_from_walks(corpus: WalkCorpus, p: int) -> tuple[np.ndarray, np.ndarray]:
    """How often each vertex would be a target in ``generate_pairs(corpus, p)``.

    Computed from walk positions without materialising the pairs.
    """
    _, seq, lens = corpus.arrays()
    if len(seq) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    pos = np.arange(seq.shape[1])[None, :]
    per_pos = np.minimum(pos, p) + np.minimum(np.maximum(lens[:, None] - pos - 1, 0), p)
    valid = pos < lens[:, None]
    v = seq[valid]
    w = per_pos[valid]
    counts = np.bincount(v, weights=w)
    verts = np.flatnonzero(counts)
    return verts, counts[verts]


def build_noise_distribution(source, exponent: float = 0.75, window: int | None = None) -> NoiseDistribution:
    """Noise from a :class:`PairCorpus` (target counts) or a :class:`WalkCorpus`.

    For a walk corpus the counts are the target counts its pair corpus would
    have for ``window`` (default: the walk length).
    """
    if isinstance(source, PairCorpus):
        if len(source) == 0:
            raise ValueError("empty pair corpus")
        verts, counts = np.unique(source.targets, return_counts=True)
    elif isinstance(source, WalkCorpus):
        verts, counts = target_counts_from_walks(source, window or source.params.l)
    else:
        verts, counts = source
    return NoiseDistribution(verts, counts, exponent)


# -- numba kernels ---------------------------------------------------------

_GOLD = np.uint64(0x9E3779B97F4A7C15)


@numba.njit(cache=True, inline="always")
def _mix(x):
    z = x + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, inline="always")
def _unif(seed, counter):
    z = _mix(seed ^ (np.uint64(counter) * np.uint64(0x9E3779B97F4A7C15)))
    return np.float64(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True, inline="always")
def _softplus(x):
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@numba.njit(cache=True)
def _sgns_range(win, wout, t_rows, c_rows, order, lo, hi, k, noise_rows, aprob, aalias,
                fixed_negs, lr0, total, done0, min_frac, seed):
    dim = win.shape[1]
    grad_in = np.empty(dim)
    outs = np.empty(k + 1, dtype=np.int64)
    gs = np.empty(k + 1)
    nn = len(aprob)
    use_fixed = fixed_negs.shape[0] > 0
    loss = 0.0
    for j in range(lo, hi):
        idx = order[j]
        t = t_rows[idx]
        outs[0] = c_rows[idx]
        for m in range(k):
            if use_fixed:
                outs[m + 1] = fixed_negs[idx, m]
            else:
                ctr = np.uint64(done0 + j) * np.uint64(2 * k) + np.uint64(2 * m)
                u1 = _unif(seed, ctr)
                u2 = _unif(seed, ctr + np.uint64(1))
                i = int(u1 * nn)
                if i >= nn:
                    i = nn - 1
                if u2 >= aprob[i]:
                    i = aalias[i]
                outs[m + 1] = noise_rows[i]
        frac = 1.0 - (done0 + j) / total
        if frac < min_frac:
            frac = min_frac
        lr = lr0 * frac
        for m in range(k + 1):
            o = outs[m]
            s = 0.0
            for d in range(dim):
                s += win[t, d] * wout[o, d]
            if m == 0:
                loss += _softplus(-s)
                gs[m] = 1.0 / (1.0 + math.exp(-s)) - 1.0
            else:
                loss += _softplus(s)
                gs[m] = 1.0 / (1.0 + math.exp(-s))
        for d in range(dim):
            acc = 0.0
            for m in range(k + 1):
                acc += gs[m] * wout[outs[m], d]
            grad_in[d] = acc
        for m in range(k + 1):
            o = outs[m]
            step = lr * gs[m]
            for d in range(dim):
                wout[o, d] -= step * win[t, d]
        for d in range(dim):
            win[t, d] -= lr * grad_in[d]
    return loss


@numba.njit(cache=True, parallel=True)
def _sgns_parallel(win, wout, t_rows, c_rows, order, k, noise_rows, aprob, aalias,
                   fixed_negs, lr0, total, done0, min_frac, seed, chunk):
    n = len(order)
    nchunks = (n + chunk - 1) // chunk
    losses = np.zeros(nchunks)
    for ci in numba.prange(nchunks):
        lo = ci * chunk
        hi = min(n, lo + chunk)
        losses[ci] = _sgns_range(win, wout, t_rows, c_rows, order, lo, hi, k, noise_rows,
                                 aprob, aalias, fixed_negs, lr0, total, done0, min_frac, seed)
    return losses.sum()


def _run_kernel(table, t_rows, c_rows, order, cfg, noise, lr0, total, done0, seed, fixed_negs=None):
    k = cfg.negatives_per_pair
    if fixed_negs is None:
        fixed = np.zeros((0, k), dtype=np.int64)
    else:
        fixed = np.ascontiguousarray(fixed_negs, dtype=np.int64)
    noise_rows = table.rows(noise.vertices)
    args = (table.input, table.output, t_rows, c_rows, order)
    tail = (k, noise_rows, noise.prob, noise.alias, fixed, float(lr0), float(total),
            int(done0), float(cfg.min_lr_fraction), np.uint64(rngmod.seed_u64(seed)))
    if cfg.workers > 1 and fixed_negs is None:
        numba.set_num_threads(min(cfg.workers, numba.config.NUMBA_NUM_THREADS))
        return _sgns_parallel(*args, *tail, max(cfg.batch_size, 1))
    return _sgns_range(*args, 0, len(order), *tail)


def negative_sampling_step(pairs, table: EmbeddingTable, cfg: TrainConfig,
                           noise: NoiseDistribution, negatives=None, learning_rate: float | None = None,
                           seed: int | None = None):
    """Apply one SGD update per pair, in order, at a constant learning rate.

    ``pairs`` is a :class:`PairCorpus` or a sequence of (target, context).
    ``negatives`` optionally fixes the noise vertices, shape (len(pairs), k).
    Returns ``(table, mean pair loss)``; ``table`` is updated in place.
    """
    if isinstance(pairs, PairCorpus):
        t, c = pairs.targets, pairs.contexts
    else:
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        t, c = arr[:, 0], arr[:, 1]
    if len(t) == 0:
        return table, 0.0
    t_rows, c_rows = table.rows(t), table.rows(c)
    neg_rows = None
    if negatives is not None:
        neg_rows = table.rows(np.asarray(negatives, dtype=np.int64).reshape(len(t), -1))
        if neg_rows.shape[1] != cfg.negatives_per_pair:
            raise ValueError("negatives must have negatives_per_pair columns")
    lr = cfg.learning_rate if learning_rate is None else learning_rate
    order = np.arange(len(t), dtype=np.int64)
    # total=inf keeps the rate constant
    loss = _run_kernel(table, t_rows, c_rows, order, cfg, noise, lr, np.inf, 0,
                       cfg.rng_seed if seed is None else seed, neg_rows)
    return table, loss / len(t)


def pair_loss(table: EmbeddingTable, t: int, c: int, negatives) -> float:
    """Negative-sampling loss of one pair with given negatives (no update)."""
    z = table.vector(t)
    yc = table.output[table.rows([c])[0]]
    yn = table.output[table.rows(negatives)]
    pos = np.logaddexp(0.0, -(z @ yc))
    neg = np.logaddexp(0.0, yn @ z).sum()
    return float(pos + neg)


def _train(table: EmbeddingTable, pairs: PairCorpus, cfg: TrainConfig, noise: NoiseDistribution) -> EmbeddingTable:
    n = len(pairs)
    if n == 0:
        return table
    t_rows, c_rows = table.rows(pairs.targets), table.rows(pairs.contexts)
    total = float(n * cfg.epochs)
    for epoch in range(cfg.epochs):
        shuffler = np.random.default_rng([cfg.rng_seed & 0xFFFFFFFF, epoch])
        order = shuffler.permutation(n).astype(np.int64)
        seed = rngmod.derive_seed(cfg.rng_seed, 7, epoch)
        loss = _run_kernel(table, t_rows, c_rows, order, cfg, noise, cfg.learning_rate, total, epoch * n, seed)
        table.losses.append(loss / n)
    return table


def train_full(pairs: PairCorpus, vertices, cfg: TrainConfig, noise: NoiseDistribution | None = None) -> EmbeddingTable:
    """U1: fresh random table, ``cfg.epochs`` shuffled passes over all pairs."""
    vertices = set(int(v) for v in vertices) | set(pairs.vertices().tolist())
    table = init_embeddings(vertices, cfg.dim, cfg.rng_seed)
    if len(pairs) == 0:
        return table
    if noise is None:
        noise = build_noise_distribution(pairs, cfg.noise_exponent)
    return _train(table, pairs, cfg, noise)


def train_warm_start(prev: EmbeddingTable, new_vertices, update_pairs: PairCorpus, cfg: TrainConfig,
                     noise: NoiseDistribution | None = None) -> EmbeddingTable:
    """U2: fine-tune a copy of ``prev`` on ``update_pairs`` only.

    New vertices get fresh random rows. ``noise`` should describe the whole
    current corpus; when omitted it is built from ``update_pairs``.
    """
    new_vertices = set(int(v) for v in new_vertices)
    known = set(prev.ids.tolist()) | new_vertices
    if len(update_pairs):
        seen = set(update_pairs.vertices().tolist())
        missing = seen - known
        if missing:
            raise MissingVertex(f"update pairs reference unknown vertices {sorted(missing)[:5]}")
    table = prev.extended(new_vertices, rngmod.derive_seed(cfg.rng_seed, 11))
    table.losses = []
    if len(update_pairs) == 0:
        return table
    if noise is None:
        noise = build_noise_distribution(update_pairs, cfg.noise_exponent)
    else:
        keep = np.array([v in table for v in noise.vertices.tolist()])
        if not keep.all():
            noise = NoiseDistribution(noise.vertices[keep], noise.probabilities[keep], 1.0)
    return _train(table, update_pairs, cfg, noise)
