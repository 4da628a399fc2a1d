"""Vose alias tables for O(1) sampling from a fixed discrete distribution."""

from __future__ import annotations

import numpy as np


def build_alias(weights) -> tuple[np.ndarray, np.ndarray]:
    """Return (prob, alias) arrays for ``weights`` (need not be normalised).

    Draw with ``i = floor(u1 * n)`` then keep ``i`` if ``u2 < prob[i]``,
    otherwise take ``alias[i]``.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) == 0:
        raise ValueError("weights must be a non-empty 1-D array")
    if (w < 0).any() or not np.isfinite(w).all():
        raise ValueError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights sum to zero")
    n = len(w)
    scaled = w * (n / total)
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    # leftovers are 1 up to rounding
    for i in small + large:
        prob[i] = 1.0
        alias[i] = i
    return prob, alias


def alias_draw(prob: np.ndarray, alias: np.ndarray, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    n = len(prob)
    i = np.minimum((u1 * n).astype(np.int64), n - 1)
    return np.where(u2 < prob[i], i, alias[i])


class AliasTable:
    """Sampler over ``values`` with probability proportional to ``weights``."""

    def __init__(self, values, weights):
        self.values = np.asarray(values)
        self.prob, self.alias = build_alias(weights)
        w = np.asarray(weights, dtype=np.float64)
        self.probabilities = w / w.sum()

    def __len__(self) -> int:
        return len(self.values)

    def sample_indices(self, size, rng: np.random.Generator) -> np.ndarray:
        u1 = rng.random(size)
        u2 = rng.random(size)
        return alias_draw(self.prob, self.alias, u1, u2)

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        return self.values[self.sample_indices(size, rng)]
