"""Counter-based random streams.

Every random draw is a pure function of integer keys (corpus seed, walk id,
generation, step position), built from the splitmix64 finaliser. This makes
walk generation independent of processing order and worker count, and a
walk can be replayed from its stored seed alone.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

_MASK = (1 << 64) - 1


def mix64(x) -> np.ndarray:
    """splitmix64 finaliser applied elementwise to uint64 input."""
    z = np.asarray(x, dtype=np.uint64) + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _u64(x) -> np.ndarray:
    x = np.asarray(x)
    if x.dtype == np.uint64:
        return x
    return (x.astype(np.int64)).astype(np.uint64)


def seed_u64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & _MASK)


def walk_seeds(corpus_seed: int, walk_ids, generation=0) -> np.ndarray:
    """Per-walk stream seed from (corpus_seed, walk_id, generation)."""
    base = mix64(np.array([seed_u64(corpus_seed)]))[0]
    h = mix64(base ^ _u64(walk_ids))
    return mix64(h ^ (_u64(generation) * _M2))


def uniforms(seeds, positions) -> np.ndarray:
    """Uniform [0, 1) draw for each (seed, position) pair."""
    z = mix64(_u64(seeds) ^ (_u64(positions) * _GOLDEN))
    return (z >> _S11).astype(np.float64) * _INV53


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed for a named sub-stream."""
    h = seed_u64(seed)
    for k in keys:
        h = mix64(np.array([h ^ seed_u64(k)]))[0]
    return int(h)
