"""Dataset discovery and loading.

A dataset is a directory holding ``edges.txt`` (``u v`` per line) and,
optionally, ``labels.txt`` (``vertex class`` per line, repeated for
multi-label). Named datasets (``cora``, ``cocit``, ``blogcatalog``,
``wikipedia``) are looked up under ``$DYNWALK_DATA`` (default ``./data``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetNotFound
from .evaluation import LabelSet
from .graph import DynamicGraph, IdMap, norm_edge, read_edge_pairs

DATA_ENV = "DYNWALK_DATA"
EDGE_FILES = ("edges.txt", "edgelist.txt", "edges.csv")
LABEL_FILES = ("labels.txt", "group-edges.txt")

# published sizes of the reference datasets: (|V|, |E|, classes)
REFERENCE_SIZES = {
    "cora": (2485, 5069, 7),
    "wikipedia": (2357, 11592, 17),
    "blogcatalog": (10312, 333983, 39),
    "cocit": (42452, 194410, 15),
}


@dataclass
class Dataset:
    name: str
    graph: DynamicGraph
    edges: list[tuple[int, int]]
    labels: LabelSet | None
    id_map: IdMap

    @property
    def num_edges(self) -> int:
        return len(self.edges)


def data_root() -> Path:
    return Path(os.environ.get(DATA_ENV, "data"))


def find_dataset_dir(name_or_path) -> Path:
    p = Path(name_or_path)
    candidates = list(dict.fromkeys([p, data_root() / str(name_or_path), data_root() / str(name_or_path).lower()]))
    for c in candidates:
        if c.is_dir() and any((c / f).exists() for f in EDGE_FILES):
            return c
    raise DatasetNotFound(
        f"dataset {str(name_or_path)!r} not found; looked in "
        + ", ".join(str(c) for c in candidates)
        + f". Put edges.txt (and labels.txt) in $"
        + DATA_ENV
        + f"/{name_or_path}/"
    )


def load_dataset(name_or_path) -> Dataset:
    d = find_dataset_dir(name_or_path)
    edge_file = next(d / f for f in EDGE_FILES if (d / f).exists())
    raw, ids = read_edge_pairs(edge_file)
    seen = set()
    edges = []
    for u, v in raw:
        e = norm_edge(u, v)
        if e not in seen:
            seen.add(e)
            edges.append(e)
    graph = DynamicGraph(range(len(ids)), edges)
    labels = None
    for f in LABEL_FILES:
        if (d / f).exists():
            labels = LabelSet.load(d / f, id_map=ids)
            break
    return Dataset(Path(d).name, graph, edges, labels, ids)


def from_graph(name: str, graph: DynamicGraph, labels: LabelSet | None = None) -> Dataset:
    """Wrap an in-memory graph as a dataset (ids are used as labels)."""
    ids = IdMap()
    for v in range(graph.id_bound):
        ids(str(v))
    return Dataset(name, graph, sorted(graph.edges()), labels, ids)


def fig1_graph() -> DynamicGraph:
    """Path A-B-C with A, B, C = 0, 1, 2."""
    return DynamicGraph([0, 1, 2], [(0, 1), (1, 2)])


def planted_partition(sizes, p_in: float, p_out: float, seed: int = 0) -> Dataset:
    """Labelled stochastic block model graph, one class per block."""
    import networkx as nx

    k = len(sizes)
    probs = [[p_in if i == j else p_out for j in range(k)] for i in range(k)]
    G = nx.stochastic_block_model(list(sizes), probs, seed=seed)
    block = np.repeat(np.arange(k), sizes)
    graph = DynamicGraph(range(sum(sizes)), G.edges())
    labels = LabelSet({v: {int(block[v])} for v in range(sum(sizes))}, k)
    return from_graph("planted", graph, labels)
