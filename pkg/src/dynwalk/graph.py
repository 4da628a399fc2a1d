"""Dynamic undirected graph with snapshot deltas.

Vertices are dense non-negative integers. A :class:`DynamicGraph` is treated
as immutable once built: :func:`apply_delta` returns a new snapshot and leaves
its input untouched, so walk generation can read one snapshot while the next
one is being prepared.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EmptyGraph, InvalidDelta, ParseError, SelfLoop, UnknownVertex

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    u, v = int(u), int(v)
    return (u, v) if u <= v else (v, u)


class DynamicGraph:
    """Undirected, unweighted graph snapshot.

    ``retired`` holds ids deleted in earlier snapshots; they may not be added
    again within the same run.
    """

    def __init__(
        self,
        vertices: Iterable[int] = (),
        edges: Iterable[Edge] = (),
        snapshot_index: int = 0,
        retired: Iterable[int] = (),
    ):
        self.adjacency: dict[int, set[int]] = {int(v): set() for v in vertices}
        self.snapshot_index = snapshot_index
        self.retired: frozenset[int] = frozenset(retired)
        self._num_edges = 0
        self._csr = None
        for u, v in edges:
            self._add_edge(int(u), int(v))

    def _add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise SelfLoop(f"self-loop on vertex {u}")
        adj = self.adjacency
        adj.setdefault(u, set())
        adj.setdefault(v, set())
        if v not in adj[u]:
            adj[u].add(v)
            adj[v].add(u)
            self._num_edges += 1

    # -- read-only views -------------------------------------------------
    @property
    def vertices(self) -> set[int]:
        return set(self.adjacency)

    def __contains__(self, v) -> bool:
        return v in self.adjacency

    def __len__(self) -> int:
        return len(self.adjacency)

    @property
    def num_vertices(self) -> int:
        return len(self.adjacency)

    @property
    def num_edges(self) -> int:
        return self._num_edges

    def edges(self) -> Iterator[Edge]:
        for u, nbrs in self.adjacency.items():
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def edge_set(self) -> set[Edge]:
        return set(self.edges())

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency.get(u, ())

    def degree(self, v: int) -> int:
        try:
            return len(self.adjacency[v])
        except KeyError:
            raise UnknownVertex(v) from None

    def neighbors(self, v: int) -> list[int]:
        try:
            return sorted(self.adjacency[v])
        except KeyError:
            raise UnknownVertex(v) from None

    def density(self) -> float:
        """2|E| / (|V|(|V|-1)); zero when fewer than two vertices."""
        n = len(self.adjacency)
        if n < 2:
            return 0.0
        return 2.0 * self._num_edges / (n * (n - 1))

    @property
    def id_bound(self) -> int:
        """One past the largest vertex id ever used in this run."""
        hi = max(self.adjacency, default=-1)
        if self.retired:
            hi = max(hi, max(self.retired))
        return hi + 1

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) over ids ``0..id_bound-1``; neighbours sorted.

        Ids that are not live have degree zero. Cached per snapshot.
        """
        if self._csr is None:
            n = self.id_bound
            deg = np.zeros(n, dtype=np.int64)
            for v, nbrs in self.adjacency.items():
                deg[v] = len(nbrs)
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(deg, out=indptr[1:])
            indices = np.empty(indptr[-1], dtype=np.int64)
            for v, nbrs in self.adjacency.items():
                if nbrs:
                    indices[indptr[v]:indptr[v + 1]] = sorted(nbrs)
            self._csr = (indptr, indices)
        return self._csr

    def live_mask(self) -> np.ndarray:
        mask = np.zeros(self.id_bound, dtype=bool)
        if self.adjacency:
            mask[np.fromiter(self.adjacency, dtype=np.int64)] = True
        return mask

    def copy(self) -> "DynamicGraph":
        g = DynamicGraph.__new__(DynamicGraph)
        g.adjacency = {v: set(n) for v, n in self.adjacency.items()}
        g.snapshot_index = self.snapshot_index
        g.retired = self.retired
        g._num_edges = self._num_edges
        g._csr = None
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, DynamicGraph):
            return NotImplemented
        return (
            self.adjacency == other.adjacency
            and self.snapshot_index == other.snapshot_index
        )

    def __repr__(self) -> str:
        return (
            f"DynamicGraph(|V|={self.num_vertices}, |E|={self.num_edges}, "
            f"t={self.snapshot_index})"
        )


@dataclass
class GraphDelta:
    """Changes between two snapshots.

    Edges are stored as ``(min, max)`` tuples regardless of input order.
    """

    added_vertices: set[int] = field(default_factory=set)
    deleted_vertices: set[int] = field(default_factory=set)
    added_edges: set[Edge] = field(default_factory=set)
    deleted_edges: set[Edge] = field(default_factory=set)

    def __post_init__(self):
        self.added_vertices = {int(v) for v in self.added_vertices}
        self.deleted_vertices = {int(v) for v in self.deleted_vertices}
        self.added_edges = {norm_edge(*e) for e in self.added_edges}
        self.deleted_edges = {norm_edge(*e) for e in self.deleted_edges}

    def is_empty(self) -> bool:
        return not (
            self.added_vertices or self.deleted_vertices
            or self.added_edges or self.deleted_edges
        )

    def validate(self, g: DynamicGraph) -> None:
        if self.added_vertices & self.deleted_vertices:
            raise InvalidDelta("vertex both added and deleted")
        if self.added_edges & self.deleted_edges:
            raise InvalidDelta("edge both added and deleted")
        for v in self.deleted_vertices:
            if v not in g:
                raise InvalidDelta(f"deleted vertex {v} not in graph")
        for v in self.added_vertices:
            if v < 0:
                raise InvalidDelta(f"negative vertex id {v}")
            if v in g:
                raise InvalidDelta(f"added vertex {v} already in graph")
            if v in g.retired:
                raise InvalidDelta(f"vertex id {v} was retired and cannot be reused")
        for u, v in self.deleted_edges:
            if not g.has_edge(u, v):
                raise InvalidDelta(f"deleted edge ({u}, {v}) not in graph")
        for u, v in self.added_edges:
            if u == v:
                raise InvalidDelta(f"self-loop ({u}, {v})")
            for x in (u, v):
                live = x in g and x not in self.deleted_vertices
                if not (live or x in self.added_vertices):
                    raise InvalidDelta(f"added edge ({u}, {v}) has unknown endpoint {x}")
            if g.has_edge(u, v):
                raise InvalidDelta(f"added edge ({u}, {v}) already in graph")


def resolve_delta(g: DynamicGraph, d: GraphDelta) -> GraphDelta:
    """Return ``d`` with edges incident to deleted vertices made explicit."""
    implicit = {norm_edge(v, u) for v in d.deleted_vertices for u in g.adjacency.get(v, ())}
    return GraphDelta(
        added_vertices=set(d.added_vertices),
        deleted_vertices=set(d.deleted_vertices),
        added_edges=set(d.added_edges),
        deleted_edges=d.deleted_edges | implicit,
    )


def apply_delta(g: DynamicGraph, d: GraphDelta) -> DynamicGraph:
    """Produce the next snapshot. ``g`` is not modified."""
    d.validate(g)
    out = g.copy()
    adj = out.adjacency
    for u, v in resolve_delta(g, d).deleted_edges:
        adj[u].discard(v)
        adj[v].discard(u)
        out._num_edges -= 1
    for v in d.deleted_vertices:
        del adj[v]
    for v in d.added_vertices:
        adj[v] = set()
    for u, v in d.added_edges:
        out._add_edge(u, v)
    out.retired = g.retired | frozenset(d.deleted_vertices)
    out.snapshot_index = g.snapshot_index + 1
    return out


def affected_vertices(d: GraphDelta, g: DynamicGraph | None = None) -> set[int]:
    """Endpoints of added and deleted edges, minus deleted vertices.

    When the pre-update graph ``g`` is given, edges implicitly removed with a
    deleted vertex count as deleted edges too.
    """
    if g is not None:
        d = resolve_delta(g, d)
    touched = {x for e in d.added_edges for x in e}
    touched.update(x for e in d.deleted_edges for x in e)
    return touched - d.deleted_vertices


def connected_component_labels(g: DynamicGraph) -> tuple[np.ndarray, np.ndarray]:
    """Return (live vertex ids sorted, component label per vertex)."""
    ids = np.array(sorted(g.adjacency), dtype=np.int64)
    indptr, indices = g.csr()
    n = g.id_bound
    mat = csr_matrix((np.ones(len(indices), dtype=np.int8), indices, indptr), shape=(n, n))
    _, labels = connected_components(mat, directed=False)
    return ids, labels[ids]


def largest_connected_component(g: DynamicGraph) -> set[int]:
    """Vertex set of the largest component; ties go to the smallest vertex id."""
    if not g.adjacency:
        raise EmptyGraph("graph has no vertices")
    ids, labels = connected_component_labels(g)
    # compact labels; non-live ids own components of their own
    # ids are sorted so the first occurrence of a label is its smallest member
    _, first, comp = np.unique(labels, return_index=True, return_inverse=True)
    sizes = np.bincount(comp)
    best = min(np.flatnonzero(sizes == sizes.max()), key=lambda c: ids[first[c]])
    return set(ids[comp == best].tolist())


def degree(g: DynamicGraph, v: int) -> int:
    return g.degree(v)


def neighbors(g: DynamicGraph, v: int) -> list[int]:
    return g.neighbors(v)


def density(g: DynamicGraph) -> float:
    return g.density()


# -- edge-list I/O ---------------------------------------------------------

class IdMap:
    """Maps external vertex labels onto dense ids, allocated on first lookup."""

    def __init__(self):
        self.to_id: dict[str, int] = {}
        self.labels: list[str] = []

    def __call__(self, label: str) -> int:
        vid = self.to_id.get(label)
        if vid is None:
            vid = len(self.labels)
            self.to_id[label] = vid
            self.labels.append(label)
        return vid

    def __len__(self) -> int:
        return len(self.labels)

    def is_identity(self) -> bool:
        return all(lab == str(i) for i, lab in enumerate(self.labels))

    def write(self, path) -> None:
        with open(path, "w") as fh:
            for i, lab in enumerate(self.labels):
                fh.write(f"{lab} {i}\n")

    @classmethod
    def read(cls, path) -> "IdMap":
        m = cls()
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    lab, vid = line.split()
                    assert m(lab) == int(vid)
        return m


def _open_text(source) -> TextIO:
    if isinstance(source, io.TextIOBase):
        return source
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        return open(source)
    if isinstance(source, str):
        return io.StringIO(source)
    raise TypeError(f"cannot read edge list from {type(source).__name__}")


def read_edge_pairs(source) -> tuple[list[Edge], IdMap]:
    """Parse ``u v`` lines into dense-id edges (duplicates kept, order kept).

    ``source`` is a path, an open text stream, or the text itself. Integer
    labels are ranked numerically, so ids that are already dense map to
    themselves; any other labels get ids in first-seen order.
    """
    raw: list[tuple[str, str]] = []
    fh = _open_text(source)
    try:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ParseError(f"expected 'u v', got {line!r}", lineno)
            a, b = parts[0], parts[1]
            if a == b:
                raise SelfLoop(f"self-loop on {a}", lineno)
            raw.append((a, b))
    finally:
        if fh is not source:
            fh.close()
    ids = IdMap()
    labels = {x for pair in raw for x in pair}
    try:
        ordered = sorted(labels, key=int)
    except ValueError:
        ordered = None
    if ordered is not None:
        for lab in ordered:
            ids(lab)
    edges = [(ids(a), ids(b)) for a, b in raw]
    return edges, ids


def load_edge_list(source, return_ids: bool = False):
    """Load an undirected graph from whitespace-separated ``u v`` lines.

    Integer labels that are already dense map to themselves.
    """
    edges, ids = read_edge_pairs(source)
    g = DynamicGraph(range(len(ids)), (norm_edge(u, v) for u, v in edges))
    if return_ids:
        return g, ids
    return g


def write_edge_list(g: DynamicGraph, path) -> None:
    with open(path, "w") as fh:
        for u, v in sorted(g.edges()):
            fh.write(f"{u} {v}\n")
