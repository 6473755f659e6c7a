"""Finite undirected multigraphs, BFS distances, closed metric balls and nets.

Vertices are ``0..n-1``.  Edges keep their insertion order, so edge ids are
stable; parallel edges and loops are allowed and reported through
:attr:`Graph.is_simple`.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import PreconditionError

INF = math.inf


class Graph:
    """Immutable multigraph with per-vertex ``(neighbor, edge_id)`` lists.

    A loop at ``v`` appears twice in ``adjacency[v]`` and contributes 2 to
    the degree, matching the dart count of the loop.
    """

    def __init__(self, vertex_count: int, edges: Iterable[tuple[int, int]]):
        n = int(vertex_count)
        if n < 0:
            raise PreconditionError(f"vertex count must be non-negative, got {n}")
        edge_list = []
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for eid, (u, v) in enumerate(edges):
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise PreconditionError(f"edge {eid}=({u},{v}) has an endpoint outside 0..{n - 1}")
            edge_list.append((u, v))
            adjacency[u].append((v, eid))
            adjacency[v].append((u, eid))
        self.vertex_count = n
        self.edges = tuple(edge_list)
        self.adjacency = tuple(tuple(a) for a in adjacency)
        self._degrees = tuple(len(a) for a in adjacency)

    # -- basic queries -------------------------------------------------
    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return self._degrees[v]

    @property
    def degrees(self) -> tuple[int, ...]:
        return self._degrees

    @property
    def max_degree(self) -> int:
        return max(self._degrees, default=0)

    def neighbors(self, v: int) -> list[int]:
        return [w for w, _ in self.adjacency[v]]

    @cached_property
    def has_loops(self) -> bool:
        return any(u == v for u, v in self.edges)

    @cached_property
    def has_parallel_edges(self) -> bool:
        seen = set()
        for u, v in self.edges:
            key = (min(u, v), max(u, v))
            if key in seen:
                return True
            seen.add(key)
        return False

    @property
    def is_simple(self) -> bool:
        return not (self.has_loops or self.has_parallel_edges)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` of the adjacency lists, for vectorised walks."""
        indptr = np.zeros(self.vertex_count + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(self._degrees)
        indices = np.fromiter(
            (w for a in self.adjacency for w, _ in a), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.edges:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        arr = np.asarray(self.edges, dtype=np.int64)
        return arr[:, 0], arr[:, 1]

    def laplacian(self, normalized: bool = False):
        """Sparse combinatorial (``D - A``) or normalized Laplacian; loops are ignored."""
        import scipy.sparse as sp

        a, b = self.edge_arrays()
        keep = a != b
        a, b = a[keep], b[keep]
        n = self.vertex_count
        adj = sp.coo_matrix(
            (np.ones(2 * len(a)), (np.concatenate([a, b]), np.concatenate([b, a]))), shape=(n, n)
        ).tocsr()
        deg = np.asarray(adj.sum(axis=1)).ravel()
        lap = sp.diags(deg) - adj
        if not normalized:
            return lap.tocsr()
        with np.errstate(divide="ignore"):
            inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(deg), 0.0)
        d = sp.diags(inv_sqrt)
        return (d @ lap @ d).tocsr()

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.vertex_count == other.vertex_count and self.edges == other.edges

    def __hash__(self):
        return hash((self.vertex_count, self.edges))

    def __repr__(self):
        return f"Graph(n={self.vertex_count}, m={self.edge_count})"

    # -- serialization -------------------------------------------------
    def to_edge_list(self) -> str:
        lines = [f"{self.vertex_count} {self.edge_count}"]
        lines.extend(f"{u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or len(rows[0]) != 2:
            raise PreconditionError("edge list must start with a 'n m' header")
        n, m = int(rows[0][0]), int(rows[0][1])
        body = rows[1:]
        if len(body) != m:
            raise PreconditionError(f"header announces {m} edges, found {len(body)}")
        edges = []
        for row in body:
            if len(row) != 2:
                raise PreconditionError(f"malformed edge line: {' '.join(row)!r}")
            edges.append((int(row[0]), int(row[1])))
        return cls(n, edges)


def build_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    return Graph(n, edges)


@dataclass(frozen=True)
class RootedSubgraph:
    """Induced closed ball ``B(root, depth)`` relabelled so that local ids are BFS order.

    ``original_ids[i]`` is the parent-graph id of local vertex ``i``; the
    root is always local vertex 0.
    """

    graph: Graph
    root: int
    depth: int
    original_ids: tuple[int, ...]
    distances: tuple[int, ...] = field(default=())

    @property
    def vertex_count(self) -> int:
        return self.graph.vertex_count


def _check_vertex(g: Graph, v: int, what: str = "vertex") -> None:
    if not (0 <= v < g.vertex_count):
        raise PreconditionError(f"{what} {v} outside 0..{g.vertex_count - 1}")


def _bfs(g: Graph, sources: Sequence[int], limit: float = INF) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if dv >= limit:
            continue
        for w, _ in g.adjacency[v]:
            if w not in dist:
                dist[w] = dv + 1
                queue.append(w)
    return dist


def distances_from(g: Graph, source: int) -> np.ndarray:
    """Exact BFS distances as floats; unreachable vertices are ``inf``."""
    _check_vertex(g, source, "source")
    out = np.full(g.vertex_count, INF)
    for v, d in _bfs(g, [source]).items():
        out[v] = d
    return out


def multi_source_distances(g: Graph, sources: Iterable[int]) -> np.ndarray:
    srcs = sorted(set(sources))
    for s in srcs:
        _check_vertex(g, s, "source")
    out = np.full(g.vertex_count, INF)
    for v, d in _bfs(g, srcs).items():
        out[v] = d
    return out


def ball(g: Graph, root: int, r: int) -> RootedSubgraph:
    """Induced subgraph on ``{v : d(root, v) <= r}``."""
    _check_vertex(g, root, "root")
    if r < 0:
        raise PreconditionError(f"radius must be non-negative, got {r}")
    dist = _bfs(g, [root], limit=r)
    order = sorted(dist, key=lambda v: (dist[v], v))
    local = {v: i for i, v in enumerate(order)}
    edges = [
        (local[u], local[v]) for u, v in g.edges if u in local and v in local
    ]
    sub = Graph(len(order), edges)
    return RootedSubgraph(sub, 0, r, tuple(order), tuple(dist[v] for v in order))


def sphere(g: Graph, root: int, r: int) -> list[int]:
    d = distances_from(g, root)
    return [int(v) for v in np.flatnonzero(d == r)]


def connected_components(g: Graph) -> list[list[int]]:
    seen = [False] * g.vertex_count
    comps = []
    for s in range(g.vertex_count):
        if seen[s]:
            continue
        comp = list(_bfs(g, [s]))
        for v in comp:
            seen[v] = True
        comps.append(sorted(comp))
    return comps


def is_connected(g: Graph) -> bool:
    if g.vertex_count == 0:
        return True
    return len(_bfs(g, [0])) == g.vertex_count


def maximal_net(g: Graph, r: int, seed: int | None = None) -> list[int]:
    """Greedy maximal ``r``-net: pairwise distances ``>= r``, and nothing can be added.

    With ``seed=None`` vertices are scanned in id order, otherwise in a
    permutation drawn from ``numpy.random.default_rng(seed)``.
    """
    if r < 1:
        raise PreconditionError(f"net separation must be >= 1, got {r}")
    order = range(g.vertex_count) if seed is None else np.random.default_rng(seed).permutation(g.vertex_count)
    blocked = [False] * g.vertex_count
    net = []
    for v in order:
        v = int(v)
        if blocked[v]:
            continue
        net.append(v)
        for w in _bfs(g, [v], limit=r - 1):
            blocked[w] = True
    return sorted(net)


def eccentricity(g: Graph, v: int) -> float:
    return float(distances_from(g, v).max(initial=0))


def relabel(g: Graph, perm: Sequence[int]) -> Graph:
    """Graph with vertex ``v`` renamed to ``perm[v]``."""
    return Graph(g.vertex_count, [(perm[u], perm[v]) for u, v in g.edges])


def delete_edges(g: Graph, edge_ids: Iterable[int]) -> Graph:
    drop = set(edge_ids)
    return Graph(g.vertex_count, [e for i, e in enumerate(g.edges) if i not in drop])
