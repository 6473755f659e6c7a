"""Graph families used by the experiments.

Grids come with their natural rotation system (counterclockwise order
east, north, west, south), which embeds the planar grid in the sphere and
the torus grid in the torus.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import RotationSystem
from .errors import PreconditionError
from .graph import Graph

MAX_RESTARTS = 10_000


def _grid(n: int, wrap: bool) -> tuple[Graph, RotationSystem]:
    def vid(i, j):
        return (i % n) * n + (j % n)

    edges = []
    slots: list[dict[str, int]] = [dict() for _ in range(n * n)]
    for i in range(n):
        for j in range(n):
            if wrap or j + 1 < n:  # east
                e = len(edges)
                edges.append((vid(i, j), vid(i, j + 1)))
                slots[vid(i, j)]["E"] = 2 * e
                slots[vid(i, j + 1)]["W"] = 2 * e + 1
            if wrap or i + 1 < n:  # north
                e = len(edges)
                edges.append((vid(i, j), vid(i + 1, j)))
                slots[vid(i, j)]["N"] = 2 * e
                slots[vid(i + 1, j)]["S"] = 2 * e + 1
    rotations = [[s[k] for k in "ENWS" if k in s] for s in slots]
    g = Graph(n * n, edges)
    return g, RotationSystem.from_graph(g, rotations)


def torus_grid(n: int) -> tuple[Graph, RotationSystem]:
    """``C_n x C_n`` embedded in the torus; vertex ``(i, j)`` is ``i * n + j``."""
    if n < 3:
        raise PreconditionError(f"torus grid needs n >= 3, got {n}")
    return _grid(n, wrap=True)


def planar_grid(n: int) -> tuple[Graph, RotationSystem]:
    """``n x n`` grid embedded in the sphere."""
    if n < 2:
        raise PreconditionError(f"planar grid needs n >= 2, got {n}")
    return _grid(n, wrap=False)


def path(n: int) -> Graph:
    if n < 1:
        raise PreconditionError("path needs n >= 1")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise PreconditionError("cycle needs n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    if n < 1:
        raise PreconditionError("complete graph needs n >= 1")
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def binary_tree(depth: int) -> Graph:
    """Complete binary tree with levels ``0..depth``; children of ``v`` are ``2v+1, 2v+2``."""
    if depth < 0:
        raise PreconditionError("depth must be non-negative")
    n = 2 ** (depth + 1) - 1
    return Graph(n, [((v - 1) // 2, v) for v in range(1, n)])


def random_regular(n: int, d: int, seed=None, max_restarts: int = MAX_RESTARTS) -> Graph:
    """Simple ``d``-regular graph from the pairing model, restarting on any loop or repeated edge."""
    if d < 3:
        raise PreconditionError(f"degree must be at least 3, got {d}")
    if (n * d) % 2:
        raise PreconditionError(f"n*d must be even, got n={n}, d={d}")
    if d >= n:
        raise PreconditionError(f"degree {d} needs more than {n} vertices")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(max_restarts):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        u, v = pairs.min(axis=1), pairs.max(axis=1)
        if np.any(u == v):
            continue
        keys = u * n + v
        if np.unique(keys).size != keys.size:
            continue
        order = np.argsort(keys, kind="stable")
        return Graph(n, list(zip(u[order].tolist(), v[order].tolist())))
    raise PreconditionError(f"no simple pairing found in {max_restarts} restarts")


KINDS = ("planar_grid", "torus_grid", "path", "cycle", "complete", "binary_tree", "random_regular")


@dataclass(frozen=True)
class FamilySpec:
    """A named family member, e.g. ``FamilySpec('random_regular', {'n': 200, 'd': 3}, seed=4)``."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown family kind {self.kind!r}; expected one of {KINDS}")

    def build(self) -> Graph:
        p = dict(self.params)
        if self.kind == "planar_grid":
            return planar_grid(p.pop("n"))[0]
        if self.kind == "torus_grid":
            return torus_grid(p.pop("n"))[0]
        if self.kind == "random_regular":
            return random_regular(p["n"], p.get("d", 3), self.seed)
        if self.kind == "binary_tree":
            return binary_tree(p["depth"])
        return {"path": path, "cycle": cycle, "complete": complete}[self.kind](p["n"])

    def valence_bound(self) -> int:
        p = self.params
        return {
            "planar_grid": 4,
            "torus_grid": 4,
            "path": 2,
            "cycle": 2,
            "complete": max(p.get("n", 1) - 1, 0),
            "binary_tree": 3,
            "random_regular": p.get("d", 3),
        }[self.kind]
