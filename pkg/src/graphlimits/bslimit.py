"""Rooted-ball statistics for Benjamini-Schramm (local weak) convergence.

Each vertex of a finite graph contributes its closed ``r``-ball, reduced to
a canonical code so that two balls share a code exactly when they are
isomorphic as rooted graphs.  Distributions at a fixed depth are compared
in total variation.
"""

from __future__ import annotations

import math
import struct
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .graph import Graph, RootedSubgraph, ball

CODE_CAP = 64


@dataclass(frozen=True)
class RootedBallCode:
    code: bytes
    vertex_count: int
    depth: int

    @property
    def hex(self) -> str:
        return self.code.hex()


def _refine(colors: list[int], nbrs: list[list[int]]) -> list[int]:
    """Colour refinement to the coarsest equitable partition finer than ``colors``.

    New colours are ranks of sorted signatures, so they depend only on the
    isomorphism type, never on vertex ids.
    """
    k = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted(colors[w] for w in nbrs[v]))) for v in range(len(colors))]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == k:
            return new
        colors, k = new, len(ranks)


def _individualize(colors: list[int], v: int) -> list[int]:
    keyed = [(c, 0 if u == v else 1) for u, c in enumerate(colors)]
    ranks = {s: i for i, s in enumerate(sorted(set(keyed)))}
    return [ranks[s] for s in keyed]


class _Canon:
    def __init__(self, n: int, edges: Sequence[tuple[int, int]], initial: list[int]):
        self.n = n
        self.edges = edges
        self.nbrs: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            self.nbrs[a].append(b)
            self.nbrs[b].append(a)
        self.initial = initial
        self.best_cert = None
        self.best_label = None
        self.automorphisms: list[list[int]] = []

    def certificate(self, label: list[int]):
        return tuple(sorted((min(label[a], label[b]), max(label[a], label[b])) for a, b in self.edges))

    def run(self):
        self._search(_refine(self.initial, self.nbrs), [])
        return self.best_cert

    def _orbits(self, prefix: list[int], cell: list[int]) -> dict[int, int]:
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for gamma in self.automorphisms:
            if all(gamma[x] == x for x in prefix):
                for x in range(self.n):
                    rx, ry = find(x), find(gamma[x])
                    if rx != ry:
                        parent[rx] = ry
        return {v: find(v) for v in cell}

    def _search(self, colors: list[int], prefix: list[int]):
        counts = Counter(colors)
        target = min((c for c, m in counts.items() if m > 1), default=None)
        if target is None:
            label = colors
            cert = self.certificate(label)
            if self.best_cert is None or cert < self.best_cert:
                self.best_cert, self.best_label = cert, label
            elif cert == self.best_cert:
                # label^-1 o best_label maps one optimal labelling onto the other
                inv = [0] * self.n
                for v, lab in enumerate(label):
                    inv[lab] = v
                self.automorphisms.append([inv[self.best_label[v]] for v in range(self.n)])
            return
        cell = [v for v in range(self.n) if colors[v] == target]
        explored: list[int] = []
        for v in cell:
            if explored:
                orbit = self._orbits(prefix, cell)
                if any(orbit[v] == orbit[w] for w in explored):
                    continue
            explored.append(v)
            self._search(_refine(_individualize(colors, v), self.nbrs), prefix + [v])


def canonical_form(g: Graph, root: int, distances: Sequence[int] | None = None):
    """Canonical certificate ``(n, sorted relabelled edges)`` of the rooted graph ``(g, root)``."""
    n = g.vertex_count
    if distances is None:
        from .graph import distances_from

        dist = distances_from(g, root)
        distances = [int(d) if math.isfinite(d) else n + 1 for d in dist]
    loops = [0] * n
    for a, b in g.edges:
        if a == b:
            loops[a] += 1
    initial_keys = [(distances[v], g.degree(v), loops[v]) for v in range(n)]
    ranks = {k: i for i, k in enumerate(sorted(set(initial_keys)))}
    canon = _Canon(n, g.edges, [ranks[k] for k in initial_keys])
    return n, canon.run()


def canonical_code(b: RootedSubgraph, cap: int = CODE_CAP) -> RootedBallCode:
    """Byte code of a rooted ball, equal for two balls iff they are rooted-isomorphic."""
    n = b.vertex_count
    if n > cap:
        raise PreconditionError(f"ball has {n} vertices, above the coding cap {cap}")
    dists = b.distances if (b.distances and b.root == 0) else None
    _, cert = canonical_form(b.graph, b.root, dists)
    payload = struct.pack(f">{1 + 2 * len(cert)}H", n, *(x for e in cert for x in e))
    return RootedBallCode(payload, n, b.depth)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Ball-code counts at depth ``r`` over ``total`` sampled roots."""

    counts: dict
    r: int
    total: int

    @property
    def weights(self) -> dict:
        return {c: Fraction(k, self.total) for c, k in self.counts.items()}

    def probabilities(self) -> dict:
        return {c: k / self.total for c, k in self.counts.items()}

    def to_text(self) -> str:
        lines = [f"{self.r} {self.total}"]
        for code in sorted(self.counts):
            lines.append(f"{code.hex()} {self.counts[code] / self.total!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "EmpiricalDistribution":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        r, total = int(rows[0][0]), int(rows[0][1])
        counts = {bytes.fromhex(h): round(float(p) * total) for h, p in rows[1:]}
        if sum(counts.values()) != total:
            raise PreconditionError("probabilities do not add up to the declared sample size")
        return cls(counts, r, total)


def neighborhood_distribution(g: Graph, r: int, mode: str = "exact", k: int | None = None,
                              seed=0, cap: int = CODE_CAP) -> EmpiricalDistribution:
    """Law of the depth-``r`` ball around a uniform root.

    ``mode='exact'`` uses every vertex once; ``'sampled'`` draws ``k``
    roots uniformly with replacement.
    """
    if r < 0:
        raise PreconditionError("radius must be non-negative")
    if mode == "exact":
        roots = range(g.vertex_count)
    elif mode == "sampled":
        if not k or k <= 0:
            raise PreconditionError("sampled mode needs a positive k")
        roots = np.random.default_rng(seed).integers(g.vertex_count, size=k).tolist()
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    counts: Counter = Counter()
    for v in roots:
        counts[canonical_code(ball(g, v, r), cap).code] += 1
    total = sum(counts.values())
    if total == 0:
        raise PreconditionError("empty graph has no neighborhood distribution")
    return EmpiricalDistribution(dict(counts), r, total)


def tv_distance_exact(a: EmpiricalDistribution, b: EmpiricalDistribution) -> Fraction:
    if a.r != b.r:
        raise PreconditionError(f"depth mismatch: {a.r} vs {b.r}")
    wa, wb = a.weights, b.weights
    return sum((abs(wa.get(c, 0) - wb.get(c, 0)) for c in set(wa) | set(wb)), Fraction(0)) / 2


def tv_distance(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """``(1/2) sum |a(c) - b(c)|``, computed exactly from counts."""
    return float(tv_distance_exact(a, b))


@dataclass(frozen=True)
class ConvergenceReport:
    matrix: np.ndarray
    indicator: float
    tail_maxima: tuple[float, ...]
    exact: tuple[tuple[Fraction, ...], ...]


def convergence_diagnostic(gs: Sequence[Graph], r: int, **dist_kw) -> ConvergenceReport:
    """Pairwise TV matrix at depth ``r``.

    ``indicator`` is the largest TV among the last ``ceil(len/2)`` graphs;
    ``tail_maxima[i]`` is the largest TV among graphs ``i..end``.
    """
    if len(gs) < 2:
        raise PreconditionError("need at least two graphs")
    dists = [neighborhood_distribution(g, r, **dist_kw) for g in gs]
    m = len(gs)
    exact = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            exact[i][j] = exact[j][i] = tv_distance_exact(dists[i], dists[j])
    mat = np.array([[float(x) for x in row] for row in exact])
    start = m - math.ceil(m / 2)
    indicator = float(mat[start:, start:].max())
    tails = tuple(float(mat[i:, i:].max()) for i in range(m - 1))
    return ConvergenceReport(mat, indicator, tails, tuple(tuple(row) for row in exact))


def tree_ball_fraction(g: Graph, r: int) -> float:
    """Fraction of vertices whose closed ``r``-ball is a tree."""
    trees = 0
    for v in range(g.vertex_count):
        b = ball(g, v, r).graph
        trees += b.edge_count == b.vertex_count - 1
    return trees / g.vertex_count
