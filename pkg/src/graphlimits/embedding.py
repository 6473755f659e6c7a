"""Rotation systems (combinatorial maps) for cellular embeddings of graphs.

Darts are integers ``0..2m-1``.  ``alpha`` pairs the two darts of an edge,
``sigma`` is the counterclockwise successor of a dart around its vertex and
faces are the cycles of ``phi = sigma o alpha``.  Maps built from a
:class:`~graphlimits.graph.Graph` use darts ``2e`` (at ``edges[e][0]``) and
``2e + 1`` (at ``edges[e][1]``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError
from .graph import Graph, _bfs, is_connected


class RotationSystem:
    """Combinatorial map: dart involution ``alpha``, rotation ``sigma``, incidence ``vertex_of``."""

    def __init__(self, vertex_count, alpha, sigma, vertex_of, check=True):
        self.vertex_count = int(vertex_count)
        self.alpha = tuple(int(a) for a in alpha)
        self.sigma = tuple(int(s) for s in sigma)
        self.vertex_of = tuple(int(v) for v in vertex_of)
        if check:
            self.validate()

    @property
    def dart_count(self) -> int:
        return len(self.alpha)

    @property
    def edge_count(self) -> int:
        return len(self.alpha) // 2

    def validate(self) -> None:
        n = self.dart_count
        if n % 2 or len(self.sigma) != n or len(self.vertex_of) != n:
            raise PreconditionError("alpha, sigma and vertex_of must have the same even length")
        for d, a in enumerate(self.alpha):
            if not 0 <= a < n or a == d or self.alpha[a] != d:
                raise PreconditionError(f"alpha is not a fixed-point-free involution at dart {d}")
        if sorted(self.sigma) != list(range(n)):
            raise PreconditionError("sigma is not a permutation of the darts")
        for d, s in enumerate(self.sigma):
            if self.vertex_of[s] != self.vertex_of[d]:
                raise PreconditionError(f"sigma moves dart {d} to another vertex")
        if any(not 0 <= v < self.vertex_count for v in self.vertex_of):
            raise PreconditionError("vertex_of refers to a vertex out of range")
        cycled = set()
        seen = set()
        for d in range(n):
            if d in seen:
                continue
            v = self.vertex_of[d]
            if v in cycled:
                raise PreconditionError(f"vertex {v} carries more than one rotation cycle")
            cycled.add(v)
            x = d
            while x not in seen:
                seen.add(x)
                x = self.sigma[x]

    @classmethod
    def from_rotations(cls, vertex_count: int, rotations: Sequence[Sequence[int]], alpha=None):
        """Build from per-vertex cyclic dart lists; ``alpha`` defaults to ``d ^ 1``."""
        darts = [d for rot in rotations for d in rot]
        n = len(darts)
        if sorted(darts) != list(range(n)):
            raise PreconditionError("rotations must list every dart exactly once")
        if len(rotations) != vertex_count:
            raise PreconditionError(f"expected {vertex_count} rotation lines, got {len(rotations)}")
        sigma = [0] * n
        vertex_of = [0] * n
        for v, rot in enumerate(rotations):
            for i, d in enumerate(rot):
                sigma[d] = rot[(i + 1) % len(rot)]
                vertex_of[d] = v
        if alpha is None:
            alpha = [d ^ 1 for d in range(n)]
        return cls(vertex_count, alpha, sigma, vertex_of)

    @classmethod
    def from_graph(cls, g: Graph, rotations: Sequence[Sequence[int]] | None = None):
        """Map on ``g`` with darts ``2e``/``2e+1``.

        ``rotations[v]`` lists the *neighbor-slot* order as darts; when
        omitted, adjacency-list order is used.
        """
        if rotations is None:
            rotations = default_rotations(g)
        rs = cls.from_rotations(g.vertex_count, rotations)
        for e, (u, v) in enumerate(g.edges):
            if rs.vertex_of[2 * e] != u or rs.vertex_of[2 * e + 1] != v:
                raise PreconditionError(f"rotation places a dart of edge {e} at the wrong vertex")
        return rs

    def rotations(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.vertex_count)]
        seen = set()
        for d in range(self.dart_count):
            if d in seen:
                continue
            cyc = []
            x = d
            while x not in seen:
                seen.add(x)
                cyc.append(x)
                x = self.sigma[x]
            out[self.vertex_of[d]] = cyc
        return out

    def graph(self) -> Graph:
        """Underlying multigraph; edge ``k`` is the ``k``-th dart pair by smallest dart."""
        edges = []
        for d in range(self.dart_count):
            a = self.alpha[d]
            if d < a:
                edges.append((self.vertex_of[d], self.vertex_of[a]))
        return Graph(self.vertex_count, edges)

    def valences(self) -> list[int]:
        val = [0] * self.vertex_count
        for v in self.vertex_of:
            val[v] += 1
        return val

    def conjugate(self, perm: Sequence[int]) -> "RotationSystem":
        """Relabel dart ``d`` as ``perm[d]``."""
        n = self.dart_count
        alpha = [0] * n
        sigma = [0] * n
        vertex_of = [0] * n
        for d in range(n):
            alpha[perm[d]] = perm[self.alpha[d]]
            sigma[perm[d]] = perm[self.sigma[d]]
            vertex_of[perm[d]] = self.vertex_of[d]
        return RotationSystem(self.vertex_count, alpha, sigma, vertex_of)

    def __eq__(self, other):
        if not isinstance(other, RotationSystem):
            return NotImplemented
        return (self.vertex_count, self.alpha, self.sigma, self.vertex_of) == (
            other.vertex_count, other.alpha, other.sigma, other.vertex_of)

    def __repr__(self):
        return f"RotationSystem(V={self.vertex_count}, E={self.edge_count})"

    def to_text(self) -> str:
        """``V E`` header, then one line per vertex with its darts in cyclic order.

        Only maps with the standard involution ``alpha(d) = d ^ 1`` can be
        written, since the format leaves the edge pairing implicit.
        """
        if any(a != d ^ 1 for d, a in enumerate(self.alpha)):
            raise PreconditionError("text format requires alpha(d) = d ^ 1; relabel darts first")
        lines = [f"{self.vertex_count} {self.edge_count}"]
        for rot in self.rotations():
            lines.append(" ".join(map(str, _rotate_to_min(rot))))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RotationSystem":
        raw = [ln for ln in text.splitlines() if not ln.lstrip().startswith("#")]
        while raw and not raw[-1].strip():
            raw.pop()
        if not raw:
            raise PreconditionError("empty rotation system")
        header = raw[0].split()
        if len(header) != 2:
            raise PreconditionError("rotation system must start with a 'V E' header")
        nv, ne = int(header[0]), int(header[1])
        body = raw[1:]
        if len(body) != nv:
            raise PreconditionError(f"expected {nv} vertex lines, got {len(body)}")
        rotations = [[int(t) for t in ln.split()] for ln in body]
        rs = cls.from_rotations(nv, rotations)
        if rs.edge_count != ne:
            raise PreconditionError(f"header announces {ne} edges, darts give {rs.edge_count}")
        return rs


def _rotate_to_min(cyc):
    if not cyc:
        return cyc
    i = cyc.index(min(cyc))
    return cyc[i:] + cyc[:i]


def default_rotations(g: Graph) -> list[list[int]]:
    rotations: list[list[int]] = [[] for _ in range(g.vertex_count)]
    for e, (u, v) in enumerate(g.edges):
        rotations[u].append(2 * e)
        rotations[v].append(2 * e + 1)
    return rotations


@dataclass(frozen=True)
class FaceTrace:
    faces: tuple[tuple[int, ...], ...]

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.faces)

    @property
    def face_count(self) -> int:
        return len(self.faces)


def face_permutation(rs: RotationSystem) -> list[int]:
    return [rs.sigma[rs.alpha[d]] for d in range(rs.dart_count)]


def trace_faces(rs: RotationSystem) -> FaceTrace:
    """Orbits of ``phi``, each starting at its smallest dart, ordered by that dart."""
    phi = face_permutation(rs)
    seen = [False] * rs.dart_count
    faces = []
    for d in range(rs.dart_count):
        if seen[d]:
            continue
        walk = []
        x = d
        while not seen[x]:
            seen[x] = True
            walk.append(x)
            x = phi[x]
        faces.append(tuple(walk))
    return FaceTrace(tuple(faces))


def euler_characteristic(rs: RotationSystem) -> int:
    return rs.vertex_count - rs.edge_count + trace_faces(rs).face_count


def euler_genus(rs: RotationSystem) -> int:
    """Genus ``g`` of the surface with ``V - E + F = 2 - 2g``."""
    if not is_connected(rs.graph()):
        raise PreconditionError("genus of a rotation system needs a connected underlying graph")
    defect = 2 - euler_characteristic(rs)
    if defect < 0 or defect % 2:
        raise PreconditionError(f"Euler defect {defect} is odd or negative; the map is corrupted")
    return defect // 2


def rotation_system_count(g: Graph) -> int:
    return math.prod(math.factorial(max(d - 1, 0)) for d in g.degrees)


def all_rotation_systems(g: Graph):
    """Every rotation system on ``g`` (first dart of each vertex fixed)."""
    base = default_rotations(g)
    per_vertex = []
    for rot in base:
        if len(rot) <= 2:
            per_vertex.append([list(rot)])
        else:
            per_vertex.append([[rot[0], *p] for p in itertools.permutations(rot[1:])])
    for choice in itertools.product(*per_vertex):
        yield RotationSystem.from_rotations(g.vertex_count, choice)


def min_genus_exhaustive(g: Graph, budget: int = 2_000_000) -> int:
    """Orientable genus of ``g`` by trying every rotation system."""
    if not is_connected(g):
        raise PreconditionError("min_genus_exhaustive needs a connected graph")
    total = rotation_system_count(g)
    if total > budget:
        raise PreconditionError(f"{total} rotation systems exceed the budget of {budget}")
    v, e = g.vertex_count, g.edge_count
    planar_faces = 2 - v + e
    best_faces = -1
    alpha = [d ^ 1 for d in range(2 * e)]
    for rs in all_rotation_systems(g):
        f = _count_faces(alpha, rs.sigma)
        if f > best_faces:
            best_faces = f
            if f == planar_faces:
                break
    return (2 - v + e - best_faces) // 2


def _count_faces(alpha, sigma) -> int:
    n = len(alpha)
    seen = bytearray(n)
    faces = 0
    for d in range(n):
        if seen[d]:
            continue
        faces += 1
        x = d
        while not seen[x]:
            seen[x] = 1
            x = sigma[alpha[x]]
    return faces


# -- triangulation extension ------------------------------------------------

def zigzag_triangulate_polygon(walk) -> list[tuple[int, int]]:
    """Chords triangulating an ``n``-gon so that every corner meets at most two chords.

    ``walk`` is the face walk (any sequence) or just its length.  Chords
    alternate between the two ends of a shrinking strip: ``(1, n-1)``,
    ``(1, n-2)``, ``(2, n-2)``, ``(2, n-3)``, ...; each chord cuts one
    triangle off and leaves the polygon on corners ``lo..hi``.
    """
    n = walk if isinstance(walk, (int, np.integer)) else len(walk)
    if n < 3:
        raise PreconditionError(f"cannot triangulate a {n}-gon")
    chords = []
    lo, hi = 1, n - 1
    move_hi = True
    while len(chords) < n - 3:
        chords.append((lo, hi))
        if move_hi:
            hi -= 1
        else:
            lo += 1
        move_hi = not move_hi
    return chords


def triangulate_fill(rs: RotationSystem, d: int | None = None) -> RotationSystem:
    """Add chords inside every face until all faces are triangles; no vertices are added.

    Each vertex gains at most two chords per corner it occupies, so its
    valence at most triples.
    """
    valences = rs.valences()
    if d is not None and max(valences, default=0) > d:
        raise PreconditionError(f"input valence {max(valences)} exceeds the declared bound {d}")
    faces = trace_faces(rs)
    short = [f for f in faces.faces if len(f) < 3]
    if short:
        raise PreconditionError(
            f"face of length {len(short[0])} cannot be triangulated without new vertices"
        )
    alpha = list(rs.alpha)
    sigma = list(rs.sigma)
    vertex_of = list(rs.vertex_of)
    for face in faces.faces:
        n = len(face)
        if n == 3:
            continue
        poly = list(face)
        lo = 0
        for c_lo, c_hi in zigzag_triangulate_polygon(n):
            a, b = c_lo - lo, c_hi - lo
            x, y = len(alpha), len(alpha) + 1
            alpha += [y, x]
            vertex_of += [vertex_of[poly[a]], vertex_of[poly[b]]]
            sigma += [0, 0]
            # x sits in the corner before poly[a], y in the corner before poly[b]
            pa = alpha[poly[a - 1]]
            pb = alpha[poly[b - 1]]
            sigma[pa], sigma[x] = x, poly[a]
            sigma[pb], sigma[y] = y, poly[b]
            poly = poly[a:b] + [y]
            lo = c_lo
    return RotationSystem(rs.vertex_count, alpha, sigma, vertex_of)


# -- metric comparison -------------------------------------------------------

@dataclass(frozen=True)
class StretchReport:
    shrink: float  # max d_sub / d_super
    expand: float  # max d_super / d_sub
    density: float  # max distance from a super vertex to the image
    pairs: int
    exact: bool


def metric_stretch(sub: Graph, sup: Graph, inclusion: Sequence[int], sample: int = 64, seed=0,
                   exact_limit: int = 512) -> StretchReport:
    """Empirical bi-Lipschitz and density constants of a vertex inclusion.

    All source vertices are used when ``sub`` has at most ``exact_limit``
    vertices, otherwise ``sample`` random sources.
    """
    inc = [int(i) for i in inclusion]
    if len(inc) != sub.vertex_count or len(set(inc)) != len(inc):
        raise PreconditionError("inclusion must be an injective map on the sub vertices")
    sup_pairs = {(min(u, v), max(u, v)) for u, v in sup.edges}
    for u, v in sub.edges:
        a, b = inc[u], inc[v]
        if (min(a, b), max(a, b)) not in sup_pairs:
            raise PreconditionError(f"sub edge ({u},{v}) is not an edge of the super graph")
    if sub.vertex_count <= exact_limit:
        sources = list(range(sub.vertex_count))
        exact = True
    else:
        rng = np.random.default_rng(seed)
        sources = sorted(rng.choice(sub.vertex_count, size=min(sample, sub.vertex_count), replace=False).tolist())
        exact = False
    shrink = expand = 1.0
    pairs = 0
    for s in sources:
        ds = _bfs(sub, [s])
        dp = _bfs(sup, [inc[s]])
        for t, dst in ds.items():
            if t == s:
                continue
            dpt = dp[inc[t]]
            pairs += 1
            shrink = max(shrink, dst / dpt)
            expand = max(expand, dpt / dst)
    image_dist = _bfs(sup, sorted(set(inc)))
    if len(image_dist) < sup.vertex_count:
        density = math.inf
    else:
        density = float(max(image_dist.values(), default=0))
    return StretchReport(shrink, expand, density, pairs, exact)


# -- random inputs -------------------------------------------------------------

def random_connected_graph(rng: np.random.Generator, n: int, max_valence: int, extra: int) -> Graph:
    """Random spanning tree plus up to ``extra`` simple edges, respecting ``max_valence``."""
    deg = [0] * n
    edges = set()
    order = rng.permutation(n).tolist()
    for i in range(1, n):
        v = order[i]
        candidates = [order[j] for j in range(i) if deg[order[j]] < max_valence]
        u = candidates[int(rng.integers(len(candidates)))]
        edges.add((min(u, v), max(u, v)))
        deg[u] += 1
        deg[v] += 1
    for _ in range(extra):
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u == v or deg[u] >= max_valence or deg[v] >= max_valence:
            continue
        key = (min(u, v), max(u, v))
        if key in edges:
            continue
        edges.add(key)
        deg[u] += 1
        deg[v] += 1
    return Graph(n, sorted(edges))


def random_rotation_system(rng: np.random.Generator, max_vertices: int = 40, max_valence: int = 6,
                           min_vertices: int = 3) -> RotationSystem:
    """Random connected simple graph with a uniformly random rotation at each vertex.

    Resamples until every face has length at least 3.
    """
    while True:
        n = int(rng.integers(min_vertices, max_vertices + 1))
        g = random_connected_graph(rng, n, max_valence, extra=int(rng.integers(0, 2 * n + 1)))
        rotations = [list(rng.permutation(rot)) for rot in default_rotations(g)]
        rs = RotationSystem.from_graph(g, [[int(d) for d in rot] for rot in rotations])
        if min(trace_faces(rs).lengths) >= 3:
            return rs
