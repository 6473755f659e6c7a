"""Discrete potential theory on graphs.

The capacity of a source set ``S`` relative to a ground set ``Z`` is

    cap_p(S; Z) = min { sum over edges |u(a) - u(b)|^p : u = 1 on S, u = 0 on Z }.

For ``p = 2`` this is the effective conductance, so ``R_eff = 1 / cap_2``.
Loops carry no drop and are ignored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonConvergenceError, PreconditionError
from .graph import Graph, _bfs, ball, connected_components, distances_from, multi_source_distances

STALL_TOL = 1e-10
STALL_WINDOW = 32


@dataclass(frozen=True)
class CapacityProblem:
    graph: Graph
    source: frozenset
    ground: frozenset
    exponent: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "source", frozenset(int(v) for v in self.source))
        object.__setattr__(self, "ground", frozenset(int(v) for v in self.ground))
        n = self.graph.vertex_count
        if not self.source or not self.ground:
            raise PreconditionError("source and ground sets must be non-empty")
        if self.source & self.ground:
            raise PreconditionError("source and ground sets must be disjoint")
        if any(not 0 <= v < n for v in self.source | self.ground):
            raise PreconditionError("source/ground vertex out of range")
        if not self.exponent > 1:
            raise PreconditionError(f"exponent must exceed 1, got {self.exponent}")

    def to_dict(self) -> dict:
        return {
            "graph": {"n": self.graph.vertex_count, "edges": [list(e) for e in self.graph.edges]},
            "source": sorted(self.source),
            "ground": sorted(self.ground),
            "exponent": self.exponent,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CapacityProblem":
        unknown = set(d) - {"graph", "source", "ground", "exponent"}
        if unknown:
            raise PreconditionError(f"unknown capacity problem fields: {sorted(unknown)}")
        g = Graph(d["graph"]["n"], [tuple(e) for e in d["graph"]["edges"]])
        return cls(g, frozenset(d["source"]), frozenset(d["ground"]), float(d.get("exponent", 2.0)))


@dataclass(frozen=True)
class PotentialSolution:
    u: np.ndarray
    energy: float
    iterations: int
    residual: float
    exponent: float = 2.0

    def to_dict(self) -> dict:
        return {
            "u": [float(x) for x in self.u],
            "energy": float(self.energy),
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "exponent": float(self.exponent),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSolution":
        return cls(np.asarray(d["u"], dtype=float), float(d["energy"]), int(d["iterations"]),
                   float(d["residual"]), float(d.get("exponent", 2.0)))

    def __eq__(self, other):
        if not isinstance(other, PotentialSolution):
            return NotImplemented
        return (np.array_equal(self.u, other.u) and self.energy == other.energy
                and self.iterations == other.iterations and self.residual == other.residual
                and self.exponent == other.exponent)


def dumps(obj) -> str:
    return json.dumps(obj.to_dict(), sort_keys=True)


def _proper_edges(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    a, b = g.edge_arrays()
    keep = a != b
    return a[keep], b[keep]


def edge_energy(g: Graph, u, p: float) -> float:
    a, b = _proper_edges(g)
    u = np.asarray(u, dtype=float)
    return float(np.sum(np.abs(u[a] - u[b]) ** p))


class _Dirichlet:
    """Weighted Laplacian restricted to the free vertices of one solve."""

    def __init__(self, g: Graph, base: np.ndarray, free: np.ndarray):
        self.n = g.vertex_count
        self.a, self.b = _proper_edges(g)
        self.free = free
        self.index = np.full(self.n, -1, dtype=np.int64)
        self.index[free] = np.arange(free.size)
        self.base = base.copy()

    def solve(self, w: np.ndarray) -> np.ndarray:
        a, b, idx = self.a, self.b, self.index
        ia, ib = idx[a], idx[b]
        m = self.free.size
        rows, cols, vals = [], [], []
        rhs = np.zeros(m)
        fa, fb = ia >= 0, ib >= 0
        both = fa & fb
        rows += [ia[both], ib[both], ia[both], ib[both]]
        cols += [ib[both], ia[both], ia[both], ib[both]]
        vals += [-w[both], -w[both], w[both], w[both]]
        only_a = fa & ~fb
        only_b = fb & ~fa
        rows += [ia[only_a], ib[only_b]]
        cols += [ia[only_a], ib[only_b]]
        vals += [w[only_a], w[only_b]]
        np.add.at(rhs, ia[only_a], w[only_a] * self.base[b[only_a]])
        np.add.at(rhs, ib[only_b], w[only_b] * self.base[a[only_b]])
        mat = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m))
        u = self.base.copy()
        if m:
            u[self.free] = spla.spsolve(mat, rhs)
        return u


def _flux_residual(g: Graph, u: np.ndarray, p: float, free: np.ndarray) -> float:
    """Max imbalance of ``sum |du|^{p-2} du`` at free vertices, relative to the largest edge flux."""
    a, b = _proper_edges(g)
    du = u[a] - u[b]
    flux = np.sign(du) * np.abs(du) ** (p - 1)
    net = np.zeros(g.vertex_count)
    np.add.at(net, a, flux)
    np.add.at(net, b, -flux)
    scale = np.abs(flux).max(initial=0.0)
    if scale == 0 or free.size == 0:
        return 0.0
    return float(np.abs(net[free]).max() / scale)


def p_capacity(prob: CapacityProblem, tol: float = 1e-10, maxiter: int = 500) -> PotentialSolution:
    """Minimise the edge p-energy with ``u = 1`` on the source and ``0`` on the ground.

    ``p = 2`` is one sparse linear solve.  Other exponents run damped
    iteratively reweighted least squares started from the harmonic
    solution: each step solves the Laplacian with edge weights
    ``|du|^(p-2)`` and line-searches along the difference, trying
    ``1/(p-1)`` first (the Newton step) and then ``1, 1/2, 1/4, ...``.
    When no trial step lowers the energy, a projected gradient step is
    tried instead.  Iteration stops once the flux residual drops below
    ``tol`` or the relative energy decrease stays below ``1e-10`` for 32
    consecutive iterations.
    """
    g, p = prob.graph, float(prob.exponent)
    n = g.vertex_count
    u = np.zeros(n)
    fixed = {v: 1.0 for v in prob.source} | {v: 0.0 for v in prob.ground}
    free_mask = np.zeros(n, dtype=bool)
    for comp in connected_components(g):
        has_s = any(v in prob.source for v in comp)
        has_z = any(v in prob.ground for v in comp)
        if has_s and has_z:
            free_mask[comp] = True
        elif has_s:
            u[comp] = 1.0
    for v, val in fixed.items():
        free_mask[v] = False
        u[v] = val
    free = np.flatnonzero(free_mask)
    if not _s_meets_z(g, prob):
        return PotentialSolution(u, 0.0, 0, 0.0, p)
    solver = _Dirichlet(g, u, free)
    a, b = solver.a, solver.b

    def energy(x):
        return float(np.sum(np.abs(x[a] - x[b]) ** p))

    u = solver.solve(np.ones(a.size))
    iterations = 1
    if p != 2.0:
        e = energy(u)
        quiet = 0
        for iterations in range(2, maxiter + 2):
            resid = _flux_residual(g, u, p, free)
            if resid < tol or quiet >= STALL_WINDOW:
                break
            du = np.abs(u[a] - u[b])
            floor = 1e-12 * max(du.max(initial=0.0), 1e-300)
            w = np.maximum(du, floor) ** (p - 2)
            direction = solver.solve(w) - u
            new_u, new_e = _line_search(energy, u, e, direction, [1.0 / (p - 1)] + [0.5 ** k for k in range(40)])
            if new_u is None:
                new_u, new_e = _projected_gradient_step(energy, g, u, e, p, free, a, b)
            if new_u is None:
                quiet = STALL_WINDOW
                break
            quiet = quiet + 1 if (e - new_e) <= STALL_TOL * e else 0
            u, e = new_u, new_e
        else:
            resid = _flux_residual(g, u, p, free)
            raise NonConvergenceError(
                f"p-capacity did not converge in {maxiter} iterations (residual {resid:.2e})",
                residual=resid, iterations=maxiter)
    np.clip(u, 0.0, 1.0, out=u)
    return PotentialSolution(u, energy(u), iterations, _flux_residual(g, u, p, free), p)


def _s_meets_z(g: Graph, prob: CapacityProblem) -> bool:
    reach = _bfs(g, sorted(prob.source))
    return any(z in reach for z in prob.ground)


def _line_search(energy, u, e, direction, steps):
    for t in steps:
        cand = u + t * direction
        ce = energy(cand)
        if ce < e:
            return cand, ce
    return None, e


def _projected_gradient_step(energy, g, u, e, p, free, a, b):
    du = u[a] - u[b]
    flux = p * np.sign(du) * np.abs(du) ** (p - 1)
    grad = np.zeros(g.vertex_count)
    np.add.at(grad, a, flux)
    np.add.at(grad, b, -flux)
    mask = np.zeros(g.vertex_count, dtype=bool)
    mask[free] = True
    grad[~mask] = 0.0
    gnorm = np.abs(grad).max(initial=0.0)
    if gnorm == 0:
        return None, e
    t = 1.0 / gnorm
    for _ in range(60):
        cand = np.clip(u - t * grad, 0.0, 1.0)
        cand[~mask] = u[~mask]
        ce = energy(cand)
        if ce < e:
            return cand, ce
        t *= 0.5
    return None, e


def capacity(g: Graph, source: Iterable[int], ground: Iterable[int], p: float = 2.0, **kw) -> float:
    return p_capacity(CapacityProblem(g, frozenset(source), frozenset(ground), p), **kw).energy


def effective_resistance(g: Graph, source: Iterable[int], ground: Iterable[int]) -> float:
    cap = capacity(g, source, ground, 2.0)
    return math.inf if cap == 0 else 1.0 / cap


# -- exhaustion profiles -----------------------------------------------------

@dataclass(frozen=True)
class Profile:
    radii: tuple[int, ...]
    capacities: tuple[float, ...]
    exponent: float
    slope: float  # least-squares slope of capacity against log r
    verdict: str

    @property
    def last(self) -> float:
        return self.capacities[-1]


def parabolicity_profile(g: Graph, root: int, radii: Sequence[int], p: float = 2.0,
                         tol: float = 1e-10) -> Profile:
    """``cap_p(B(root, 1); {d >= r})`` for each radius ``r``.

    The ground set ``{d(root, v) >= r}`` is the complement of the open
    ball, so the potential drops across the sphere of radius ``r``.  The
    verdict only describes the finite sequence.
    """
    radii = [int(r) for r in radii]
    if not radii or any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise PreconditionError("radii must be a non-empty strictly increasing list")
    if radii[0] < 2:
        raise PreconditionError("radii must be at least 2 so the ground set misses B(root, 1)")
    dist = distances_from(g, root)
    ecc = dist[np.isfinite(dist)].max()
    if radii[-1] > ecc:
        raise PreconditionError(f"radius {radii[-1]} exceeds the eccentricity {ecc:g} of the root")
    source = frozenset(ball(g, root, 1).original_ids)
    caps = []
    for r in radii:
        ground = frozenset(np.flatnonzero(dist >= r).tolist())
        caps.append(p_capacity(CapacityProblem(g, source, ground, p), tol=tol).energy)
    if len(radii) >= 2:
        slope = float(np.polyfit(np.log(radii), caps, 1)[0])
    else:
        slope = 0.0
    verdict = "decaying toward 0" if caps[-1] < 0.5 * caps[0] else "bounded away from 0"
    return Profile(tuple(radii), tuple(caps), p, slope, verdict)


# -- random walks -------------------------------------------------------------

def escape_probability_mc(g: Graph, root: int, boundary: Iterable[int], trials: int,
                          seed=0, max_steps: int = 10_000_000) -> tuple[float, float]:
    """Fraction of simple random walks from ``root`` that hit ``boundary`` before returning.

    All walks advance in lockstep on numpy arrays.  Returns the estimate
    and its binomial standard error.
    """
    if trials <= 0:
        raise PreconditionError("trials must be positive")
    bset = sorted(set(int(v) for v in boundary))
    if not bset:
        raise PreconditionError("boundary must be non-empty")
    if root in bset:
        raise PreconditionError("root must not lie on the boundary")
    if g.degree(root) == 0:
        raise PreconditionError("root is isolated")
    indptr, indices = g.csr
    deg = np.diff(indptr)
    is_boundary = np.zeros(g.vertex_count, dtype=bool)
    is_boundary[bset] = True
    rng = np.random.default_rng(seed)
    pos = np.full(trials, root, dtype=np.int64)
    active = np.arange(trials)
    escaped = 0
    steps = 0
    while active.size:
        cur = pos[active]
        pick = (rng.random(active.size) * deg[cur]).astype(np.int64)
        nxt = indices[indptr[cur] + pick]
        pos[active] = nxt
        hit = is_boundary[nxt]
        escaped += int(hit.sum())
        done = hit | (nxt == root)
        active = active[~done]
        steps += 1
        if steps > max_steps:
            raise NonConvergenceError("random walks did not terminate", iterations=steps)
    est = escaped / trials
    return est, math.sqrt(est * (1 - est) / trials)


# -- modulus of path families ---------------------------------------------------

@dataclass(frozen=True)
class PathFamily:
    paths: tuple[tuple[int, ...], ...]
    graph: Graph | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(tuple(int(v) for v in p) for p in self.paths))
        for path in self.paths:
            if not path:
                raise PreconditionError("paths must be non-empty")
            if len(set(path)) != len(path):
                raise PreconditionError(f"path {path} is not self-avoiding")
            if self.graph is not None:
                for x, y in zip(path, path[1:]):
                    if y not in self.graph.neighbors(x):
                        raise PreconditionError(f"path {path} steps along a non-edge ({x},{y})")


@dataclass(frozen=True)
class ModulusResult:
    value: float
    rho: dict


def modulus_small(fam: PathFamily | Sequence[Sequence[int]], p: float = 2.0, cap: int = 5000) -> ModulusResult:
    """Vertex p-modulus: ``min sum rho(v)^p`` with ``sum_{v in path} rho(v) >= 1`` for every path.

    Solved with SLSQP; the optimum is rescaled so every constraint holds.
    """
    if not isinstance(fam, PathFamily):
        fam = PathFamily(tuple(fam))
    if not fam.paths:
        return ModulusResult(0.0, {})
    if len(fam.paths) > cap:
        raise PreconditionError(f"{len(fam.paths)} paths exceed the family cap {cap}")
    if not p > 1:
        raise PreconditionError(f"exponent must exceed 1, got {p}")
    verts = sorted({v for path in fam.paths for v in path})
    col = {v: i for i, v in enumerate(verts)}
    A = np.zeros((len(fam.paths), len(verts)))
    for i, path in enumerate(fam.paths):
        for v in path:
            A[i, col[v]] = 1.0
    x0 = np.full(len(verts), 1.0 / min(len(path) for path in fam.paths))
    res = scipy.optimize.minimize(
        lambda x: float(np.sum(np.abs(x) ** p)),
        x0,
        jac=lambda x: p * np.sign(x) * np.abs(x) ** (p - 1),
        constraints=[{"type": "ineq", "fun": lambda x: A @ x - 1.0, "jac": lambda x: A}],
        bounds=[(0.0, None)] * len(verts),
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 2000},
    )
    x = np.maximum(res.x, 0.0)
    worst = float((A @ x).min())
    if worst <= 0:
        raise NonConvergenceError("modulus solver returned an inadmissible density")
    if worst < 1.0:
        x = x / worst
    return ModulusResult(float(np.sum(x ** p)), {v: float(x[col[v]]) for v in verts})


def boundary_paths(g: Graph, source: Iterable[int], r: int, budget: int = 5000) -> list[tuple[int, ...]]:
    """Self-avoiding paths from the source to the sphere ``{d(S, v) = r}``.

    Paths leave the source at their first vertex and stop at their first
    vertex with ``d >= r``; other paths in the family dominate the rest.
    """
    src = sorted(set(int(s) for s in source))
    dist = multi_source_distances(g, src)
    in_src = set(src)
    out: list[tuple[int, ...]] = []

    def extend(path, onpath):
        v = path[-1]
        for w, _ in g.adjacency[v]:
            if w in onpath or w in in_src:
                continue
            if dist[w] >= r:
                out.append(tuple(path + [w]))
                if len(out) > budget:
                    raise PreconditionError(f"more than {budget} paths; instance too large")
                continue
            onpath.add(w)
            extend(path + [w], onpath)
            onpath.discard(w)

    for s in src:
        extend([s], {s})
    return out


@dataclass(frozen=True)
class CapModComparison:
    capacity: float
    modulus: float
    ratio: float
    constant: float
    paths: int


def cap_mod_constant(max_degree: int, p: float) -> float:
    """``c`` with ``1/c <= cap_p / Mod_p <= c`` on graphs of the given valence.

    Spreading each edge drop onto both endpoints gives ``Mod <= 2 d^(p-1) cap``;
    the potential ``1 - (rho-distance from S)`` gives ``cap <= 2^(p-1) d Mod``.
    """
    d = max(max_degree, 1)
    return max(2.0 * d ** (p - 1), 2.0 ** (p - 1) * d)


def compare_cap_mod(g: Graph, source: Iterable[int], r: int, p: float = 2.0, budget: int = 5000) -> CapModComparison:
    src = frozenset(int(s) for s in source)
    dist = multi_source_distances(g, src)
    ground = frozenset(np.flatnonzero(dist >= r).tolist())
    if not ground:
        raise PreconditionError(f"no vertex at distance {r} from the source")
    cap = p_capacity(CapacityProblem(g, src, ground, p)).energy
    paths = boundary_paths(g, src, r, budget)
    mod = modulus_small(PathFamily(tuple(paths)), p, cap=budget).value
    ratio = cap / mod
    c = cap_mod_constant(g.max_degree, p)
    if not (1.0 / c) * (1 - 1e-6) <= ratio <= c * (1 + 1e-6):
        raise RuntimeError(f"capacity/modulus ratio {ratio} outside [1/{c}, {c}]")
    return CapModComparison(cap, mod, ratio, c, len(paths))
