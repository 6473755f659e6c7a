"""Cheeger constants of finite graphs: exact enumeration, spectral bounds, sweep cuts.

For a finite graph ``h(G) = min |dA| / |A|`` over non-empty ``A`` with
``|A| <= |V| / 2``, where ``dA`` is the set of edges leaving ``A``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .errors import NonConvergenceError, PreconditionError
from .graph import Graph, is_connected

EXACT_LIMIT = 24
DENSE_LIMIT = 64


@dataclass(frozen=True)
class CutResult:
    value: Fraction
    witness: tuple[int, ...]
    boundary: int

    @property
    def size(self) -> int:
        return len(self.witness)

    def __float__(self):
        return float(self.value)


def boundary_size(g: Graph, subset) -> int:
    inside = set(subset)
    return sum(1 for u, v in g.edges if (u in inside) != (v in inside))


def cut_value(g: Graph, subset) -> Fraction:
    subset = list(subset)
    if not subset:
        raise PreconditionError("cut value of the empty set is undefined")
    return Fraction(boundary_size(g, subset), len(subset))


def _require_connected(g: Graph, what: str) -> None:
    if g.vertex_count < 2:
        raise PreconditionError(f"{what} needs at least two vertices")
    if not is_connected(g):
        raise PreconditionError(f"{what} needs a connected graph")


def cheeger_exact(g: Graph, chunk: int = 1 << 20) -> CutResult:
    """Global minimiser of ``|dA|/|A|`` over all admissible ``A``, by bitmask enumeration.

    Ties go to the lexicographically smallest sorted witness.
    """
    _require_connected(g, "cheeger_exact")
    n = g.vertex_count
    if n > EXACT_LIMIT:
        raise PreconditionError(f"exact Cheeger enumeration is capped at {EXACT_LIMIT} vertices, got {n}")
    a, b = g.edge_arrays()
    keep = a != b
    a, b = a[keep].astype(np.uint64), b[keep].astype(np.uint64)
    half = n // 2
    best_num, best_den = None, None
    tied: list[int] = []
    one = np.uint64(1)
    for start in range(1, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.uint64)
        sizes = np.bitwise_count(masks).astype(np.int64)
        ok = sizes <= half
        masks, sizes = masks[ok], sizes[ok]
        if masks.size == 0:
            continue
        bnd = np.zeros(masks.size, dtype=np.int64)
        for u, v in zip(a, b):
            bnd += (((masks >> u) ^ (masks >> v)) & one).astype(np.int64)
        ratios = bnd / sizes
        r = ratios.min()
        cand = np.flatnonzero(ratios <= r + 1e-9)
        # ratios have denominators <= 12, so float screening then exact comparison is safe
        i0 = cand[0]
        num, den = int(bnd[i0]), int(sizes[i0])
        exact = cand[bnd[cand] * den == num * sizes[cand]]
        if best_num is None or num * best_den < best_num * den:
            best_num, best_den = num, den
            tied = masks[exact].tolist()
        elif num * best_den == best_num * den:
            tied.extend(masks[exact].tolist())
    witness = min(tuple(i for i in range(n) if (m >> i) & 1) for m in tied)
    return CutResult(Fraction(best_num, best_den), witness, best_num)


def _kernel(g: Graph, which: str) -> np.ndarray:
    if which == "combinatorial":
        k = np.ones(g.vertex_count)
    elif which == "normalized":
        deg = np.zeros(g.vertex_count)
        for u, v in g.edges:
            if u != v:
                deg[u] += 1
                deg[v] += 1
        k = np.sqrt(deg)
    else:
        raise PreconditionError(f"unknown Laplacian {which!r}; use 'combinatorial' or 'normalized'")
    return k / np.linalg.norm(k)


def fiedler(g: Graph, which: str = "combinatorial", method: str = "auto",
            tol: float = 1e-8, maxiter: int = 5000) -> tuple[float, np.ndarray]:
    """Second-smallest Laplacian eigenvalue and a unit eigenvector orthogonal to the kernel.

    ``method='dense'`` solves the full symmetric eigenproblem;
    ``'iterative'`` runs shift-invert Lanczos for a few of the lowest
    eigenpairs and deflates the known kernel vector out of the result.
    ``'auto'`` uses dense up to 64 vertices.
    """
    _require_connected(g, "lambda2")
    kernel = _kernel(g, which)
    lap = g.laplacian(normalized=(which == "normalized"))
    n = g.vertex_count
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    if method == "dense" or n < 5:
        vals, vecs = scipy.linalg.eigh(lap.toarray())
        vec = vecs[:, 1] - kernel * (kernel @ vecs[:, 1])
        return float(vals[1]), vec / np.linalg.norm(vec)
    if method != "iterative":
        raise PreconditionError(f"unknown method {method!r}")
    k = min(4, n - 1)
    scale = max(float(abs(lap).sum(axis=1).max()), 1.0)
    shift = -1e-3 * scale
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(n)
    v0 -= kernel * (kernel @ v0)
    try:
        vals, vecs = spla.eigsh(lap.tocsc(), k=k, sigma=shift, which="LM", v0=v0,
                                tol=tol * 1e-2, maxiter=maxiter)
    except spla.ArpackNoConvergence as exc:
        raise NonConvergenceError(f"Lanczos did not converge: {exc}", iterations=maxiter) from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    # drop the eigenvector that carries the kernel
    overlap = np.abs(kernel @ vecs)
    drop = int(np.argmax(overlap))
    rest = [i for i in range(k) if i != drop]
    i2 = rest[0]
    vec = vecs[:, i2] - kernel * (kernel @ vecs[:, i2])
    vec /= np.linalg.norm(vec)
    lam = float(vec @ (lap @ vec))
    resid = np.linalg.norm(lap @ vec - lam * vec)
    if resid > max(tol * abs(lam), 1e-10) * 10 and resid > 1e-9 * scale:
        raise NonConvergenceError(f"lambda2 residual {resid:.2e} above tolerance", residual=resid)
    return lam, vec


def lambda2(g: Graph, which: str = "combinatorial", method: str = "auto") -> float:
    return fiedler(g, which, method)[0]


def _bfs_order(g: Graph, start: int = 0) -> list[int]:
    order, seen = [], {start}
    q = deque([start])
    while q:
        v = q.popleft()
        order.append(v)
        for w, _ in g.adjacency[v]:
            if w not in seen:
                seen.add(w)
                q.append(w)
    order.extend(v for v in range(g.vertex_count) if v not in seen)
    return order


def sweep_cut(g: Graph, scores: Sequence[float]) -> CutResult:
    """Best prefix ``{v_1..v_k}``, ``k <= |V|/2``, of the score order read in either direction.

    Constant scores carry no ordering information; BFS order from vertex 0
    is swept instead.
    """
    s = np.asarray(scores, dtype=float)
    n = g.vertex_count
    if s.shape != (n,):
        raise PreconditionError(f"expected {n} scores, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise PreconditionError("sweep scores must be finite")
    if n < 2:
        raise PreconditionError("sweep_cut needs at least two vertices")
    if np.ptp(s) == 0:
        orders = [_bfs_order(g)]
    else:
        asc = np.lexsort((np.arange(n), s)).tolist()
        desc = np.lexsort((np.arange(n), -s)).tolist()
        orders = [asc, desc]
    best: CutResult | None = None
    for order in orders:
        inside = np.zeros(n, dtype=bool)
        bnd = 0
        for k, v in enumerate(order[: n // 2], start=1):
            for w, _ in g.adjacency[v]:
                if w == v:
                    continue
                bnd += -1 if inside[w] else 1
            inside[v] = True
            val = Fraction(bnd, k)
            if best is None or val < best.value:
                best = CutResult(val, tuple(sorted(order[:k])), bnd)
    return best


def fiedler_sweep(g: Graph) -> CutResult:
    return sweep_cut(g, fiedler(g)[1])


@dataclass(frozen=True)
class ExpanderCertificate:
    certified: bool
    lambda2: float
    lower_bound: float
    epsilon: float


def expander_certify(g: Graph, epsilon: float) -> ExpanderCertificate:
    """Certify ``h(G) >= epsilon`` through ``h >= lambda2 / 2`` (combinatorial Laplacian)."""
    lam = lambda2(g, "combinatorial")
    return ExpanderCertificate(lam / 2 >= epsilon, lam, lam / 2, float(epsilon))
