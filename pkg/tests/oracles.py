"""Reference implementations used only by the tests.

Each one recomputes a quantity by the most direct method available and
shares no code with the library beyond the ``Graph`` container.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, deque
from fractions import Fraction

import numpy as np


def bfs(n, edges, src):
    nbrs = [[] for _ in range(n)]
    for a, b in edges:
        nbrs[a].append(b)
        nbrs[b].append(a)
    dist = {src: 0}
    q = deque([src])
    while q:
        v = q.popleft()
        for w in nbrs[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def cheeger_bruteforce(g) -> Fraction:
    """min |dA|/|A| over all A with 1 <= |A| <= n/2, by itertools enumeration."""
    n = g.vertex_count
    best = None
    for k in range(1, n // 2 + 1):
        for A in itertools.combinations(range(n), k):
            s = set(A)
            bnd = sum((a in s) != (b in s) for a, b in g.edges)
            val = Fraction(bnd, k)
            if best is None or val < best:
                best = val
    return best


def resistance_dense(g, s: int, t: int) -> float:
    """(e_s - e_t)^T L^+ (e_s - e_t) with a dense pseudo-inverse."""
    n = g.vertex_count
    L = np.zeros((n, n))
    for a, b in g.edges:
        if a != b:
            L[a, a] += 1
            L[b, b] += 1
            L[a, b] -= 1
            L[b, a] -= 1
    x = np.zeros(n)
    x[s], x[t] = 1, -1
    return float(x @ np.linalg.pinv(L) @ x)


def rooted_isomorphic(n1, e1, r1, n2, e2, r2) -> bool:
    """Backtracking search for a root-preserving bijection respecting edge multiplicities."""
    if n1 != n2 or len(e1) != len(e2):
        return False
    n = n1
    m1 = Counter(tuple(sorted(e)) for e in e1)
    m2 = Counter(tuple(sorted(e)) for e in e2)
    d1, d2 = bfs(n, e1, r1), bfs(n, e2, r2)
    deg1 = [0] * n
    deg2 = [0] * n
    for a, b in e1:
        deg1[a] += 1
        deg1[b] += 1
    for a, b in e2:
        deg2[a] += 1
        deg2[b] += 1
    inf = n + 1
    key1 = [(d1.get(v, inf), deg1[v]) for v in range(n)]
    key2 = [(d2.get(v, inf), deg2[v]) for v in range(n)]
    if sorted(key1) != sorted(key2):
        return False
    order = sorted(range(n), key=lambda v: key1[v])
    phi = {}
    used = set()

    def consistent(v, w):
        for u, x in phi.items():
            if m1[tuple(sorted((u, v)))] != m2[tuple(sorted((x, w)))]:
                return False
        return m1[(v, v)] == m2[(w, w)]

    def go(i):
        if i == n:
            return True
        v = order[i]
        for w in range(n):
            if w in used or key2[w] != key1[v] or not consistent(v, w):
                continue
            phi[v] = w
            used.add(w)
            if go(i + 1):
                return True
            del phi[v]
            used.discard(w)
        return False

    if key1[r1] != key2[r2]:
        return False
    phi[r1] = r2
    used.add(r2)
    order.remove(r1)
    order.insert(0, r1)
    return go(1)


def support_bruteforce(points, w, delta, mode="necessary"):
    """Direct triple loop over centres and points with Euclidean distances."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    dist = lambda i, j: math.dist(pts[i], pts[j])  # noqa: E731
    rho = min(dist(w, z) for z in range(n) if z != w)
    outer = rho / delta
    inner = (delta if mode == "necessary" else 2 * delta) * rho
    eps = 1 + 1e-12
    return min(
        sum(1 for x in range(n) if dist(w, x) <= outer * eps and dist(c, x) > inner * eps)
        for c in range(n)
    )


def tree_capacity(height: int) -> float:
    """Conductance from a node to the leaves ``height`` levels below, by series-parallel reduction."""
    c = math.inf  # a leaf is the ground itself
    for _ in range(height):
        # two children, each behind a unit edge
        c = 2 * (1 / (1 + 1 / c)) if math.isfinite(c) else 2.0
    return c


def faces_count(alpha, sigma):
    n = len(alpha)
    seen = [False] * n
    f = 0
    for d in range(n):
        if not seen[d]:
            f += 1
            x = d
            while not seen[x]:
                seen[x] = True
                x = sigma[alpha[x]]
    return f


def support_bruteforce_matrix(points, delta, mode="necessary"):
    """Support value of every point from the full distance matrix, every point a centre."""
    pts = np.asarray(points, dtype=float)
    D = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    eps = 1 + 1e-12
    out = np.empty(len(pts), dtype=int)
    for w in range(len(pts)):
        rho = np.min(np.delete(D[w], w))
        inside = D[w] <= rho / delta * eps
        inner = (delta if mode == "necessary" else 2 * delta) * rho * eps
        out[w] = (inside[None, :] & (D > inner)).sum(axis=1).min()
    return out
