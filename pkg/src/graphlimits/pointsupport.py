"""Isolation radii and (delta, s)-supported points of finite metric spaces.

A point ``w`` with isolation radius ``rho`` is supported at level ``s`` when
every ball of radius ``delta * rho`` leaves at least ``s`` points of ``C``
inside ``B(w, rho / delta)``.  The minimum over all ball centres in the
ambient space is not computable, so it is bracketed by two finite versions
with centres in ``C``:

* ``necessary``: radius ``delta * rho``.  Restricting the centres can only
  raise the minimum, so a ``False`` here proves ``w`` is not supported.
* ``sufficient``: radius ``2 * delta * rho``.  A ball ``B(p, delta * rho)``
  containing a point ``c`` of ``C`` lies inside ``B(c, 2 * delta * rho)``, so
  a ``True`` here proves ``w`` is supported.

All balls are closed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import PreconditionError

# closed-ball membership slack, so that lattice points on a sphere stay inside
REL_EPS = 1e-12
MODES = ("necessary", "sufficient")


class FiniteMetric:
    """Finite point set given by coordinates in ``R^d`` or by an explicit distance matrix."""

    def __init__(self, points=None, dist=None, check: bool = True, seed: int = 0):
        if (points is None) == (dist is None):
            raise PreconditionError("give exactly one of points or dist")
        self.points = None if points is None else np.atleast_2d(np.asarray(points, dtype=float))
        self.dist = None if dist is None else np.asarray(dist, dtype=float)
        if self.points is not None and self.points.ndim != 2:
            raise PreconditionError("points must be an (n, d) array")
        self._tree = None
        if check and self.dist is not None:
            self._check_matrix(seed)

    def _check_matrix(self, seed: int) -> None:
        d = self.dist
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise PreconditionError("distance matrix must be square")
        if not np.allclose(d, d.T, rtol=0, atol=0) or np.any(np.diag(d) != 0) or np.any(d < 0):
            raise PreconditionError("distance matrix must be symmetric, non-negative, zero on the diagonal")
        n = d.shape[0]
        if n >= 3:
            rng = np.random.default_rng(seed)
            i, j, k = rng.integers(n, size=(3, min(10_000, n ** 3)))
            if np.any(d[i, k] > (d[i, j] + d[j, k]) * (1 + 1e-9) + 1e-12):
                raise PreconditionError("distance matrix violates the triangle inequality")

    def __len__(self):
        return len(self.points) if self.points is not None else len(self.dist)

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.points)
        return self._tree

    def row(self, i: int) -> np.ndarray:
        if self.dist is not None:
            return self.dist[i]
        return np.linalg.norm(self.points - self.points[i], axis=1)

    def pairwise(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        rows, cols = np.asarray(rows, dtype=int), np.asarray(cols, dtype=int)
        if self.dist is not None:
            return self.dist[np.ix_(rows, cols)]
        diff = self.points[rows][:, None, :] - self.points[cols][None, :, :]
        return np.sqrt((diff ** 2).sum(axis=2))

    def within(self, i: int, radius: float) -> np.ndarray:
        """Indices at distance ``<= radius`` from point ``i`` (with the closed-ball slack)."""
        lim = radius * (1 + REL_EPS)
        if self.dist is not None:
            return np.flatnonzero(self.dist[i] <= lim)
        idx = np.asarray(self.tree.query_ball_point(self.points[i], lim), dtype=int)
        idx.sort()
        # the tree uses its own rounding; re-check with the same formula as row()
        return idx[np.linalg.norm(self.points[idx] - self.points[i], axis=1) <= lim]

    def scaled(self, t: float) -> "FiniteMetric":
        if self.points is not None:
            return FiniteMetric(points=self.points * t)
        return FiniteMetric(dist=self.dist * t, check=False)

    # -- text formats -----------------------------------------------------
    def to_text(self) -> str:
        if self.points is not None:
            n, d = self.points.shape
            lines = [f"{d} {n}"] + [" ".join(repr(float(x)) for x in p) for p in self.points]
        else:
            n = len(self.dist)
            lines = [str(n)] + [" ".join(repr(float(x)) for x in self.dist[i, : i + 1]) for i in range(n)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FiniteMetric":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        header = rows[0]
        if len(header) == 2:
            d, n = int(header[0]), int(header[1])
            pts = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(n, d)
            return cls(points=pts)
        n = int(header[0])
        mat = np.zeros((n, n))
        for i, r in enumerate(rows[1:]):
            if len(r) != i + 1:
                raise PreconditionError(f"row {i} of the lower triangle must have {i + 1} entries")
            mat[i, : i + 1] = [float(x) for x in r]
        mat = mat + np.tril(mat, -1).T
        return cls(dist=mat)


def isolation_radius(C: FiniteMetric, w: int) -> float:
    if len(C) < 2:
        raise PreconditionError("isolation radius needs at least two points")
    row = C.row(w).copy()
    row[w] = np.inf
    return float(row.min())


def isolation_radii(C: FiniteMetric) -> np.ndarray:
    if len(C) < 2:
        raise PreconditionError("isolation radius needs at least two points")
    if C.points is not None:
        dd, _ = C.tree.query(C.points, k=2)
        return dd[:, 1]
    d = C.dist.copy()
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def _check(delta: float, mode: str) -> None:
    if not 0 < delta < 1:
        raise PreconditionError(f"delta must lie in (0, 1), got {delta}")
    if mode not in MODES:
        raise PreconditionError(f"center_mode must be one of {MODES}, got {mode!r}")


def _removal_radius(delta: float, rho: float, mode: str) -> float:
    return (delta if mode == "necessary" else 2 * delta) * rho


def support_value(C: FiniteMetric, w: int, delta: float, mode: str = "necessary", rho: float | None = None) -> int:
    """``min_c |C ∩ B(w, rho/delta) \\ B(c, r_mode)|`` over centres ``c`` in ``C``."""
    _check(delta, mode)
    if rho is None:
        rho = isolation_radius(C, w)
    outer = rho / delta
    inner = _removal_radius(delta, rho, mode)
    local = C.within(w, outer)
    # only centres whose removal ball can reach the outer ball matter
    centers = C.within(w, outer + inner)
    d = C.pairwise(centers, local)
    removed = (d <= inner * (1 + REL_EPS)).sum(axis=1)
    return int(local.size - removed.max(initial=0))


def support_values(C: FiniteMetric, delta: float, mode: str = "necessary") -> np.ndarray:
    _check(delta, mode)
    rho = isolation_radii(C)
    return np.array([support_value(C, w, delta, mode, rho[w]) for w in range(len(C))], dtype=np.int64)


def support_value_bruteforce(C: FiniteMetric, w: int, delta: float, mode: str = "necessary") -> int:
    """Quadratic reference: every point of ``C`` is tried as a centre, no spatial index."""
    _check(delta, mode)
    n = len(C)
    rho = min(_dist(C, w, z) for z in range(n) if z != w)
    outer = rho / delta * (1 + REL_EPS)
    inner = _removal_radius(delta, rho, mode) * (1 + REL_EPS)
    best = None
    for c in range(n):
        count = 0
        for x in range(n):
            if _dist(C, w, x) <= outer and not _dist(C, c, x) <= inner:
                count += 1
        best = count if best is None else min(best, count)
    return best


def _dist(C: FiniteMetric, i: int, j: int) -> float:
    if C.dist is not None:
        return float(C.dist[i, j])
    return float(np.linalg.norm(C.points[i] - C.points[j]))


def is_supported(C: FiniteMetric, w: int, delta: float, s: float, center_mode: str = "necessary") -> bool:
    if not s > 0:
        raise PreconditionError("s must be positive")
    return support_value(C, w, delta, center_mode) >= s


def count_supported(C: FiniteMetric, delta: float, s: float, center_mode: str = "necessary") -> int:
    if not s > 0:
        raise PreconditionError("s must be positive")
    return int((support_values(C, delta, center_mode) >= s).sum())


def supported_profile(C: FiniteMetric, delta: float, s_values: Sequence[float],
                      center_mode: str = "necessary") -> dict:
    """``s * count(s) / |C|`` for each ``s``, from one pass over the points."""
    vals = support_values(C, delta, center_mode)
    return {s: s * int((vals >= s).sum()) / len(C) for s in s_values}


@dataclass(frozen=True)
class TwoCluster:
    metric: FiniteMetric
    w: int
    cluster_radius: float
    offset: float


def two_cluster_example(delta: float, s: int, d: int = 2) -> TwoCluster:
    """A point with two tight clusters of ``s`` points on opposite sides.

    ``w`` is the origin and its nearest neighbour sits at distance 1, so
    ``rho = 1``.  Clusters of radius ``rc`` are centred at ``±D`` on the
    first axis, inside ``B(w, 1/delta)``, farther than 1 from ``w``, and more
    than ``4 delta + 2 rc`` apart, so no ball of radius ``2 delta`` meets both.
    """
    if not 0 < delta < 1:
        raise PreconditionError(f"delta must lie in (0, 1), got {delta}")
    if s < 1 or d < 1:
        raise PreconditionError("need s >= 1 and d >= 1")
    rc = min(delta / 8, (1 / delta - 1) / 6)
    offset = 1 / delta - 2 * rc
    if not 2 * offset - 2 * rc > 4 * delta:
        raise PreconditionError(f"delta={delta} is too large for two separated clusters")
    pts = [np.zeros(d)]
    nb = np.zeros(d)
    nb[1 % d] = 1.0
    pts.append(nb)
    spread = np.linspace(-rc, rc, s) if s > 1 else np.zeros(1)
    for sign in (1.0, -1.0):
        for t in spread:
            p = np.zeros(d)
            p[0] = sign * offset + t
            pts.append(p)
    return TwoCluster(FiniteMetric(points=np.array(pts)), 0, rc, offset)


def uniform_square(n: int, seed=0, d: int = 2) -> FiniteMetric:
    return FiniteMetric(points=np.random.default_rng(seed).random((n, d)))
