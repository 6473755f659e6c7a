"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary block at
the end of the session lists every criterion with its measured values.
"""

from __future__ import annotations

import itertools
import time
from fractions import Fraction

import numpy as np

from graphlimits import ball
from graphlimits.bslimit import canonical_code, neighborhood_distribution, tv_distance_exact
from graphlimits.embedding import (
    euler_genus,
    min_genus_exhaustive,
    random_connected_graph,
    random_rotation_system,
    triangulate_fill,
)
from graphlimits.experiments import (
    TREE_FLOOR,
    ExperimentConfig,
    escape_instance,
    fill_properties,
    r_squared,
    run_e1_cheeger_contrast,
)
from graphlimits.families import (
    binary_tree,
    complete,
    complete_bipartite,
    cycle,
    path,
    planar_grid,
    torus_grid,
)
from graphlimits.graph import Graph, relabel
from graphlimits.pointsupport import FiniteMetric, is_supported, support_values, uniform_square
from graphlimits.potential import (
    CapacityProblem,
    effective_resistance,
    escape_probability_mc,
    p_capacity,
    parabolicity_profile,
)
from graphlimits.spectral import cheeger_exact, fiedler_sweep, lambda2

from oracles import cheeger_bruteforce, rooted_isomorphic, support_bruteforce_matrix, tree_capacity

RESULTS: dict[int, tuple[bool, str]] = {}


def report(number: int, ok: bool, detail: str) -> None:
    RESULTS[number] = (ok, detail)
    print(f"\n{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}")


# 1 -------------------------------------------------------------------------------

def test_criterion_1_triangulation_suite():
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    passed = 0
    for _ in range(200):
        rs = random_rotation_system(rng, max_vertices=40, max_valence=6)
        passed += all(fill_properties(rs, triangulate_fill(rs, 6)).values())
    elapsed = time.perf_counter() - start
    ok = passed == 200 and elapsed < 10
    report(1, ok, f"{passed}/200 fills satisfy all five properties in {elapsed:.2f} s (< 10 s)")
    assert ok


# 2 -------------------------------------------------------------------------------

def test_criterion_2_genus_oracle():
    exhaustive = {
        "K4": min_genus_exhaustive(complete(4)),
        "K5": min_genus_exhaustive(complete(5)),
        "K3,3": min_genus_exhaustive(complete_bipartite(3, 3)),
    }
    grids = {n: (euler_genus(torus_grid(n)[1]), euler_genus(planar_grid(n)[1])) for n in range(3, 9)}
    ok = exhaustive == {"K4": 0, "K5": 1, "K3,3": 1} and all(v == (1, 0) for v in grids.values())
    report(2, ok, f"min genus {exhaustive}; torus/planar grid genus (1, 0) for n=3..8: "
                  f"{all(v == (1, 0) for v in grids.values())}")
    assert ok


# 3 -------------------------------------------------------------------------------

def test_criterion_3_cheeger():
    rng = np.random.default_rng(3)
    mismatches = sandwich_failures = 0
    for _ in range(500):
        n = int(rng.integers(2, 9))
        g = random_connected_graph(rng, n, int(rng.integers(2, 6)), int(rng.integers(0, 2 * n)))
        h = cheeger_exact(g).value
        mismatches += h != cheeger_bruteforce(g)
        if not (lambda2(g) / 2 <= float(h) + 1e-12 and h <= fiedler_sweep(g).value):
            sandwich_failures += 1
    cycles_ok = all(cheeger_exact(cycle(n)).value == Fraction(2, n // 2) for n in range(4, 17))
    ok = mismatches == 0 and sandwich_failures == 0 and cycles_ok
    report(3, ok, f"500 graphs: {mismatches} oracle mismatches, {sandwich_failures} sandwich failures; "
                  f"h(C_n) = 2/floor(n/2) for n=4..16: {cycles_ok}")
    assert ok


# 4 -------------------------------------------------------------------------------

def test_criterion_4_capacity_closed_forms():
    worst_p = 0.0
    for p, L in itertools.product((1.5, 2.0, 3.0), range(2, 33)):
        e = p_capacity(CapacityProblem(path(L + 1), [0], [L], p)).energy
        worst_p = max(worst_p, abs(e - L ** (1 - p)) / L ** (1 - p))
    worst_r = max(abs(effective_resistance(path(L + 1), [0], [L]) - L) for L in range(2, 33))
    parallel = effective_resistance(Graph(2, [(0, 1), (0, 1)]), [0], [1])
    ok = worst_p <= 1e-6 and worst_r <= 1e-8 and abs(parallel - 0.5) <= 1e-12
    report(4, ok, f"max rel error of L^(1-p): {worst_p:.1e}; max |R_eff - L|: {worst_r:.1e}; "
                  f"parallel edges: {parallel!r}")
    assert ok


# 5 -------------------------------------------------------------------------------

def test_criterion_5_recurrence_contrast():
    n = 64
    root = (n // 2) * n + n // 2
    torus = parabolicity_profile(torus_grid(n)[0], root, range(2, 17))
    caps = np.array(torus.capacities)
    r2 = r_squared(np.log(torus.radii), caps)
    decreasing = bool(np.all(np.diff(caps) < 0))
    tree = parabolicity_profile(binary_tree(12), 0, range(2, 11))
    oracle = [2 * tree_capacity(r - 1) for r in tree.radii]
    tree_err = max(abs(c - o) / o for c, o in zip(tree.capacities, oracle))
    tree_min = min(tree.capacities)
    ok = r2 >= 0.98 and decreasing and tree_err <= 0.05 and tree_min >= TREE_FLOOR
    report(5, ok, f"torus cap_2 vs log r: R^2 = {r2:.4f} (need >= 0.98), strictly decreasing: {decreasing}; "
                  f"tree max rel error {tree_err:.1e} (<= 5%), min {tree_min:.4f} >= floor {TREE_FLOOR}")
    assert r2 >= 0.98
    assert decreasing
    assert tree_err <= 0.05
    assert tree_min >= TREE_FLOOR


def test_supplementary_torus_resistance_linear_in_log_r():
    # Not a numbered criterion: the planar log law puts log r against 1/cap_2.
    n = 64
    root = (n // 2) * n + n // 2
    torus = parabolicity_profile(torus_grid(n)[0], root, range(2, 17))
    r2 = r_squared(np.log(torus.radii), 1 / np.array(torus.capacities))
    print(f"\nsupplementary: torus 1/cap_2 vs log r R^2 = {r2:.5f}")
    assert r2 >= 0.98


# 6 -------------------------------------------------------------------------------

def test_criterion_6_electrical_consistency():
    lines = []
    ok = True
    for seed, name in enumerate(["K2", "C10", "grid3", "torus17", "tree8"]):
        g, root, boundary = escape_instance(name)
        est, se = escape_probability_mc(g, root, boundary, 100_000, seed=seed)
        predicted = 1 / (g.degree(root) * effective_resistance(g, [root], boundary))
        good = abs(est - predicted) <= 3 * se + 1e-12
        ok &= good
        z = 0.0 if se == 0 else (est - predicted) / se
        lines.append(f"{name} {est:.4f} vs {predicted:.4f} (z={z:+.2f})")
    report(6, ok, "; ".join(lines))
    assert ok


# 7 -------------------------------------------------------------------------------

def test_criterion_7_bs_diagnostics():
    torus_cases = [(n, r) for n in (4, 6, 8) for r in range(1, (n - 2) // 2 + 1)]
    torus_ok = all(
        tv_distance_exact(neighborhood_distribution(torus_grid(n)[0], r),
                          neighborhood_distribution(torus_grid(2 * n)[0], r)) == 0
        for n, r in torus_cases
    )
    path_cases = [(n, r) for n in (8, 12, 16, 24, 32) for r in (1, 2, 3) if n >= 2 * r + 2]
    path_ok = all(
        tv_distance_exact(neighborhood_distribution(path(n), r),
                          neighborhood_distribution(path(2 * n), r)) == Fraction(r, n)
        for n, r in path_cases
    )
    rng = np.random.default_rng(7)
    mismatches = positives = 0
    for i in range(1000):
        n = int(rng.integers(1, 11))
        g = random_connected_graph(rng, n, 4, int(rng.integers(0, n + 1)))
        r1 = int(rng.integers(n))
        if i % 2:
            # relabelled copy, with the root moved half of the time
            perm = rng.permutation(n).tolist()
            h = relabel(g, perm)
            r2 = perm[r1] if i % 4 == 1 else int(rng.integers(n))
        else:
            h = random_connected_graph(rng, n, 4, int(rng.integers(0, n + 1)))
            r2 = int(rng.integers(n))
        same = (canonical_code(ball(g, r1, n)).code == canonical_code(ball(h, r2, n)).code)
        truth = rooted_isomorphic(n, g.edges, r1, n, h.edges, r2)
        mismatches += same != truth
        positives += truth
    ok = torus_ok and path_ok and mismatches == 0
    report(7, ok, f"torus n vs 2n TV = 0 on {len(torus_cases)} cases: {torus_ok}; path TV = r/n on "
                  f"{len(path_cases)} cases: {path_ok}; codes vs search: {mismatches} mismatches "
                  f"in 1000 pairs ({positives} isomorphic)")
    assert ok


# 8 -------------------------------------------------------------------------------

def _random_set(rng):
    n = int(rng.integers(2, 201))
    d = int(rng.integers(1, 4))
    kind = rng.integers(3)
    if kind == 0:
        pts = rng.random((n, d))
    elif kind == 1:
        # lattice points: many ties on ball boundaries
        pts = rng.integers(0, 8, size=(n, d)).astype(float)
    else:
        centers = rng.random((4, d)) * 10
        pts = centers[rng.integers(4, size=n)] + rng.normal(scale=0.3, size=(n, d))
    pts = np.unique(pts, axis=0)
    return pts if len(pts) >= 2 else np.array([[0.0] * d, [1.0] + [0.0] * (d - 1)])


def test_criterion_8_supported_points():
    rng = np.random.default_rng(8)
    mismatches = comparisons = 0
    for _ in range(100):
        pts = _random_set(rng)
        delta = float(rng.choice([0.2, 0.25, 1 / 3, 0.5]))
        C = FiniteMetric(points=pts)
        truth = support_bruteforce_matrix(pts, delta, "necessary")
        for w in range(len(pts)):
            s = int(rng.integers(1, 12))
            comparisons += 1
            mismatches += is_supported(C, w, delta, s, "necessary") != (truth[w] >= s)

    maxima = {}
    for n in (100, 1000, 10_000):
        vals = support_values(uniform_square(n, seed=n), 1 / 3, "necessary")
        maxima[n] = max(s * int((vals >= s).sum()) / n for s in range(2, 129))
    slope = float(np.polyfit(np.log(list(maxima)), np.log(list(maxima.values())), 1)[0])

    rng = np.random.default_rng(88)
    checks = violations = 0
    while checks < 10_000:
        pts = _random_set(rng)[:60]
        C = FiniteMetric(points=pts)
        mode = ["necessary", "sufficient"][checks % 2]
        d_lo, d_hi = sorted(rng.uniform(0.05, 0.95, size=2))
        lo, hi = support_values(C, d_lo, mode), support_values(C, d_hi, mode)
        # supported at delta implies supported at every smaller delta'
        violations += int(np.sum(lo < hi))
        checks += len(pts)
        for w in rng.integers(len(pts), size=5):
            s, s_small = sorted(rng.integers(1, 20, size=2), reverse=True)
            if is_supported(C, int(w), d_hi, int(s), mode) and not is_supported(C, int(w), d_hi, int(s_small), mode):
                violations += 1
            checks += 1
    ok = mismatches == 0 and abs(slope) <= 0.1 and violations == 0
    report(8, ok, f"predicate vs brute force: {mismatches}/{comparisons} mismatches; max s*count/|C| = "
                  + ", ".join(f"{v:.2f}" for v in maxima.values())
                  + f" (slope {slope:+.3f}); {violations} violations in {checks} monotonicity checks")
    assert ok


# 9 -------------------------------------------------------------------------------

def test_criterion_9_expander_echo():
    cfg = ExperimentConfig.resolve("e1", {"planar_sizes": list(range(8, 65)), "torus_sizes": [],
                                          "regular_sizes": [100, 200, 500, 1000], "seeds_per_size": 10})
    res = run_e1_cheeger_contrast(cfg)
    regular = [r for r in res.rows if r["family"] == "random_regular"]
    planar = [r for r in res.rows if r["family"] == "planar_grid"]
    floor = cfg.params["lambda_floor"]
    frac = sum(r["h_lower"] >= floor for r in regular) / len(regular)
    grids_ok = all(r["h_upper"] <= 4 / r["n"] for r in planar)
    print("\nfamily          n  h_upper   h_lower")
    for r in planar[::8] + regular[::10]:
        print(f"{r['family']:<15}{r['n']:>5}  {r['h_upper']:.4f}   {r['h_lower']:.4f}")
    ok = frac >= 0.9 and grids_ok and len(planar) == 57 and len(regular) == 40
    report(9, ok, f"lambda2/2 >= {floor} on {frac:.0%} of 40 random 3-regular graphs "
                  f"(min {min(r['h_lower'] for r in regular):.4f}); planar h_upper <= 4/n for n=8..64: {grids_ok}")
    assert ok

