import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphlimits import Graph, NonConvergenceError, PreconditionError
from graphlimits.embedding import random_connected_graph
from graphlimits.families import binary_tree, complete, cycle, path, planar_grid, torus_grid
from graphlimits.potential import (
    CapacityProblem,
    PotentialSolution,
    boundary_paths,
    cap_mod_constant,
    capacity,
    compare_cap_mod,
    dumps,
    edge_energy,
    effective_resistance,
    escape_probability_mc,
    modulus_small,
    p_capacity,
    parabolicity_profile,
)

from oracles import resistance_dense, tree_capacity


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("L", [2, 5, 17])
def test_path_closed_form(p, L):
    assert capacity(path(L + 1), [0], [L], p) == pytest.approx(L ** (1 - p), rel=1e-6)


def test_parallel_edges():
    assert effective_resistance(Graph(2, [(0, 1), (0, 1)]), [0], [1]) == pytest.approx(0.5, rel=1e-12)


def test_grid_3x3_corner_resistance():
    assert effective_resistance(planar_grid(3)[0], [0], [8]) == pytest.approx(1.5, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_resistance_matches_pseudoinverse(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 20))
    g = random_connected_graph(rng, n, 5, int(rng.integers(0, 2 * n)))
    s, t = (int(x) for x in rng.choice(n, 2, replace=False))
    assert effective_resistance(g, [s], [t]) == pytest.approx(resistance_dense(g, s, t), rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1.5, 2.5, 3.0]))
def test_potential_is_optimal(seed, p):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 16))
    g = random_connected_graph(rng, n, 4, n)
    s, t = (int(x) for x in rng.choice(n, 2, replace=False))
    sol = p_capacity(CapacityProblem(g, [s], [t], p))
    # maximum principle
    assert sol.u.min() >= 0 and sol.u.max() <= 1
    # random admissible perturbations never lower the energy
    free = np.array([v for v in range(n) if v not in (s, t)], dtype=int)
    for _ in range(10):
        v = sol.u.copy()
        v[free] += 1e-3 * rng.standard_normal(free.size)
        assert edge_energy(g, v, p) >= sol.energy * (1 - 1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_capacity_monotone_in_ground(seed):
    # shrinking the ground set (moving it away) can only lower capacity
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 25))
    g = random_connected_graph(rng, n, 4, n)
    dist = __import__("graphlimits").distances_from(g, 0)
    far = int(dist.max())
    if far < 2:
        return
    near = capacity(g, [0], np.flatnonzero(dist >= far - 1).tolist())
    farther = capacity(g, [0], np.flatnonzero(dist >= far).tolist())
    assert farther <= near * (1 + 1e-9)


def test_unreachable_ground_has_zero_capacity():
    g = Graph(4, [(0, 1), (2, 3)])
    sol = p_capacity(CapacityProblem(g, [0], [3]))
    assert sol.energy == 0.0 and sol.u[1] == 1.0


def test_problem_validation():
    g = path(3)
    with pytest.raises(PreconditionError):
        CapacityProblem(g, [0], [0])
    with pytest.raises(PreconditionError):
        CapacityProblem(g, [0], [2], exponent=1.0)
    with pytest.raises(PreconditionError):
        CapacityProblem.from_dict({**CapacityProblem(g, [0], [2]).to_dict(), "extra": 1})


def test_serialization_roundtrip():
    prob = CapacityProblem(torus_grid(5)[0], [0], [12, 13], 2.5)
    back = CapacityProblem.from_dict(json.loads(json.dumps(prob.to_dict())))
    assert back == prob
    sol = p_capacity(prob)
    assert PotentialSolution.from_dict(json.loads(dumps(sol))) == sol


def test_non_convergence_is_reported():
    prob = CapacityProblem(planar_grid(8)[0], [0], [63], 4.0)
    with pytest.raises(NonConvergenceError) as info:
        p_capacity(prob, tol=1e-14, maxiter=1)
    assert info.value.iterations == 1


def test_path_profile():
    prof = parabolicity_profile(path(40), 0, [2, 4, 8, 16])
    assert prof.capacities == pytest.approx([1 / (r - 1) for r in prof.radii], abs=1e-9)
    assert prof.verdict == "decaying toward 0"


def test_tree_profile_against_series_parallel():
    prof = parabolicity_profile(binary_tree(9), 0, range(2, 10))
    expected = [2 * tree_capacity(r - 1) for r in prof.radii]
    assert prof.capacities == pytest.approx(expected, rel=1e-8)
    assert prof.verdict == "bounded away from 0"


def test_profile_rejects_radius_beyond_graph():
    with pytest.raises(PreconditionError):
        parabolicity_profile(path(5), 0, [2, 10])


def test_escape_mc_c10():
    est, se = escape_probability_mc(cycle(10), 0, [5], 20_000, seed=3)
    assert abs(est - 0.2) <= 4 * se


def test_escape_mc_deterministic():
    g = planar_grid(4)[0]
    assert escape_probability_mc(g, 0, [15], 1000, seed=7) == escape_probability_mc(g, 0, [15], 1000, seed=7)


def test_modulus_examples():
    # one path of k vertices: rho = 1/k on each, Mod_2 = 1/k
    assert modulus_small([(0, 1, 2, 3)]).value == pytest.approx(0.25, rel=1e-6)
    # two disjoint paths add
    assert modulus_small([(0, 1), (2, 3)]).value == pytest.approx(1.0, rel=1e-6)
    # shared vertex: rho = (2/3, 1/3, 1/3) minimises a^2 + 2(1-a)^2
    assert modulus_small([(0, 1), (0, 2)]).value == pytest.approx(2 / 3, rel=1e-6)
    assert modulus_small([]).value == 0.0


def test_modulus_admissible():
    fam = boundary_paths(planar_grid(4)[0], [0], 3)
    res = modulus_small(fam)
    for path_ in fam:
        assert sum(res.rho[v] for v in path_) >= 1 - 1e-12


@pytest.mark.parametrize("g, src, r", [
    (path(4), [0], 3),
    (complete(4), [0], 1),
    (planar_grid(3)[0], [4], 1),
    (planar_grid(4)[0], [0], 2),
    (binary_tree(3), [0], 2),
])
@pytest.mark.parametrize("p", [2.0, 3.0])
def test_cap_mod_comparable(g, src, r, p):
    cmp = compare_cap_mod(g, src, r, p)
    c = cap_mod_constant(g.max_degree, p)
    assert 1 / c <= cmp.ratio <= c


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2.0, 3.0]))
def test_edge_deletion_never_raises_capacity(seed, p):
    from graphlimits.graph import delete_edges, multi_source_distances

    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 16))
    g = random_connected_graph(rng, n, 4, n)
    s, t = (int(x) for x in rng.choice(n, 2, replace=False))
    h = delete_edges(g, rng.choice(g.edge_count, size=int(rng.integers(1, 3)), replace=False).tolist())
    if not np.isfinite(multi_source_distances(h, [s])[t]):
        return
    assert capacity(h, [s], [t], p) <= capacity(g, [s], [t], p) * (1 + 1e-8)
