import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphlimits import Graph, PreconditionError
from graphlimits.embedding import (
    RotationSystem,
    euler_genus,
    metric_stretch,
    min_genus_exhaustive,
    random_rotation_system,
    rotation_system_count,
    trace_faces,
    triangulate_fill,
    zigzag_triangulate_polygon,
)
from graphlimits.experiments import fill_properties
from graphlimits.families import complete, complete_bipartite, cycle, planar_grid, torus_grid

from oracles import faces_count


@pytest.mark.parametrize("g, genus", [
    (complete(4), 0),
    (complete(5), 1),
    (complete_bipartite(3, 3), 1),
    (cycle(5), 0),
])
def test_min_genus(g, genus):
    assert min_genus_exhaustive(g) == genus


def test_min_genus_budget():
    with pytest.raises(PreconditionError):
        min_genus_exhaustive(complete(6), budget=1000)


@pytest.mark.parametrize("n", range(3, 9))
def test_grid_genus(n):
    assert euler_genus(torus_grid(n)[1]) == 1
    assert euler_genus(planar_grid(n)[1]) == 0


def test_rotation_count_k4():
    assert rotation_system_count(complete(4)) == 2 ** 4


def test_invalid_rotation_rejected():
    # dart 0 appears at two vertices
    with pytest.raises(PreconditionError):
        RotationSystem.from_rotations(2, [[0, 1], [0]])


def test_text_roundtrip():
    rs = torus_grid(4)[1]
    assert RotationSystem.from_text(rs.to_text()) == rs


def test_zigzag_degrees():
    for n in range(3, 30):
        chords = zigzag_triangulate_polygon(n)
        assert len(chords) == n - 3
        count = np.zeros(n, int)
        for a, b in chords:
            count[a] += 1
            count[b] += 1
        assert count.max(initial=0) <= 2


def test_fill_c4():
    rs = RotationSystem.from_graph(cycle(4))
    out = triangulate_fill(rs)
    assert set(trace_faces(out).lengths) == {3}
    assert euler_genus(out) == 0
    assert out.valences() == [3, 3, 3, 3]
    assert metric_stretch(cycle(4), out.graph(), range(4)).shrink == 2.0


def test_fill_rejects_digon():
    rs = RotationSystem.from_graph(Graph(2, [(0, 1), (0, 1)]))
    with pytest.raises(PreconditionError):
        triangulate_fill(rs)


def test_fill_rejects_valence_over_bound():
    with pytest.raises(PreconditionError):
        triangulate_fill(torus_grid(4)[1], d=3)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_fill_properties(seed):
    rs = random_rotation_system(np.random.default_rng(seed), max_vertices=25)
    out = triangulate_fill(rs)
    assert all(fill_properties(rs, out).values())
    # idempotent once every face is a triangle
    assert triangulate_fill(out) == out


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_face_count_matches_oracle(seed):
    rs = random_rotation_system(np.random.default_rng(seed), max_vertices=15)
    assert trace_faces(rs).face_count == faces_count(rs.alpha, rs.sigma)
    # the face lengths partition the darts
    assert sum(trace_faces(rs).lengths) == rs.dart_count


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_genus_invariant_under_relabelling(seed):
    rng = np.random.default_rng(seed)
    rs = random_rotation_system(rng, max_vertices=15)
    perm = rng.permutation(rs.dart_count).tolist()
    assert euler_genus(rs.conjugate(perm)) == euler_genus(rs)


def test_stretch_identity():
    g = planar_grid(5)[0]
    rep = metric_stretch(g, g, range(g.vertex_count))
    assert (rep.shrink, rep.expand, rep.density) == (1.0, 1.0, 0.0)
