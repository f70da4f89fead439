import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opdsim.lattice import SQRT2, Lattice, LatticeSpec, path_weight, shortest_path_indices, shortest_walk


def test_spec_rejects_tiny_lattice():
    with pytest.raises(ValueError):
        LatticeSpec(1, 5)


@pytest.mark.parametrize("i_max,j_max", [(2, 2), (3, 5), (22, 14), (100, 100)])
def test_edge_count_and_lengths(i_max, j_max):
    lat = Lattice(LatticeSpec(i_max, j_max))
    straight = (i_max - 1) * j_max + i_max * (j_max - 1)
    diagonal = 2 * (i_max - 1) * (j_max - 1)
    assert lat.n_edges == straight + diagonal
    assert np.sum(lat.lengths == 1.0) == straight
    assert np.sum(lat.lengths == SQRT2) == diagonal
    seg = lat.edge_segments()
    geo = np.hypot(*(seg[:, 1] - seg[:, 0]).T)
    assert np.allclose(geo, lat.lengths)


def test_edges_sorted_and_unique():
    lat = Lattice(LatticeSpec(7, 4))
    keys = [tuple(e) for e in lat.edges.tolist()]
    assert keys == sorted(set(keys))
    assert all(a < b for a, b in keys)


def test_index_roundtrip_and_bounds():
    lat = Lattice(LatticeSpec(5, 3))
    for v in range(lat.n_vertices):
        assert lat.index(lat.vertex(v)) == v
    assert lat.index((1, 1)) == 0
    assert lat.index((2, 1)) == 3
    with pytest.raises(ValueError):
        lat.index((6, 1))


def test_neighbors_are_sorted_and_king_moves():
    lat = Lattice(LatticeSpec(4, 4))
    v = lat.index((2, 2))
    nbr, _ = lat.neighbors(v)
    assert list(nbr) == sorted(nbr)
    got = {lat.vertex(u) for u in nbr}
    assert got == {(i, j) for i in (1, 2, 3) for j in (1, 2, 3)} - {(2, 2)}
    assert len(lat.neighbors(lat.index((1, 1)))[0]) == 3


def test_empty_field_straight_line():
    lat = Lattice(LatticeSpec(100, 100))
    res = shortest_walk(lat, lat.lengths, (50, 100), (50, 1))
    assert res.total_weight == 99.0
    assert res.vertices == tuple((50, j) for j in range(100, 0, -1))


def test_start_equals_target():
    lat = Lattice(LatticeSpec(3, 3))
    res = shortest_walk(lat, lat.lengths, (2, 2), (2, 2))
    assert res.vertices == ((2, 2),) and res.total_weight == 0.0


def test_negative_or_nan_weights_rejected():
    lat = Lattice(LatticeSpec(3, 3))
    w = lat.lengths.copy()
    w[0] = -1
    with pytest.raises(ValueError):
        shortest_walk(lat, w, (1, 1), (3, 3))
    w[0] = math.nan
    with pytest.raises(ValueError):
        shortest_walk(lat, w, (1, 1), (3, 3))


def test_blocked_cut_is_unreachable():
    lat = Lattice(LatticeSpec(4, 4))
    # cut every edge crossing between column i=2 and i=3
    cross = (lat.coords[lat.edges[:, 0], 0] <= 2) & (lat.coords[lat.edges[:, 1], 0] >= 3)
    assert shortest_walk(lat, lat.lengths, (1, 1), (4, 4), blocked=cross) is None
    assert shortest_walk(lat, lat.lengths, (1, 1), (2, 4), blocked=cross) is not None


def test_tie_break_prefers_smallest_vertex_sequence():
    lat = Lattice(LatticeSpec(3, 3))
    w = np.ones(lat.n_edges)
    # (1,1) -> (3,1): direct two steps (1,1),(2,1),(3,1) versus detours of equal unit weight
    w[:] = 1.0
    res = shortest_walk(lat, w, (1, 1), (3, 3))
    # all two-step paths weigh 2; middle vertex candidates are (2,2) only (diagonals)
    assert res.vertices == ((1, 1), (2, 2), (3, 3))
    res = shortest_walk(lat, w, (1, 2), (3, 2))
    # candidates via (2,1), (2,2), (2,3); smallest index wins
    assert res.vertices == ((1, 2), (2, 1), (3, 2))


def test_zero_weight_plateau():
    lat = Lattice(LatticeSpec(4, 4))
    w = np.zeros(lat.n_edges)
    res = shortest_walk(lat, w, (1, 1), (4, 4))
    assert res.total_weight == 0.0
    assert res.vertices[0] == (1, 1) and res.vertices[-1] == (4, 4)
    assert len(set(res.vertices)) == len(res.vertices)


def _nx_graph(lat, w, blocked):
    g = nx.Graph()
    g.add_nodes_from(range(lat.n_vertices))
    for e, (a, b) in enumerate(lat.edges.tolist()):
        if not blocked[e]:
            g.add_edge(a, b, weight=float(w[e]))
    return g


@settings(max_examples=60, deadline=None)
@given(i_max=st.integers(2, 9), j_max=st.integers(2, 9), seed=st.integers(0, 2**32 - 1),
       p_block=st.sampled_from([0.0, 0.2, 0.5]))
def test_distance_matches_networkx(i_max, j_max, seed, p_block):
    rng = np.random.default_rng(seed)
    lat = Lattice(LatticeSpec(i_max, j_max))
    w = rng.uniform(0.1, 5.0, lat.n_edges)
    blocked = rng.random(lat.n_edges) < p_block
    s, t = rng.choice(lat.n_vertices, 2, replace=False)
    path = shortest_path_indices(lat, w, int(s), int(t), blocked)
    g = _nx_graph(lat, w, blocked)
    if not nx.has_path(g, int(s), int(t)):
        assert path is None
        return
    ref = nx.dijkstra_path_length(g, int(s), int(t))
    assert path[0] == s and path[-1] == t
    assert path_weight(lat, path, w) == pytest.approx(ref, rel=1e-12)
    for a, b in zip(path, path[1:]):
        assert not blocked[lat.edge_id(a, b)]


@settings(max_examples=40, deadline=None)
@given(i_max=st.integers(2, 12), j_max=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
def test_backends_agree(i_max, j_max, seed):
    from opdsim._backend import BACKEND
    if BACKEND != "cython":
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(seed)
    lat = Lattice(LatticeSpec(i_max, j_max))
    w = rng.integers(1, 4, lat.n_edges).astype(float)
    blocked = rng.random(lat.n_edges) < 0.2
    s, t = (int(v) for v in rng.choice(lat.n_vertices, 2, replace=False))
    a = shortest_path_indices(lat, w, s, t, blocked, backend="python")
    b = shortest_path_indices(lat, w, s, t, blocked, backend="cython")
    assert a == b


def test_path_reversal_symmetry_of_weight(backend):
    rng = np.random.default_rng(3)
    lat = Lattice(LatticeSpec(8, 6))
    w = rng.uniform(0.5, 2.0, lat.n_edges)
    fwd = shortest_walk(lat, w, (1, 1), (8, 6), backend=backend)
    back = shortest_walk(lat, w, (8, 6), (1, 1), backend=backend)
    assert fwd.total_weight == pytest.approx(back.total_weight, rel=1e-12)
