import json
from math import comb

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qconsensus.errors import ParameterError, ParseError
from qconsensus.graphs import (
    TopologySpec,
    WeightedGraph,
    build_topology,
    cartesian_product,
    from_json,
    is_connected,
    laplacian,
    to_dot,
    to_json,
)

T = TopologySpec

CATALOG = [
    T("path", (2,)), T("path", (3,)), T("path", (4,)), T("path", (7,)), T("cycle", (5,)),
    T("star", (4,)), T("complete", (5,)), T("paw"), T("lollipop", (4, 3)), T("lollipop", (2, 1)),
    T("ccs_star", (5, 3)), T("ccs_star", (2, 1)), T("ccs_two_branch", (5, 2, 3)),
    T("symmetric_star", (5, 3)), T("palm", (5, 4)), T("coupled_complete", (3, 2, 4)),
    T("cartesian_product", (T("complete", (2,)), T("complete", (3,)))),
]


def nx_laplacian(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n_vertices))
    for (i, j), w in zip(g.edges, g.weights):
        G.add_edge(i, j, weight=w)
    return nx.laplacian_matrix(G, nodelist=range(g.n_vertices), weight="weight").toarray()


def test_ccs_star_five_three():
    g = build_topology(T("ccs_star", (5, 3)))
    # 5 clique vertices plus 5 branches of 3 new vertices each
    assert g.n_vertices == 20
    assert g.n_edges == comb(5, 2) + 15 == 25
    assert g.orbits() == [0, 1, 2, 3]


def test_path_two_single_edge():
    g = build_topology(T("path", (2,)))
    assert g.edges == ((0, 1),)
    assert g.orbits() == [0]


def test_lollipop_four_three_orbits():
    g = build_topology(T("lollipop", (4, 3)))
    assert g.orbits() == [-1, 0, 1, 2, 3]
    assert g.orbit_sizes()[-1] == comb(4, 2) == 6
    assert g.orbit_sizes()[0] == 4


def test_orbit_sizes_of_families():
    assert build_topology(T("ccs_two_branch", (5, 2, 3))).orbit_sizes() == {
        -2: 5, -1: 5, 0: 10, 1: 5, 2: 5, 3: 5}
    assert build_topology(T("palm", (5, 4))).orbit_sizes() == {0: 5, 1: 1, 2: 1, 3: 1, 4: 1}
    assert build_topology(T("coupled_complete", (3, 2, 4))).orbit_sizes() == {
        -2: 3, -1: 6, 0: 1, 1: 8, 2: 6}
    assert build_topology(T("symmetric_star", (5, 3))).orbit_sizes() == {1: 5, 2: 5, 3: 5}
    assert build_topology(T("paw")).orbit_sizes() == {0: 1, 1: 4}


def test_path_orbits_count_outward():
    assert build_topology(T("path", (6,))).orbit_of_edge == (2, 1, 0, 1, 2)
    assert build_topology(T("path", (5,))).orbit_of_edge == (2, 1, 1, 2)


@pytest.mark.parametrize("spec", CATALOG, ids=str)
def test_catalog_graphs_are_connected_and_simple(spec):
    g = build_topology(spec)
    assert is_connected(g)
    assert len(set(g.edges)) == g.n_edges
    assert all(i != j for i, j in g.edges)


@pytest.mark.parametrize("spec", CATALOG, ids=str)
def test_laplacian_matches_networkx(spec):
    g = build_topology(spec)
    L = laplacian(g)
    np.testing.assert_array_equal(L, nx_laplacian(g))
    assert np.max(np.abs(L @ np.ones(g.n_vertices))) <= 1e-14 * g.max_weight()
    assert np.linalg.eigvalsh(L)[0] >= -1e-10


def test_laplacian_path_three():
    L = laplacian(build_topology(T("path", (3,))))
    np.testing.assert_array_equal(L, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_laplacian_single_edge_weight():
    g = WeightedGraph(2, ((0, 1),), (0.7,), (0,))
    np.testing.assert_array_equal(laplacian(g), [[0.7, -0.7], [-0.7, 0.7]])


def test_laplacian_k4():
    L = laplacian(build_topology(T("complete", (4,))))
    np.testing.assert_array_equal(L, 4 * np.eye(4) - np.ones((4, 4)))


def test_invalid_parameters():
    with pytest.raises(ParameterError):
        build_topology(T("ccs_star", (1, 3)))
    with pytest.raises(ParameterError):
        build_topology(T("cycle", (2,)))
    with pytest.raises(ParameterError):
        T("hexagon", (6,))
    with pytest.raises(ParameterError):
        WeightedGraph(3, ((0, 0),), (1.0,), (0,))
    with pytest.raises(ParameterError):
        WeightedGraph(3, ((0, 1), (1, 0)), (1.0, 1.0), (0, 0))
    with pytest.raises(ParameterError):
        WeightedGraph(2, ((0, 1),), (-1.0,), (0,))


def test_prism():
    g = build_topology(T("cartesian_product", (T("complete", (2,)), T("complete", (3,)))))
    assert g.n_vertices == 6 and g.n_edges == 9
    assert g.orbit_sizes() == {1: 3, 2: 6}
    assert to_dot(g).count(" -- ") == 9


def test_trivial_factor_is_identity():
    k1 = WeightedGraph(1, (), (), ())
    g = build_topology(T("lollipop", (3, 2)))
    prod = cartesian_product(k1, g)
    np.testing.assert_array_equal(laplacian(prod), laplacian(g))


def random_weighted(rng, spec):
    g = build_topology(spec)
    return g.with_weights(rng.uniform(0.1, 2.0, g.n_edges))


@pytest.mark.parametrize("pair", [("path", 3, "cycle", 4), ("star", 4, "complete", 3), ("paw", None, "path", 2)])
def test_kronecker_sum_and_spectrum(rng, pair):
    k1, n1, k2, n2 = pair
    g1 = random_weighted(rng, T(k1, () if n1 is None else (n1,)))
    g2 = random_weighted(rng, T(k2, (n2,)))
    g = cartesian_product(g1, g2)
    L1, L2 = laplacian(g1), laplacian(g2)
    expected = np.kron(L1, np.eye(g2.n_vertices)) + np.kron(np.eye(g1.n_vertices), L2)
    np.testing.assert_allclose(laplacian(g), expected, atol=1e-14)
    sums = np.sort([a + b for a in np.linalg.eigvalsh(L1) for b in np.linalg.eigvalsh(L2)])
    np.testing.assert_allclose(np.linalg.eigvalsh(laplacian(g)), sums, atol=1e-10)


def test_disconnected_graph_detected():
    g = WeightedGraph(4, ((0, 1), (2, 3)), (1.0, 1.0), (0, 0))
    assert not is_connected(g)
    assert np.linalg.eigvalsh(laplacian(g))[1] < 1e-12


def test_json_schema_path_two():
    doc = json.loads(to_json(build_topology(T("path", (2,)))))
    assert doc == {"n_vertices": 2, "edges": [[0, 1]], "weights": [1.0], "orbits": [0]}


def test_json_roundtrip_ccs_star():
    g = build_topology(T("ccs_star", (5, 3)))
    assert from_json(to_json(g)) == g


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1e6, allow_nan=False, allow_infinity=False), min_size=4, max_size=4))
def test_json_roundtrip_exact_weights(ws):
    g = build_topology(T("cycle", (4,))).with_weights(ws)
    back = from_json(to_json(g))
    assert back.weights == g.weights


@pytest.mark.parametrize("text,field", [
    ("{", "line 1"),
    ('{"edges": []}', "n_vertices"),
    ('{"n_vertices": 2, "edges": [[0]]}', "edges[0]"),
    ('{"n_vertices": 2, "edges": [[0, 1]], "weights": ["a"]}', "weights[0]"),
    ('{"n_vertices": 2, "edges": [[0, 1]], "weights": [1.0, 2.0]}', "weights"),
    ('{"n_vertices": 2, "edges": [[0, 0]]}', "self-loop"),
])
def test_malformed_json_reports_context(text, field):
    with pytest.raises(ParseError, match=field.replace("[", r"\[").replace("]", r"\]")):
        from_json(text)
