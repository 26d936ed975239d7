import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from consensus_bounds.netgraph import (Network, NetworkError, NetworkParseError, directify,
                                       generate_ba, is_strongly_connected, load_network,
                                       random_network, save_network,
                                       strongly_connected_components)

TRIANGLE = [(0, 1), (0, 2), (1, 2)]


def reach(adj, start, reverse=False):
    a = adj.T if reverse else adj
    seen, todo = {start}, [start]
    while todo:
        v = todo.pop()
        for w in np.flatnonzero(a[v]):
            if w not in seen:
                seen.add(int(w))
                todo.append(int(w))
    return seen


def test_ba_smallest_is_triangle():
    assert generate_ba(3, 2, seed=0) == TRIANGLE


def test_ba_rejects_too_few_nodes():
    with pytest.raises(ValueError):
        generate_ba(2, 2, seed=0)


def test_ba_ten_nodes_connected_and_degree_sum():
    edges = generate_ba(10, 2, seed=7)
    assert len(edges) == 3 + 2 * 7
    assert len(set(edges)) == len(edges)
    g = nx.Graph(edges)
    assert sorted(g.nodes) == list(range(10))
    assert nx.is_connected(g)
    assert sum(d for _, d in g.degree) == 2 * len(edges)


def test_ba_seeded():
    assert generate_ba(40, 2, seed=5) == generate_ba(40, 2, seed=5)
    assert generate_ba(40, 2, seed=5) != generate_ba(40, 2, seed=6)


def test_directify_no_removal_gives_symmetric_triangle():
    net = directify(TRIANGLE, 0.0, seed=0)
    assert len(net.arcs) == 6
    assert np.array_equal(net.adjacency, net.adjacency.T)
    assert is_strongly_connected(net)


def test_directify_triangle_half():
    net, rep = directify(TRIANGLE, 0.5, seed=1, return_report=True)
    assert rep.requested == 3
    assert rep.removed <= 3
    assert len(net.arcs) == 6 - rep.removed
    assert len(strongly_connected_components(net.successors())) == 1


def test_directify_path_removes_nothing():
    net, rep = directify([(0, 1)], 0.5, seed=0, return_report=True)
    assert rep.removed == 0
    assert len(net.arcs) == 2


@pytest.mark.parametrize("seed", range(5))
def test_random_network_strong_and_fraction(seed):
    net, rep = directify(generate_ba(60, 2, seed=seed), 0.2, seed=seed, return_report=True)
    g = nx.DiGraph([(i, j) for i, j, _ in net.arcs])
    assert nx.is_strongly_connected(g)
    assert rep.requested == int(0.2 * rep.total_arcs)
    assert 0.1 < rep.realized_fraction <= 0.2


def test_two_node_connectivity():
    assert is_strongly_connected(np.array([[0, 1], [1, 0]]))
    assert not is_strongly_connected(np.array([[0, 1], [0, 0]]))


def test_twelve_node_double_bfs(net12):
    adj = net12.adjacency
    both = reach(adj, 0) == set(range(12)) == reach(adj, 0, reverse=True)
    assert is_strongly_connected(net12) == both is True


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9), st.floats(0.05, 0.6), st.integers(0, 10**6))
def test_scc_matches_networkx(n, p, seed):
    rng = np.random.default_rng(seed)
    adj = (rng.random((n, n)) < p).astype(float)
    np.fill_diagonal(adj, 0)
    comps = strongly_connected_components([list(np.flatnonzero(r)) for r in adj])
    ours = sorted(sorted(c) for c in comps)
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(zip(*np.nonzero(adj)))
    ref = sorted(sorted(c) for c in nx.strongly_connected_components(g))
    assert ours == ref


def test_network_validation():
    with pytest.raises(NetworkError):
        Network(np.array([[1.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(NetworkError):
        Network(np.array([[0.0, 1.5], [1.0, 0.0]]))
    with pytest.raises(NetworkError):
        Network(np.array([[0.0, 1.0], [0.0, 0.0]]))
    Network(np.array([[0.0, 1.0], [0.0, 0.0]]), require_strong=False)


def test_laplacian_rows_sum_to_zero(net30):
    lap = net30.laplacian
    assert np.allclose(lap.sum(axis=1), 0, atol=1e-15)
    assert np.array_equal(np.diag(lap), net30.adjacency.sum(axis=1))


def test_round_trip(tmp_path):
    net = directify(TRIANGLE, 0.0, seed=0)
    save_network(net, tmp_path / "t.txt")
    assert load_network(tmp_path / "t.txt") == net
    big = random_network(25, 2, 0.2, seed=3)
    save_network(big, tmp_path / "b.txt")
    assert load_network(tmp_path / "b.txt") == big


@pytest.mark.parametrize("body, exc, line", [
    ("n 2\n0 0 1\n1 0 1\n", NetworkError, 2),
    ("n 2\n0 1 1.5\n1 0 1\n", NetworkError, 2),
    ("n 2\n0 1\n", NetworkParseError, 2),
    ("nodes 2\n", NetworkParseError, 1),
    ("n 2\n0 5 1\n", NetworkParseError, 2),
    ("n 2\n0 1 1\n0 1 1\n", NetworkParseError, 3),
])
def test_load_errors(tmp_path, body, exc, line):
    path = tmp_path / "bad.txt"
    path.write_text(body)
    with pytest.raises(exc, match=f"{line}"):
        load_network(path)


def test_load_rejects_disconnected(tmp_path):
    path = tmp_path / "d.txt"
    path.write_text("n 2\n0 1 1\n")
    with pytest.raises(NetworkError):
        load_network(path)
