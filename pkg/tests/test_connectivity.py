import itertools

import networkx as nx
import pytest

from app.core.connectivity import UnionFind, largest_component_size, lcc_sizes_along
from tests.conftest import random_graph


def _networkx_lcc(g) -> int:
    h = nx.Graph()
    h.add_nodes_from(g.active_nodes())
    h.add_edges_from((u, v) for u, v, _ in g.edges())
    if h.number_of_nodes() == 0:
        return 0
    return max(len(c) for c in nx.connected_components(h))


def test_union_find_sizes():
    uf = UnionFind(5)
    assert uf.union(0, 1) == 2
    assert uf.union(3, 4) == 2
    assert uf.union(1, 4) == 4
    assert uf.union(0, 3) == 4
    assert uf.find(0) == uf.find(4)
    assert uf.size_of(2) == 1


@pytest.mark.parametrize("directed", [True, False])
def test_largest_component_matches_networkx(rng, directed):
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(1, 25)), 0.08, directed)
        assert largest_component_size(g) == _networkx_lcc(g)


@pytest.mark.parametrize("directed", [True, False])
def test_percolation_sizes_match_recomputation(rng, directed):
    for _ in range(10):
        n = int(rng.integers(2, 25))
        g = random_graph(rng, n, 0.1, directed)
        order = [int(v) for v in rng.permutation(n)[: n - 1]]
        work = g.copy()
        expected = []
        for v in order:
            work.remove_node(v)
            expected.append(_networkx_lcc(work))
        assert lcc_sizes_along(g, order) == expected


def test_path_split(path5):
    assert lcc_sizes_along(path5, [2, 0, 1, 3]) == [2, 2, 2, 1]


def _linked(g, u: int, v: int) -> bool:
    return g.has_edge(u, v) or g.has_edge(v, u)


def _is_connected(g, nodes) -> bool:
    reached = {nodes[0]}
    grew = True
    while grew:
        grew = False
        for v in nodes:
            if v not in reached and any(_linked(g, u, v) for u in reached):
                reached.add(v)
                grew = True
    return len(reached) == len(nodes)


def _exhaustive_lcc(g) -> int:
    """Largest connected node subset, found by trying every subset from the largest down."""
    active = g.active_nodes()
    for size in range(len(active), 0, -1):
        if any(_is_connected(g, list(nodes)) for nodes in itertools.combinations(active, size)):
            return size
    return 0


@pytest.mark.parametrize("directed", [True, False])
def test_largest_component_matches_exhaustive_enumeration(rng, directed):
    for _ in range(120):
        n = int(rng.integers(1, 9))
        g = random_graph(rng, n, float(rng.uniform(0.05, 0.5)), directed)
        for v in rng.permutation(n)[: int(rng.integers(0, n))]:
            g.remove_node(int(v))
        assert largest_component_size(g) == _exhaustive_lcc(g)
