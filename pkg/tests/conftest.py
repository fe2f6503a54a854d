import numpy as np
import pytest
import structlog

from app.core.graph import Graph


def random_graph(rng: np.random.Generator, n: int, p: float, directed: bool, weighted: bool = False) -> Graph:
    """Erdős–Rényi style test graph with independent edge coins."""
    edges = []
    for u in range(n):
        for v in range(n):
            if u == v or (not directed and v < u):
                continue
            if rng.random() < p:
                w = float(rng.uniform(0.5, 2.0)) if weighted else 1.0
                edges.append((u, v, w))
    return Graph.from_edges(n, edges, directed)


@pytest.fixture(autouse=True)
def _isolate_structlog(monkeypatch):
    """Keep a CLI test's structlog config from binding later tests to its closed capture stream."""
    real_configure = structlog.configure
    saved = structlog.get_config()

    def configure_uncached(**kw):
        kw["cache_logger_on_first_use"] = False
        real_configure(**kw)

    monkeypatch.setattr(structlog, "configure", configure_uncached)
    real_configure(cache_logger_on_first_use=False)
    yield
    real_configure(**saved)
    real_configure(cache_logger_on_first_use=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def path5():
    """Undirected path 0-1-2-3-4."""
    return Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)], directed=False)


@pytest.fixture
def directed_star():
    """Hub 0 pointing at 1..4."""
    return Graph.from_edges(5, [(0, v) for v in range(1, 5)], directed=True)


@pytest.fixture
def directed_chain():
    """0 -> 1 -> 2 -> 3."""
    return Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)], directed=True)


@pytest.fixture
def six_node_graph():
    """Small directed graph with a cycle, a hub and an isolated node."""
    edges = [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0), (1, 3)]
    return Graph.from_edges(6, edges, directed=True)
