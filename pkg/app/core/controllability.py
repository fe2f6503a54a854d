"""Minimum driver-node counts and the controllability curve.

Structural controllability uses the minimum input theorem,
``N_D = max(N - |M*|, 1)``, where ``M*`` is a maximum matching between
out-copies and in-copies of the active nodes. Exact controllability uses
``N_D = max(N - rank(A), 1)`` on the weighted transposed adjacency matrix.
"""
from typing import List

import numpy as np

from app.core.attacks import AttackTrace
from app.core.graph import Graph
from app.core.matching import HopcroftKarp
from app.core.spectral import matrix_rank
from app.schemas.attack import OracleMode

RANK_TOLERANCE = 1e-9


def matching_adjacency(g: Graph) -> List[List[int]]:
    """Left adjacency (out-copy -> in-copies) over all nodes; undirected edges count both ways."""
    adjacency: List[List[int]] = [[] for _ in range(g.n)]
    for u, v, _ in g.edges():
        adjacency[u].append(v)
        if not g.directed:
            adjacency[v].append(u)
    return adjacency


def nd_structural(g: Graph) -> int:
    """Driver nodes under structural controllability."""
    n = g.n_active
    if n == 0:
        return 0
    matched = HopcroftKarp(matching_adjacency(g), g.active).run()
    return max(n - matched, 1)


def nd_exact(g: Graph) -> int:
    """Driver nodes under exact controllability (rank of A over the reals)."""
    n = g.n_active
    if n == 0:
        return 0
    a = g.adjacency_matrix(weighted=True).T
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    rank = matrix_rank(a, RANK_TOLERANCE * scale) if scale > 0 else 0
    return max(n - rank, 1)


def driver_counts_along(g: Graph, order: List[int], mode: OracleMode = OracleMode.STRUCTURAL) -> List[int]:
    """``N_D`` after each removal in ``order`` (the input graph is not modified)."""
    work = g.copy()
    counts: List[int] = []
    if mode == OracleMode.EXACT:
        for v in order:
            work.remove_node(v)
            counts.append(nd_exact(work))
        return counts

    matcher = HopcroftKarp(matching_adjacency(g), work.active)
    matcher.run()
    for v in order:
        work.remove_node(v)
        matcher.release(v)
        matched = matcher.run()
        counts.append(max(work.n_active - matched, 1))
    return counts


def controllability_values(g: Graph, trace: AttackTrace, mode: OracleMode = OracleMode.STRUCTURAL) -> List[float]:
    """``n_D(i) = N_D(i) / (N - i)`` for ``i = 1..len(trace)``."""
    n = g.n_active
    counts = driver_counts_along(g, trace.order, mode)
    return [count / (n - i) for i, count in enumerate(counts, start=1)]
