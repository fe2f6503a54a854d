"""Shortest-path betweenness (Brandes accumulation) over active nodes."""
from collections import deque
from typing import Dict, List

import numpy as np

from app.core.graph import Graph


def _successors(g: Graph) -> Dict[int, List[int]]:
    if g.directed:
        return {u: sorted(g.out_neighbors(u)) for u in g.active_nodes()}
    return {u: g.neighbors(u) for u in g.active_nodes()}


def betweenness(g: Graph) -> np.ndarray:
    """Unnormalized betweenness of every node; inactive nodes score 0.

    Paths are counted by hop length, so edge weights never matter. For
    undirected graphs each unordered pair is counted once.
    """
    scores = np.zeros(g.n)
    graph = _successors(g)

    for source in graph:
        # Single-source shortest paths
        dist = {source: 0}
        sigma = {source: 1.0}
        preds: Dict[int, List[int]] = {source: []}
        order: List[int] = []
        queue = deque([source])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in graph[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    sigma[w] = 0.0
                    preds[w] = []
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)

        # Dependency accumulation in reverse BFS order
        delta = {v: 0.0 for v in order}
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != source:
                scores[w] += delta[w]

    if not g.directed:
        scores /= 2.0
    return scores
