"""Weak connectivity: union-find, largest component, and the connectivity curve."""
from typing import List

from app.core.graph import Graph


class UnionFind:
    """Disjoint sets over ``0..n-1`` with union by size and path halving."""

    def __init__(self, n: int):
        self.parents = list(range(n))
        self.sizes = [1] * n

    def find(self, x: int) -> int:
        parents = self.parents
        while parents[x] != x:
            parents[x] = parents[parents[x]]
            x = parents[x]
        return x

    def union(self, a: int, b: int) -> int:
        """Merge the sets of ``a`` and ``b``; return the size of the merged set."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return self.sizes[ra]
        if self.sizes[ra] < self.sizes[rb]:
            ra, rb = rb, ra
        self.parents[rb] = ra
        self.sizes[ra] += self.sizes[rb]
        return self.sizes[ra]

    def size_of(self, x: int) -> int:
        return self.sizes[self.find(x)]


def largest_component_size(g: Graph) -> int:
    """Size of the largest weakly connected component of the active subgraph."""
    if g.n_active == 0:
        return 0
    uf = UnionFind(g.n)
    for u, v, _ in g.edges():
        uf.union(u, v)
    return max(uf.size_of(v) for v in g.active_nodes())


def lcc_sizes_along(g: Graph, order: List[int]) -> List[int]:
    """LCC size after removing ``order[:i]`` for ``i = 1..len(order)``.

    Works backwards: nodes are re-added in reverse removal order and the
    running maximum component size is recorded (percolation).
    """
    alive = g.active.copy()
    for v in order:
        alive[v] = False
    uf = UnionFind(g.n)
    largest = 0
    for v in range(g.n):
        if alive[v]:
            for w in g.neighbors(v):
                if alive[w]:
                    uf.union(v, w)
    for v in range(g.n):
        if alive[v]:
            largest = max(largest, uf.size_of(v))

    sizes = [0] * len(order)
    for i in range(len(order) - 1, -1, -1):
        sizes[i] = largest
        v = order[i]
        alive[v] = True
        largest = max(largest, 1)
        for w in g.neighbors(v):
            if alive[w]:
                largest = max(largest, uf.union(v, w))
    return sizes
