"""Graph representation with a liveness mask for attack simulation.

Node ids are dense integers ``0..n-1``. Adjacency is kept as one dict per
node mapping neighbor id to edge weight; undirected graphs share a single
adjacency for both directions. Removing a node only flips its mask bit, so
every traversal below skips inactive endpoints instead of rebuilding the
structure.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import GraphStateError

Edge = Tuple[int, int, float]


@dataclass(frozen=True)
class DegreeVector:
    """Per-node in/out degree counts over active nodes."""
    in_deg: np.ndarray
    out_deg: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.in_deg + self.out_deg


class Graph:
    """Simple directed or undirected graph, optionally edge-weighted."""

    def __init__(
        self,
        n: int,
        directed: bool,
        out_adj: List[Dict[int, float]],
        in_adj: List[Dict[int, float]],
        active: Optional[np.ndarray] = None,
    ):
        self.n = n
        self.directed = directed
        self._out = out_adj
        self._in = in_adj
        self.active = np.ones(n, dtype=bool) if active is None else active

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence], directed: bool) -> "Graph":
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples.

        Raises:
            GraphStateError: on out-of-range ids, self-loops, duplicate edges
                or non-positive weights.
        """
        if n < 0:
            raise GraphStateError(f"node count must be non-negative, got {n}")
        out_adj: List[Dict[int, float]] = [dict() for _ in range(n)]
        in_adj = out_adj if not directed else [dict() for _ in range(n)]

        for edge in edges:
            u, v = int(edge[0]), int(edge[1])
            w = float(edge[2]) if len(edge) > 2 else 1.0
            if not (0 <= u < n and 0 <= v < n):
                raise GraphStateError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            if u == v:
                raise GraphStateError(f"self-loop on node {u}")
            if not w > 0:
                raise GraphStateError(f"edge ({u}, {v}) has non-positive weight {w}")
            if v in out_adj[u]:
                raise GraphStateError(f"duplicate edge ({u}, {v})")
            out_adj[u][v] = w
            if directed:
                in_adj[v][u] = w
            else:
                out_adj[v][u] = w

        return cls(n, directed, out_adj, in_adj)

    # Structure queries

    def is_active(self, v: int) -> bool:
        return bool(self.active[v])

    def active_nodes(self) -> List[int]:
        return [int(v) for v in np.flatnonzero(self.active)]

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    def out_neighbors(self, u: int) -> Iterator[int]:
        active = self.active
        return (v for v in self._out[u] if active[v])

    def in_neighbors(self, v: int) -> Iterator[int]:
        active = self.active
        return (u for u in self._in[v] if active[u])

    def neighbors(self, u: int) -> List[int]:
        """Active neighbors of ``u`` in the undirected projection, sorted."""
        if not self.directed:
            return sorted(self.out_neighbors(u))
        return sorted(set(self.out_neighbors(u)) | set(self.in_neighbors(u)))

    def weight(self, u: int, v: int) -> float:
        return self._out[u][v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._out[u] and bool(self.active[u] and self.active[v])

    def edges(self) -> Iterator[Edge]:
        """Active edges in ascending ``(u, v)`` order; undirected edges once with ``u < v``."""
        active = self.active
        for u in range(self.n):
            if not active[u]:
                continue
            for v in sorted(self._out[u]):
                if not active[v]:
                    continue
                if not self.directed and v < u:
                    continue
                yield u, v, self._out[u][v]

    @property
    def edge_count(self) -> int:
        return sum(1 for _ in self.edges())

    @property
    def is_weighted(self) -> bool:
        return any(w != 1.0 for _, _, w in self.edges())

    # Attack support

    def remove_node(self, v: int) -> None:
        """Mark ``v`` inactive; incident edges disappear from every traversal."""
        if not 0 <= v < self.n:
            raise GraphStateError(f"node {v} does not exist")
        if not self.active[v]:
            raise GraphStateError(f"node {v} is already removed")
        self.active[v] = False

    def copy(self) -> "Graph":
        """Share the immutable adjacency, own a private liveness mask."""
        return Graph(self.n, self.directed, self._out, self._in, self.active.copy())

    def fully_active(self) -> bool:
        return bool(self.active.all())

    # Derived graphs

    def induced_subgraph(self) -> Tuple["Graph", List[int]]:
        """Fresh graph over the active nodes, relabeled densely.

        Returns:
            The subgraph and the list mapping new ids to original ids.
        """
        keep = self.active_nodes()
        index = {v: i for i, v in enumerate(keep)}
        edges = [(index[u], index[v], w) for u, v, w in self.edges()]
        return Graph.from_edges(len(keep), edges, self.directed), keep

    def relabeled(self, perm: Sequence[int]) -> "Graph":
        """Graph with node ``v`` renamed to ``perm[v]`` (mask carried along)."""
        edges = [(perm[u], perm[v], w) for u, v, w in self._all_edges()]
        g = Graph.from_edges(self.n, edges, self.directed)
        for v in range(self.n):
            g.active[perm[v]] = self.active[v]
        return g

    def scaled_weights(self, factor: float) -> "Graph":
        edges = [(u, v, w * factor) for u, v, w in self._all_edges()]
        g = Graph.from_edges(self.n, edges, self.directed)
        g.active = self.active.copy()
        return g

    def with_weights(self, weights: Sequence[float]) -> "Graph":
        """Same topology with new weights, one per edge in ``edges()`` order of the full graph."""
        structure = list(self._all_edges())
        if len(weights) != len(structure):
            raise GraphStateError(f"expected {len(structure)} weights, got {len(weights)}")
        edges = [(u, v, w) for (u, v, _), w in zip(structure, weights)]
        g = Graph.from_edges(self.n, edges, self.directed)
        g.active = self.active.copy()
        return g

    def unweighted(self) -> "Graph":
        return self.with_weights([1.0] * len(list(self._all_edges())))

    def adjacency_matrix(self, weighted: bool = True) -> np.ndarray:
        """Dense matrix ``A[u, v] = w(u -> v)`` over active nodes in ascending id order."""
        keep = self.active_nodes()
        index = {v: i for i, v in enumerate(keep)}
        a = np.zeros((len(keep), len(keep)))
        for u, v, w in self.edges():
            value = w if weighted else 1.0
            a[index[u], index[v]] = value
            if not self.directed:
                a[index[v], index[u]] = value
        return a

    def _all_edges(self) -> Iterator[Edge]:
        for u in range(self.n):
            for v in sorted(self._out[u]):
                if not self.directed and v < u:
                    continue
                yield u, v, self._out[u][v]

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, {kind}, active={self.n_active}, edges={self.edge_count})"


def degrees(g: Graph) -> DegreeVector:
    """In/out degree of every node, counting only edges between active nodes.

    Inactive nodes report zero. Weights are never counted.
    """
    in_deg = np.zeros(g.n, dtype=np.int64)
    out_deg = np.zeros(g.n, dtype=np.int64)
    for u, v, _ in g.edges():
        out_deg[u] += 1
        in_deg[v] += 1
        if not g.directed:
            out_deg[v] += 1
            in_deg[u] += 1
    return DegreeVector(in_deg=in_deg, out_deg=out_deg)
