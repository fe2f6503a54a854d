"""Compact message-passing view of a graph's active subgraph."""
from dataclasses import dataclass

import numpy as np

from app.core.graph import Graph, degrees


@dataclass(frozen=True)
class GraphView:
    """Node count, degrees and the attention edge lists of one graph.

    ``src[e] -> tgt[e]`` lists every message a node receives, self-loops
    included, sorted by target; segment ``i`` of the attention softmax is
    therefore ``N(i) ∪ {i}``. For directed graphs ``N(i)`` holds the
    in-neighbors, for undirected graphs all neighbors.
    """
    n: int
    directed: bool
    in_deg: np.ndarray
    out_deg: np.ndarray
    src: np.ndarray
    tgt: np.ndarray
    n_real: int

    @classmethod
    def from_graph(cls, g: Graph) -> "GraphView":
        sub, _ = g.induced_subgraph()
        deg = degrees(sub)
        n = sub.n
        pairs = [(i, i) for i in range(n)]
        for u, v, _ in sub.edges():
            pairs.append((u, v))
            if not sub.directed:
                pairs.append((v, u))
        return cls._build(n, sub.directed, deg.in_deg, deg.out_deg, pairs, n)

    @classmethod
    def _build(cls, n, directed, in_deg, out_deg, pairs, n_real) -> "GraphView":
        pairs.sort(key=lambda p: (p[1], p[0]))
        arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        return cls(
            n=n,
            directed=directed,
            in_deg=np.asarray(in_deg, dtype=np.int64),
            out_deg=np.asarray(out_deg, dtype=np.int64),
            src=arr[:, 0].copy(),
            tgt=arr[:, 1].copy(),
            n_real=n_real,
        )

    @property
    def n_messages(self) -> int:
        return len(self.src)

    def with_virtual_node(self) -> "GraphView":
        """Append one node (index ``n``) linked both ways to every real node."""
        v = self.n
        pairs = list(zip(self.src.tolist(), self.tgt.tolist()))
        pairs.append((v, v))
        for i in range(self.n):
            pairs.append((v, i))
            pairs.append((i, v))
        in_deg = np.append(self.in_deg, self.n)
        out_deg = np.append(self.out_deg, self.n)
        return GraphView._build(self.n + 1, self.directed, in_deg, out_deg, pairs, self.n_real)
