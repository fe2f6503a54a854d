import numpy as np

from app.core.exceptions import ModelError
from app.diff import ops
from app.diff.module import Module
from app.diff.tensor import Tensor
from app.models.graphview import GraphView


class DegreeCentralityEncoder(Module):
    """Initial node features from learnable in-degree and out-degree embeddings.

    Row ``i`` is ``table_in[in_deg(i)] ⊕ table_out[out_deg(i)]`` with degrees
    clamped to ``max_degree``. A shared encoder (trained on undirected
    graphs) looks both degrees up in ``table_in``.
    """

    def __init__(self, rng: np.random.Generator, d: int = 10, max_degree: int = 30, shared: bool = False):
        if d < 2 or d % 2:
            raise ModelError(f"encoder width must be a positive even number, got {d}")
        self.d = d
        self.max_degree = max_degree
        self.shared = shared
        self.param("table_in", rng.normal(0.0, 0.1, size=(max_degree + 1, d // 2)))
        if not shared:
            self.param("table_out", rng.normal(0.0, 0.1, size=(max_degree + 1, d // 2)))

    def __call__(self, view: GraphView) -> Tensor:
        in_idx = np.minimum(view.in_deg[:view.n_real], self.max_degree)
        out_idx = np.minimum(view.out_deg[:view.n_real], self.max_degree)
        table_out = self.table_in if self.shared else self.table_out
        return ops.concat(
            [ops.embedding_lookup(self.table_in, in_idx), ops.embedding_lookup(table_out, out_idx)],
            axis=1,
        )
