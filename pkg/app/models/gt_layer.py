"""Graph transformer layers.

``GTLayer`` combines inner and outer attention heads. Inner head ``s`` of
outer head ``m`` scores every message ``j -> i`` as
``Q_i · (W_e K_j) / sqrt(dk)``, normalizes the scores over ``N(i) ∪ {i}``
and aggregates ``W_v V_j``. Each outer head concatenates its inner heads,
applies a leaky ReLU, projects back to width ``d`` and adds the residual;
the layer output is the sum over outer heads.

``ClassicalAttentionLayer`` is the plain multi-head contrast: residual plus
one projection of concatenated dot-product heads, without ``W_e``, ``W_v``
or the nonlinearity.
"""
import math
from typing import List

import numpy as np

from app.core.exceptions import ModelError
from app.diff import ops
from app.diff.module import Module
from app.diff.tensor import Tensor
from app.models.graphview import GraphView
from app.models.layers import glorot

AGGREGATORS = ("gt", "classical")


class InnerHead(Module):
    def __init__(self, rng: np.random.Generator, d: int, dk: int, edge_mixing: bool = True):
        self.dk = dk
        self.edge_mixing = edge_mixing
        self.param("linear_Q", glorot(rng, d, dk))
        self.param("linear_K", glorot(rng, d, dk))
        self.param("linear_V", glorot(rng, d, dk))
        if edge_mixing:
            self.param("W_e", glorot(rng, dk, dk))
            self.param("W_v", glorot(rng, dk, dk))

    def attention(self, h: Tensor, view: GraphView) -> Tensor:
        """Attention coefficient of every message, normalized per target."""
        q = ops.matmul(h, self.linear_Q)
        k = ops.matmul(h, self.linear_K)
        if self.edge_mixing:
            k = ops.matmul(k, ops.transpose(self.W_e))
        logits = ops.rowsum(ops.mul(ops.gather_rows(q, view.tgt), ops.gather_rows(k, view.src)))
        logits = ops.scale(logits, 1.0 / math.sqrt(self.dk))
        return ops.segment_softmax(logits, view.tgt, view.n)

    def values(self, h: Tensor) -> Tensor:
        v = ops.matmul(h, self.linear_V)
        if self.edge_mixing:
            v = ops.matmul(v, ops.transpose(self.W_v))
        return v

    def __call__(self, h: Tensor, view: GraphView) -> Tensor:
        alpha = self.attention(h, view)
        messages = ops.mul(ops.gather_rows(self.values(h), view.src), ops.reshape(alpha, (view.n_messages, 1)))
        return ops.segment_sum(messages, view.tgt, view.n)


class OuterHead(Module):
    def __init__(self, rng: np.random.Generator, d: int, inner_heads: int, slope: float):
        dk = d // inner_heads
        self.slope = slope
        self.inner = [InnerHead(rng, d, dk) for _ in range(inner_heads)]
        self.param("W_o", glorot(rng, inner_heads * dk, d, shape=(d, inner_heads * dk)))

    def __call__(self, h: Tensor, view: GraphView) -> Tensor:
        joined = ops.concat([head(h, view) for head in self.inner], axis=1)
        activated = ops.leaky_relu(joined, self.slope)
        return ops.add(h, ops.matmul(activated, ops.transpose(self.W_o)))


class GTLayer(Module):
    def __init__(
        self,
        rng: np.random.Generator,
        d: int,
        inner_heads: int = 2,
        outer_heads: int = 3,
        slope: float = 0.2,
    ):
        _check_width(d, inner_heads)
        self.d = d
        self.outer = [OuterHead(rng, d, inner_heads, slope) for _ in range(outer_heads)]

    def __call__(self, h: Tensor, view: GraphView) -> Tensor:
        out = self.outer[0](h, view)
        for head in self.outer[1:]:
            out = ops.add(out, head(h, view))
        return out


class ClassicalAttentionLayer(Module):
    def __init__(self, rng: np.random.Generator, d: int, inner_heads: int = 2, **_):
        _check_width(d, inner_heads)
        dk = d // inner_heads
        self.d = d
        self.heads = [InnerHead(rng, d, dk, edge_mixing=False) for _ in range(inner_heads)]
        self.param("W_o", glorot(rng, inner_heads * dk, d, shape=(d, inner_heads * dk)))

    def __call__(self, h: Tensor, view: GraphView) -> Tensor:
        joined = ops.concat([head(h, view) for head in self.heads], axis=1)
        return ops.add(h, ops.matmul(joined, ops.transpose(self.W_o)))


def _check_width(d: int, inner_heads: int) -> None:
    if inner_heads < 1 or d // inner_heads < 1:
        raise ModelError(f"width {d} cannot be split into {inner_heads} inner heads")


def make_layer(
    aggregator: str,
    rng: np.random.Generator,
    d: int,
    inner_heads: int,
    outer_heads: int,
    slope: float,
) -> Module:
    if aggregator == "gt":
        return GTLayer(rng, d, inner_heads, outer_heads, slope)
    if aggregator == "classical":
        return ClassicalAttentionLayer(rng, d, inner_heads)
    raise ModelError(f"unknown aggregator {aggregator!r}; expected one of {AGGREGATORS}")


def attention_rows(layer: Module, h: Tensor, view: GraphView) -> List[np.ndarray]:
    """Attention coefficients of every inner head of ``layer`` (for inspection)."""
    heads = layer.heads if isinstance(layer, ClassicalAttentionLayer) else [
        inner for outer in layer.outer for inner in outer.inner
    ]
    return [head.attention(h, view).data for head in heads]
