"""Downstream heads: robustness curve, overall robustness and network class."""
from typing import Tuple

import numpy as np

from app.core.exceptions import ModelError
from app.diff import ops
from app.diff.module import Module
from app.diff.tensor import Tensor
from app.models.graphview import GraphView
from app.models.gt_layer import make_layer
from app.models.layers import Linear
from app.schemas.attack import CurveKind

CURVE_WIDTH = 2
SMOOTHING_WINDOW = 3


def feasible_floor(n: int) -> np.ndarray:
    """Lower bound ``1/(N - i)`` for ``i = 1..N-1``."""
    return 1.0 / (n - np.arange(1, n, dtype=float))


def _mix(alpha: Tensor, h_l: Tensor, h_0: Tensor) -> Tensor:
    return ops.add(ops.mul(alpha, h_l), ops.mul(ops.rsub_scalar(1.0, alpha), h_0))


class CurveHead(Module):
    """Robustness-curve predictor for graphs of exactly ``n`` nodes.

    The main prediction passes through a feasibility filter: controllability
    adds a trainable bias and clamps to ``[1/(N-i), 1]``; connectivity
    clamps, smooths with a centered window of three and clamps again.
    """

    def __init__(
        self,
        rng: np.random.Generator,
        n: int,
        kind: CurveKind,
        d: int,
        aggregator: str = "gt",
        inner_heads: int = 2,
        outer_heads: int = 3,
        slope: float = 0.2,
    ):
        if n < 2:
            raise ModelError(f"curve head needs at least 2 nodes, got {n}")
        self.n = n
        self.kind = CurveKind(kind)
        self.proj_in = Linear(rng, d, CURVE_WIDTH)
        self.gt = make_layer(aggregator, rng, CURVE_WIDTH, inner_heads, outer_heads, slope)
        self.proj_out = Linear(rng, CURVE_WIDTH, 1)
        # Predictions start inside the feasible band so the clamp passes gradients.
        self.mlp_main = Linear(rng, 3 * n, n - 1, bias_init=0.5)
        self.mlp_branch = Linear(rng, n, n - 1, bias_init=0.5)
        if self.kind == CurveKind.CONTROLLABILITY:
            self.param("physical_bias", np.zeros(n - 1))
        self._floor = feasible_floor(n)

    def __call__(self, h_l: Tensor, view: GraphView) -> Tuple[Tensor, Tensor]:
        """Returns ``(main, branch)``, both of length ``N - 1``."""
        if view.n_real != self.n:
            raise ModelError(f"curve head is sized for {self.n} nodes, graph has {view.n_real}")
        x1 = self.proj_in(h_l)
        x2 = self.gt(x1, view)
        x3 = ops.flatten(self.proj_out(x2))
        h_g = ops.concat([ops.flatten(x2), x3], axis=0)
        raw = ops.flatten(self.mlp_main(ops.reshape(h_g, (1, 3 * self.n))))
        branch = ops.flatten(self.mlp_branch(ops.reshape(x3, (1, self.n))))
        return self.filter(raw), branch

    def filter(self, raw: Tensor) -> Tensor:
        if self.kind == CurveKind.CONTROLLABILITY:
            return ops.clamp(ops.add(raw, self.physical_bias), self._floor, 1.0)
        smoothed = ops.moving_average(ops.clamp(raw, self._floor, 1.0), SMOOTHING_WINDOW)
        return ops.clamp(smoothed, self._floor, 1.0)


class RcHead(Module):
    """Overall robustness in (0, 1) from a blend of backbone and raw encodings."""

    def __init__(
        self,
        rng: np.random.Generator,
        d: int,
        aggregator: str = "gt",
        inner_heads: int = 2,
        outer_heads: int = 3,
        slope: float = 0.2,
    ):
        self.param("alpha1", np.array([0.5]))
        self.gt = make_layer(aggregator, rng, d, inner_heads, outer_heads, slope)
        self.readout = Linear(rng, 2 * d, 1)

    def __call__(self, h_0: Tensor, h_l: Tensor, view: GraphView) -> Tensor:
        mixed = _mix(self.alpha1, h_l, h_0)
        h_1 = self.gt(mixed, view)
        pooled = ops.mean_pool(ops.concat([mixed, h_1], axis=1))
        return ops.reshape(ops.sigmoid(self.readout(pooled)), ())


class ClassHead(Module):
    """Topology class probabilities via a virtual initial-token node."""

    def __init__(
        self,
        rng: np.random.Generator,
        d: int,
        classes: int = 5,
        aggregator: str = "gt",
        inner_heads: int = 2,
        outer_heads: int = 3,
        slope: float = 0.2,
    ):
        self.classes = classes
        self.param("alpha2", np.array([0.5]))
        self.param("x_it", rng.normal(0.0, 0.1, size=(1, d)))
        self.gt = make_layer(aggregator, rng, d, inner_heads, outer_heads, slope)
        self.readout = Linear(rng, d, classes)

    def __call__(self, h_0: Tensor, h_l: Tensor, view: GraphView) -> Tensor:
        mixed = _mix(self.alpha2, h_l, h_0)
        augmented = ops.concat([mixed, self.x_it], axis=0)
        h_1 = self.gt(augmented, view.with_virtual_node())
        pooled = ops.mean_pool(ops.slice_rows(h_1, 0, view.n_real))
        return ops.flatten(ops.softmax(self.readout(pooled)))
