import numpy as np

from app.diff import ops
from app.diff.module import Module
from app.diff.tensor import Tensor


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape=None) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


class Linear(Module):
    """``x @ weight + bias`` on row-major batches."""

    def __init__(self, rng: np.random.Generator, in_features: int, out_features: int, bias_init: float = 0.0):
        self.in_features = in_features
        self.out_features = out_features
        self.param("weight", glorot(rng, in_features, out_features))
        self.param("bias", np.full(out_features, bias_init))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.weight), self.bias)
