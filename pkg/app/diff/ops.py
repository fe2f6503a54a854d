"""Differentiable operators over ``Tensor``.

Each operator computes its result with numpy and, when recording, registers
a backward rule mapping the output gradient to one gradient per input
(``None`` for inputs that are not differentiable, such as index arrays).

Segment operators take an integer array ``segments`` assigning each row to
a segment in ``0..num_segments-1``; in a GT layer a segment is one target
node's neighbor list.
"""
from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np

from app.core.exceptions import ShapeError
from app.diff.tensor import Tensor, make_output

ArrayLike = Union[Tensor, np.ndarray, float]


def as_tensor(x: ArrayLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, f"cannot broadcast {a.shape} with {b.shape}")


def _check_index(op: str, index: np.ndarray, bound: int) -> np.ndarray:
    index = np.asarray(index)
    if index.size and (not np.issubdtype(index.dtype, np.integer) or index.min() < 0 or index.max() >= bound):
        raise ShapeError(op, f"indices must be integers in [0, {bound})")
    return index.astype(np.int64, copy=False)


# Linear algebra and arithmetic

def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", f"cannot multiply {a.shape} by {b.shape}")
    av, bv = a.data, b.data
    return make_output("matmul", av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)
    sa, sb = a.shape, b.shape
    return make_output("add", a.data + b.data, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)
    sa, sb = a.shape, b.shape
    return make_output("sub", a.data - b.data, (a, b), lambda g: (_unbroadcast(g, sa), -_unbroadcast(g, sb)))


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """Elementwise product with numpy broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)
    av, bv = a.data, b.data
    return make_output(
        "mul", av * bv, (a, b),
        lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)),
    )


def scale(a: ArrayLike, c: float) -> Tensor:
    a = as_tensor(a)
    return make_output("scale", a.data * c, (a,), lambda g: (g * c,))


def add_scalar(a: ArrayLike, c: float) -> Tensor:
    a = as_tensor(a)
    return make_output("add_scalar", a.data + c, (a,), lambda g: (g,))


def rsub_scalar(c: float, a: ArrayLike) -> Tensor:
    """``c - a``."""
    a = as_tensor(a)
    return make_output("rsub_scalar", c - a.data, (a,), lambda g: (-g,))


def square(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    av = a.data
    return make_output("square", av * av, (a,), lambda g: (2.0 * av * g,))


def log(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    av = a.data
    return make_output("log", np.log(av), (a,), lambda g: (g / av,))


def transpose(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError("transpose", f"expected a matrix, got {a.shape}")
    return make_output("transpose", a.data.T.copy(), (a,), lambda g: (g.T,))


# Reductions and reshaping

def sum(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    shape = a.shape
    return make_output("sum", np.array(a.data.sum()), (a,), lambda g: (np.broadcast_to(g, shape).copy(),))


def mean(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    shape, count = a.shape, max(a.size, 1)
    return make_output("mean", np.array(a.data.mean()), (a,), lambda g: (np.broadcast_to(g / count, shape).copy(),))


def rowsum(a: ArrayLike) -> Tensor:
    """Sum over the last axis of a matrix: ``(n, k) -> (n,)``."""
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError("rowsum", f"expected a matrix, got {a.shape}")
    k = a.shape[1]
    return make_output("rowsum", a.data.sum(axis=1), (a,), lambda g: (np.repeat(g[:, None], k, axis=1),))


def reshape(a: ArrayLike, shape: Tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    original = a.shape
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", f"cannot reshape {original} into {shape}")
    return make_output("reshape", out, (a,), lambda g: (g.reshape(original),))


def flatten(a: ArrayLike) -> Tensor:
    return reshape(a, (-1,))


def concat(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat", "nothing to concatenate")
    ndim = tensors[0].data.ndim
    for t in tensors:
        if t.data.ndim != ndim or any(
            t.shape[d] != tensors[0].shape[d] for d in range(ndim) if d != axis % ndim
        ):
            raise ShapeError("concat", f"incompatible shapes {[t.shape for t in tensors]} along axis {axis}")
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]
    return make_output(
        "concat",
        np.concatenate([t.data for t in tensors], axis=axis),
        tuple(tensors),
        lambda g: tuple(np.split(g, bounds, axis=axis)),
    )


# Nonlinearities

def relu(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return make_output("relu", np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def leaky_relu(a: ArrayLike, slope: float = 0.2) -> Tensor:
    a = as_tensor(a)
    factor = np.where(a.data > 0, 1.0, slope)
    return make_output("leaky_relu", a.data * factor, (a,), lambda g: (g * factor,))


def sigmoid(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    out = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return make_output("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def softmax(a: ArrayLike) -> Tensor:
    """Softmax over the last axis."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)

    def rule(g):
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return make_output("softmax", out, (a,), rule)


def clamp(a: ArrayLike, lo, hi) -> Tensor:
    """Elementwise clip to ``[lo, hi]``; gradient passes only where the value was inside."""
    a = as_tensor(a)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), a.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), a.shape)
    if np.any(lo > hi):
        raise ShapeError("clamp", "lower bound exceeds upper bound")
    inside = (a.data >= lo) & (a.data <= hi)
    return make_output("clamp", np.clip(a.data, lo, hi), (a,), lambda g: (g * inside,))


@lru_cache(maxsize=32)
def _averaging_matrix(length: int, window: int) -> np.ndarray:
    half = window // 2
    p = np.zeros((length, length))
    for i in range(length):
        lo, hi = max(0, i - half), min(length, i + half + 1)
        p[i, lo:hi] = 1.0 / (hi - lo)
    p.setflags(write=False)
    return p


def moving_average(a: ArrayLike, window: int = 3) -> Tensor:
    """Centered moving average of a vector; the window shrinks at both ends."""
    a = as_tensor(a)
    if a.data.ndim != 1:
        raise ShapeError("moving_average", f"expected a vector, got {a.shape}")
    if window < 1 or window % 2 == 0:
        raise ShapeError("moving_average", f"window must be a positive odd number, got {window}")
    p = _averaging_matrix(a.shape[0], window)
    return make_output("moving_average", p @ a.data, (a,), lambda g: (p.T @ g,))


# Indexing and segments

def gather_rows(a: ArrayLike, index) -> Tensor:
    """Rows ``a[index]``; repeated indices accumulate gradient."""
    a = as_tensor(a)
    index = _check_index("gather_rows", index, a.shape[0])
    shape = a.shape

    def rule(g):
        out = np.zeros(shape)
        np.add.at(out, index, g)
        return (out,)

    return make_output("gather_rows", a.data[index], (a,), rule)


def embedding_lookup(table: ArrayLike, indices) -> Tensor:
    table = as_tensor(table)
    if table.data.ndim != 2:
        raise ShapeError("embedding_lookup", f"table must be a matrix, got {table.shape}")
    return gather_rows(table, _check_index("embedding_lookup", indices, table.shape[0]))


def slice_rows(a: ArrayLike, start: int, stop: int) -> Tensor:
    a = as_tensor(a)
    shape = a.shape

    def rule(g):
        out = np.zeros(shape)
        out[start:stop] = g
        return (out,)

    return make_output("slice_rows", a.data[start:stop].copy(), (a,), rule)


def pick(a: ArrayLike, index: int) -> Tensor:
    """Single element of a vector as a scalar tensor."""
    a = as_tensor(a)
    if a.data.ndim != 1 or not 0 <= index < a.shape[0]:
        raise ShapeError("pick", f"index {index} invalid for shape {a.shape}")
    shape = a.shape

    def rule(g):
        out = np.zeros(shape)
        out[index] = g
        return (out,)

    return make_output("pick", np.array(a.data[index]), (a,), rule)


def _check_segments(op: str, a: Tensor, segments, num_segments: int) -> np.ndarray:
    segments = _check_index(op, segments, num_segments)
    if segments.shape != (a.shape[0],):
        raise ShapeError(op, f"need one segment id per row: {segments.shape} ids for {a.shape[0]} rows")
    return segments


def segment_sum(a: ArrayLike, segments, num_segments: int) -> Tensor:
    a = as_tensor(a)
    segments = _check_segments("segment_sum", a, segments, num_segments)
    out = np.zeros((num_segments,) + a.shape[1:])
    np.add.at(out, segments, a.data)
    return make_output("segment_sum", out, (a,), lambda g: (g[segments],))


def segment_softmax(scores: ArrayLike, segments, num_segments: int) -> Tensor:
    """Softmax of a score vector computed independently inside each segment."""
    s = as_tensor(scores)
    if s.data.ndim != 1:
        raise ShapeError("segment_softmax", f"scores must be a vector, got {s.shape}")
    segments = _check_segments("segment_softmax", s, segments, num_segments)
    peak = np.full(num_segments, -np.inf)
    np.maximum.at(peak, segments, s.data)
    e = np.exp(s.data - peak[segments])
    total = np.zeros(num_segments)
    np.add.at(total, segments, e)
    out = e / total[segments]

    def rule(g):
        dot = np.zeros(num_segments)
        np.add.at(dot, segments, g * out)
        return (out * (g - dot[segments]),)

    return make_output("segment_softmax", out, (s,), rule)


def mean_pool(a: ArrayLike, segments=None, num_segments: int = 1) -> Tensor:
    """Mean of the rows in each segment; all rows form one segment by default."""
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError("mean_pool", f"expected a matrix, got {a.shape}")
    if segments is None:
        segments = np.zeros(a.shape[0], dtype=np.int64)
    segments = _check_segments("mean_pool", a, segments, num_segments)
    counts = np.bincount(segments, minlength=num_segments).astype(float)
    if np.any(counts == 0):
        raise ShapeError("mean_pool", "every segment needs at least one row")
    out = np.zeros((num_segments, a.shape[1]))
    np.add.at(out, segments, a.data)
    out /= counts[:, None]
    return make_output("mean_pool", out, (a,), lambda g: (g[segments] / counts[segments][:, None],))
