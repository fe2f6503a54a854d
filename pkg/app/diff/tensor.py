"""Tensors and the reverse-accumulation tape.

Operators record themselves on the active tape (see ``Tape`` as a context
manager) when at least one input requires gradients. Outside a tape every
operator is a plain numpy computation, which is how inference runs.
"""
import contextvars
import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import TapeError

_ids = itertools.count()
_active_tape: contextvars.ContextVar[Optional["Tape"]] = contextvars.ContextVar("active_tape", default=None)

BackwardRule = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """Dense float64 array with an optional gradient."""

    __slots__ = ("data", "requires_grad", "grad", "name", "id")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.id = next(_ids)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"


@dataclass
class TapeOp:
    name: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule


class Tape:
    """Ordered record of operations; inputs always precede their consumers."""

    def __init__(self):
        self.ops: List[TapeOp] = []
        self._outputs: Dict[int, int] = {}
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc) -> None:
        _active_tape.reset(self._token)
        self._token = None

    def record(self, name: str, inputs: Tuple[Tensor, ...], output: Tensor, backward: BackwardRule) -> None:
        self._outputs[output.id] = len(self.ops)
        self.ops.append(TapeOp(name, inputs, output, backward))

    def produced(self, t: Tensor) -> bool:
        return t.id in self._outputs

    def clear(self) -> None:
        self.ops.clear()
        self._outputs.clear()

    def __len__(self) -> int:
        return len(self.ops)


def active_tape() -> Optional[Tape]:
    return _active_tape.get()


def make_output(name: str, data: np.ndarray, inputs: Tuple[Tensor, ...], backward: BackwardRule) -> Tensor:
    """Wrap an operator result, recording it when a tape is active and any input needs gradients."""
    tape = _active_tape.get()
    needs_grad = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=needs_grad)
    if needs_grad:
        tape.record(name, inputs, out, backward)
    return out


def backward(
    tape: Tape,
    loss: Tensor,
    params: Iterable[Tensor] = (),
    retain: bool = False,
) -> Dict[Tensor, np.ndarray]:
    """Reverse accumulation from a scalar loss.

    Every leaf tensor on the tape that requires gradients gets ``.grad``
    set, as does every tensor in ``params`` (zeros when unused).

    Returns:
        Mapping from each such tensor to its gradient.

    Raises:
        TapeError: If the loss is not a scalar or was not recorded on ``tape``.
    """
    if loss.size != 1:
        raise TapeError(f"loss must be a scalar, got shape {loss.shape}")
    if not tape.produced(loss):
        raise TapeError("loss was not recorded on this tape")

    grads: Dict[int, np.ndarray] = {loss.id: np.ones_like(loss.data)}
    leaves: Dict[int, Tensor] = {}
    stop = tape._outputs[loss.id]

    for op in reversed(tape.ops[:stop + 1]):
        g = grads.get(op.output.id)
        if g is None:
            continue
        input_grads = op.backward(g)
        for t, gi in zip(op.inputs, input_grads):
            if gi is None or not t.requires_grad:
                continue
            if t.id in grads:
                grads[t.id] = grads[t.id] + gi
            else:
                grads[t.id] = gi
            if not tape.produced(t):
                leaves[t.id] = t

    result: Dict[Tensor, np.ndarray] = {}
    for t in leaves.values():
        t.grad = grads[t.id]
        result[t] = t.grad
    for p in params:
        if p.id not in leaves:
            p.grad = np.zeros_like(p.data)
            result[p] = p.grad

    if not retain:
        tape.clear()
    return result
