"""Adam with decoupled weight decay."""
from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

import numpy as np

from app.diff.tensor import Tensor


@dataclass
class AdamState:
    lr: float = 1e-4
    weight_decay: float = 5e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: Iterable[Tuple[str, Tensor]], grads: Dict[str, np.ndarray], state: AdamState) -> None:
    """One in-place update of every named parameter that has a gradient.

    Weight decay multiplies the parameter by ``1 - lr * weight_decay``
    before the bias-corrected Adam step.
    """
    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    for name, p in params:
        g = grads.get(name)
        if g is None:
            continue
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        state.m[name], state.v[name] = m, v

        data = p.data * (1.0 - state.lr * state.weight_decay)
        m_hat = m / correction1
        v_hat = v / correction2
        p.data = data - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
