"""Finite-difference verification of reverse-mode gradients."""
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from app.diff.tensor import Tape, Tensor, backward

# Gradients smaller than this are compared in absolute rather than relative terms.
DENOMINATOR_FLOOR = 1e-4


@dataclass
class GradCheckReport:
    tol: float
    errors: Dict[str, float] = field(default_factory=dict)

    @property
    def worst(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst < self.tol

    def failures(self) -> Dict[str, float]:
        return {name: err for name, err in self.errors.items() if err >= self.tol}


def grad_check(
    closure: Callable[[], Tensor],
    params: Sequence[Tuple[str, Tensor]],
    tol: float = 1e-4,
    h: float = 1e-5,
    max_checks: Optional[int] = None,
    seed: int = 0,
) -> GradCheckReport:
    """Compare tape gradients of ``closure()`` with central differences.

    Args:
        closure: Deterministic function building a scalar loss from ``params``.
        params: Named tensors to check.
        tol: Pass threshold for the max relative error of every parameter.
        h: Finite-difference step.
        max_checks: When set, check at most this many entries per tensor,
            sampled with ``seed``.

    Returns:
        Report with the max relative error per parameter name.
    """
    with Tape() as tape:
        loss = closure()
    analytic = backward(tape, loss, params=[p for _, p in params])

    rng = np.random.default_rng(seed)
    report = GradCheckReport(tol=tol)
    for name, p in params:
        grad = analytic[p]
        flat_indices = np.arange(p.size)
        if max_checks is not None and p.size > max_checks:
            flat_indices = np.sort(rng.choice(p.size, size=max_checks, replace=False))
        worst = 0.0
        for flat in flat_indices:
            idx = np.unravel_index(int(flat), p.shape)
            original = p.data[idx]
            p.data[idx] = original + h
            plus = closure().item()
            p.data[idx] = original - h
            minus = closure().item()
            p.data[idx] = original
            numeric = (plus - minus) / (2.0 * h)
            exact = float(grad[idx])
            denom = max(abs(exact), abs(numeric), DENOMINATOR_FLOOR)
            worst = max(worst, abs(exact - numeric) / denom)
        report.errors[name] = worst
    return report
