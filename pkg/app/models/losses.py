"""Training losses and Grad-Norm task weighting."""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import CurveMismatchError
from app.diff import ops
from app.diff.tensor import Tensor
from app.logging_config import get_logger

logger = get_logger(__name__)

MIN_TASK_WEIGHT = 1e-3


def rmse_weights(length: int) -> np.ndarray:
    """Weights for a curve of ``length = N - 1`` points: 2 for ``i <= N // 2``, else 1."""
    n = length + 1
    i = np.arange(1, length + 1)
    return np.where(i <= n // 2, 2.0, 1.0)


def rmse_loss(pred: Tensor, truth: Sequence[float], weights: Optional[np.ndarray] = None) -> Tensor:
    """Reweighted mean squared error ``(1/(N-1)) * Σ W(i) (pv(i) - tv(i))²``."""
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise CurveMismatchError(f"prediction shape {pred.shape} differs from target shape {truth.shape}")
    if weights is None:
        weights = rmse_weights(len(truth))
    weighted = ops.mul(ops.square(ops.sub(pred, truth)), weights)
    return ops.scale(ops.sum(weighted), 1.0 / max(len(truth), 1))


def step1_loss(main: Tensor, branch: Tensor, truth: Sequence[float], rho: float = 0.5) -> Tensor:
    weights = rmse_weights(len(truth))
    return ops.add(rmse_loss(main, truth, weights), ops.scale(rmse_loss(branch, truth, weights), rho))


def class_loss(probs: Tensor, label: int) -> Tensor:
    return ops.scale(ops.log(ops.pick(probs, label)), -1.0)


def rc_loss(rc_hat: Tensor, rc: float) -> Tensor:
    return ops.square(ops.sub(rc_hat, np.array(rc, dtype=float)))


@dataclass
class LossConfig:
    """Step-1 branch weight plus Grad-Norm state for the step-2 task weights."""
    rho: float = 0.5
    w_c: float = 1.0
    w_r: float = 1.0
    alpha: float = 1.5
    lr_w: float = 0.025
    initial_losses: Optional[Tuple[float, float]] = None

    @property
    def weights(self) -> Tuple[float, float]:
        return self.w_c, self.w_r


def step2_loss(l_class: Tensor, l_rc: Tensor, cfg: LossConfig) -> Tensor:
    return ops.add(ops.scale(l_class, cfg.w_c), ops.scale(l_rc, cfg.w_r))


def gradnorm_update(
    norms: Tuple[float, float],
    losses: Tuple[float, float],
    cfg: LossConfig,
) -> Tuple[float, float]:
    """Move ``(w_c, w_R)`` so the weighted shared-gradient norms approach their balanced targets.

    ``norms`` are the unweighted gradient norms of each task loss with
    respect to the shared parameters; ``losses`` are the current task loss
    values. The first call records the initial losses. Each weighted norm
    ``G_i = w_i * g_i`` is pushed toward ``mean(G) * r_i ** alpha`` where
    ``r_i`` is the task's loss ratio to its initial value relative to the
    mean ratio; the weights then stay positive and sum to 2.

    Returns:
        The updated ``(w_c, w_R)``; ``cfg`` is updated in place.
    """
    g = np.asarray(norms, dtype=float)
    current = np.asarray(losses, dtype=float)
    if cfg.initial_losses is None:
        cfg.initial_losses = (float(current[0]), float(current[1]))
    initial = np.maximum(np.asarray(cfg.initial_losses, dtype=float), 1e-12)

    w = np.array([cfg.w_c, cfg.w_r])
    weighted = w * g
    ratio = current / initial
    mean_ratio = ratio.mean()
    relative = ratio / mean_ratio if mean_ratio > 0 else np.ones(2)
    target = weighted.mean() * relative ** cfg.alpha

    w = w - cfg.lr_w * np.sign(weighted - target) * g
    w = np.maximum(w, MIN_TASK_WEIGHT)
    w = 2.0 * w / w.sum()
    cfg.w_c, cfg.w_r = float(w[0]), float(w[1])
    logger.debug("gradnorm_updated", w_c=cfg.w_c, w_r=cfg.w_r, norm_c=float(g[0]), norm_r=float(g[1]))
    return cfg.w_c, cfg.w_r
