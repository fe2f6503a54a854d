"""Robustness curves, overall robustness, learning-error measures and batch attacks."""
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from app.core.attacks import AttackTrace, attack_scores, rank_targets
from app.core.connectivity import largest_component_size, lcc_sizes_along
from app.core.controllability import controllability_values, nd_exact, nd_structural
from app.core.exceptions import AttackError, CurveMismatchError
from app.core.graph import Graph
from app.schemas.attack import AttackKind, AttackStrategy, CurveKind, OracleMode


@dataclass(frozen=True)
class RobustnessCurve:
    """Robustness values recorded after each removal (or each batch)."""
    kind: CurveKind
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class OverallRobustness:
    r_c: float


@dataclass(frozen=True)
class ErrorReport:
    er: np.ndarray
    mean_er: float


def controllability_curve(
    g: Graph,
    trace: AttackTrace,
    mode: OracleMode = OracleMode.STRUCTURAL,
) -> RobustnessCurve:
    values = controllability_values(g, trace, mode)
    return RobustnessCurve(kind=CurveKind.CONTROLLABILITY, values=np.array(values, dtype=float))


def connectivity_curve(g: Graph, trace: AttackTrace) -> RobustnessCurve:
    """``s(i) = N_LCC(i) / (N - i)`` on the undirected projection."""
    n = g.n_active
    sizes = lcc_sizes_along(g, trace.order)
    values = [size / (n - i) for i, size in enumerate(sizes, start=1)]
    return RobustnessCurve(kind=CurveKind.CONNECTIVITY, values=np.array(values, dtype=float))


def robustness_curve(
    g: Graph,
    trace: AttackTrace,
    kind: CurveKind,
    mode: OracleMode = OracleMode.STRUCTURAL,
) -> RobustnessCurve:
    if kind == CurveKind.CONTROLLABILITY:
        return controllability_curve(g, trace, mode)
    return connectivity_curve(g, trace)


def overall_rc(curve: RobustnessCurve) -> OverallRobustness:
    if len(curve) == 0:
        raise CurveMismatchError("overall robustness needs at least one curve value")
    return OverallRobustness(r_c=float(np.mean(curve.values)))


def error_report(pred: RobustnessCurve, truth: RobustnessCurve) -> ErrorReport:
    """Absolute deviation per index and its mean.

    Raises:
        CurveMismatchError: On differing kinds or lengths.
    """
    if pred.kind != truth.kind:
        raise CurveMismatchError(f"cannot compare a {pred.kind.value} curve with a {truth.kind.value} curve")
    if len(pred) != len(truth):
        raise CurveMismatchError(f"curve lengths differ: {len(pred)} vs {len(truth)}")
    er = np.abs(np.asarray(pred.values, dtype=float) - np.asarray(truth.values, dtype=float))
    return ErrorReport(er=er, mean_er=float(np.mean(er)) if len(er) else 0.0)


def _measure(g: Graph, kind: CurveKind, mode: OracleMode) -> float:
    remaining = g.n_active
    if kind == CurveKind.CONNECTIVITY:
        return largest_component_size(g) / remaining
    count = nd_structural(g) if mode == OracleMode.STRUCTURAL else nd_exact(g)
    return count / remaining


def batch_curve(
    g: Graph,
    strat: AttackStrategy,
    fraction: float,
    kind: CurveKind,
    mode: OracleMode = OracleMode.STRUCTURAL,
) -> RobustnessCurve:
    """Robustness after each batch of ``ceil(fraction * N)`` removals.

    Batches continue while more than one batch of nodes remains, so the
    curve length depends only on ``fraction``. Targeted strategies rank the
    current remnant once per batch; random attacks take consecutive chunks
    of one seeded permutation, which makes ``fraction = 1/N`` reproduce the
    per-node curve.

    Raises:
        AttackError: If ``fraction`` is outside (0, 1).
    """
    if not 0 < fraction < 1:
        raise AttackError(f"batch fraction must lie in (0, 1), got {fraction}")
    work = g.copy()
    n = work.n_active
    batch = max(1, math.ceil(fraction * n - 1e-12))

    permutation: List[int] = []
    ranking: List[int] = []
    if strat.kind == AttackKind.RA:
        rng = np.random.default_rng(strat.seed)
        permutation = [work.active_nodes()[k] for k in rng.permutation(n).tolist()]
    elif not strat.recompute:
        ranking = rank_targets(attack_scores(work, strat.kind), n)

    values: List[float] = []
    cursor = 0
    while work.n_active > batch:
        if strat.kind == AttackKind.RA:
            targets = permutation[cursor:cursor + batch]
            cursor += batch
        elif strat.recompute:
            targets = rank_targets(attack_scores(work, strat.kind), batch)
        else:
            targets = [v for v in ranking if work.active[v]][:batch]
        for v in targets:
            work.remove_node(v)
        values.append(_measure(work, kind, mode))
    return RobustnessCurve(kind=kind, values=np.array(values, dtype=float))


def _ranks(scores: Sequence[float]) -> np.ndarray:
    # Descending score, ties keep index order (stable sort).
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    ranks = np.empty(len(scores), dtype=float)
    for position, i in enumerate(order):
        ranks[i] = position
    return ranks


def rank_list_error(pred_scores: Sequence[float], true_scores: Sequence[float]) -> float:
    """Mean absolute difference between the rank lists induced by two score lists."""
    if len(pred_scores) != len(true_scores):
        raise CurveMismatchError(f"score lists differ in length: {len(pred_scores)} vs {len(true_scores)}")
    if not len(pred_scores):
        return 0.0
    return float(np.mean(np.abs(_ranks(pred_scores) - _ranks(true_scores))))


def write_curve_csv(curve: Union[RobustnessCurve, Sequence[float]], path: Union[str, Path]) -> None:
    """Two-column CSV ``i,value`` with ``i`` starting at 1."""
    values = curve.values if isinstance(curve, RobustnessCurve) else curve
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["i", "value"])
        for i, value in enumerate(values, start=1):
            writer.writerow([i, repr(float(value))])
