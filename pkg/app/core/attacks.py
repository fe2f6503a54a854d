"""Attack planning: which nodes go, in which order.

Targeted attacks pick the active node with the highest score and break
ties towards the smallest node id. With ``recompute`` the scores are
refreshed after every removal (adaptive attack); without it the initial
ranking is used for the whole trace.
"""
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from app.core.betweenness import betweenness
from app.core.exceptions import GraphStateError
from app.core.graph import Graph, degrees
from app.schemas.attack import AttackKind, AttackStrategy

TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AttackTrace:
    """Removal order of an attack (a permutation prefix of the node ids)."""
    order: List[int]
    strategy: AttackStrategy

    def __len__(self) -> int:
        return len(self.order)


def attack_scores(g: Graph, kind: AttackKind) -> np.ndarray:
    """Current targeting score of every node (``-inf`` for inactive nodes)."""
    if kind == AttackKind.TDA:
        deg = degrees(g)
        scores = deg.in_deg + deg.out_deg if g.directed else deg.out_deg
        scores = scores.astype(float)
    elif kind == AttackKind.TBA:
        scores = betweenness(g)
    else:
        raise ValueError(f"{kind} has no targeting score")
    scores = scores.copy()
    scores[~g.active] = -np.inf
    return scores


def rank_targets(scores: np.ndarray, count: int) -> List[int]:
    """The ``count`` best-scoring nodes, ties to the smallest id."""
    chosen: List[int] = []
    scores = scores.copy()
    for _ in range(count):
        best = scores.max()
        if best == -np.inf:
            break
        v = int(np.flatnonzero(scores >= best - TIE_TOLERANCE)[0])
        chosen.append(v)
        scores[v] = -np.inf
    return chosen


def select_targets(g: Graph, strat: AttackStrategy, count: int, ranking: Sequence[int] = ()) -> List[int]:
    """Next ``count`` targets of a targeted attack on the current remnant.

    Args:
        g: Graph under attack (mask reflects removals so far).
        strat: TDA or TBA strategy.
        count: Number of nodes to pick.
        ranking: Initial full ranking, used when ``strat.recompute`` is off.
    """
    if strat.recompute:
        return rank_targets(attack_scores(g, strat.kind), count)
    remaining = [v for v in ranking if g.active[v]]
    return remaining[:count]


def plan_attack(g: Graph, strat: AttackStrategy) -> AttackTrace:
    """Removal order of length ``N - 1`` for a fully active graph.

    Raises:
        GraphStateError: If ``g`` already has removed nodes.
    """
    if not g.fully_active():
        raise GraphStateError("attacks are planned on a fully active graph")
    steps = max(g.n - 1, 0)

    if strat.kind == AttackKind.RA:
        rng = np.random.default_rng(strat.seed)
        order = [int(v) for v in rng.permutation(g.n)[:steps]]
        return AttackTrace(order=order, strategy=strat)

    work = g.copy()
    ranking = [] if strat.recompute else rank_targets(attack_scores(work, strat.kind), g.n)
    order: List[int] = []
    for _ in range(steps):
        v = select_targets(work, strat, 1, ranking)[0]
        work.remove_node(v)
        order.append(v)
    return AttackTrace(order=order, strategy=strat)


def write_trace_csv(trace: AttackTrace, path: Union[str, Path]) -> None:
    """Two-column CSV ``step,node`` with ``step`` starting at 1."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "node"])
        for step, node in enumerate(trace.order, start=1):
            writer.writerow([step, node])
