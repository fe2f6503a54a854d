"""Synthetic topology generators.

Every generator hits the edge count ``M`` of the spec exactly
(``round(k_avg * n)`` directed, ``round(k_avg * n / 2)`` undirected), never
emits self-loops or duplicates, and is a pure function of the spec seed.
"""
import math
from typing import Callable, Dict, List, Set, Tuple

import numpy as np

from app.core.exceptions import InfeasibleSpecError
from app.core.graph import Graph
from app.logging_config import get_logger
from app.schemas.generation import GenSpec, Topology

logger = get_logger(__name__)

Pair = Tuple[int, int]

BA_GAMMA = 3.0
SF_GAMMA = 2.001


def _pair_capacity(n: int, directed: bool) -> int:
    return n * (n - 1) if directed else n * (n - 1) // 2


def _decode_pairs(index: np.ndarray, n: int, directed: bool) -> List[Pair]:
    """Map flat candidate indices back to ``(u, v)`` pairs (no self-loops)."""
    pairs: List[Pair] = []
    if directed:
        for k in index.tolist():
            u, r = divmod(k, n - 1)
            pairs.append((u, r if r < u else r + 1))
        return pairs
    # Undirected pairs u < v enumerated row by row.
    iu, ju = np.triu_indices(n, k=1)
    return [(int(iu[k]), int(ju[k])) for k in index.tolist()]


def _sample_pairs(rng: np.random.Generator, n: int, m: int, directed: bool, p=None) -> List[Pair]:
    capacity = _pair_capacity(n, directed)
    if m > capacity:
        raise InfeasibleSpecError(f"{m} edges exceed the simple-graph capacity {capacity} for n={n}")
    index = rng.choice(capacity, size=m, replace=False, p=p)
    return _decode_pairs(np.sort(index), n, directed)


def _erdos_renyi(spec: GenSpec, rng: np.random.Generator) -> List[Pair]:
    return _sample_pairs(rng, spec.n, spec.edge_target, spec.directed)


def _static_scale_free(spec: GenSpec, rng: np.random.Generator) -> List[Pair]:
    # Fitness w_i = i^(-1/(gamma-1)); pairs are drawn with probability
    # proportional to the fitness product, without replacement.
    n = spec.n
    alpha = 1.0 / (SF_GAMMA - 1.0)
    fitness = np.arange(1, n + 1, dtype=float) ** (-alpha)
    fitness = fitness[rng.permutation(n)]
    if spec.directed:
        outer = np.outer(fitness, fitness)
        mask = ~np.eye(n, dtype=bool)
        weights = outer[mask]
    else:
        iu, ju = np.triu_indices(n, k=1)
        weights = fitness[iu] * fitness[ju]
    p = weights / weights.sum()
    m = spec.edge_target
    if m > np.count_nonzero(p):
        raise InfeasibleSpecError(f"static scale-free model cannot place {m} edges on {n} nodes")
    return _sample_pairs(rng, n, m, spec.directed, p=p)


def _barabasi_albert(spec: GenSpec, rng: np.random.Generator) -> List[Pair]:
    # Growth with preferential attachment; the per-node edge count is the
    # ceiling of the remaining budget spread over the remaining nodes, capped
    # by the number of existing nodes, so the total lands exactly on M.
    n = spec.n
    m_total = spec.edge_target
    capacity = n * (n - 1) // 2
    if m_total > capacity:
        raise InfeasibleSpecError(
            f"BA growth yields at most {capacity} edges on {n} nodes, {m_total} requested"
        )
    degree = np.zeros(n, dtype=float)
    pairs: List[Pair] = []
    remaining = m_total
    for t in range(1, n):
        nodes_left = n - t
        m_t = min(t, math.ceil(remaining / nodes_left)) if remaining > 0 else 0
        if m_t == 0:
            continue
        if m_t == t:
            targets = np.arange(t)
        else:
            weights = degree[:t]
            positive = int(np.count_nonzero(weights))
            if positive >= m_t:
                targets = rng.choice(t, size=m_t, replace=False, p=weights / weights.sum())
            else:
                hubs = np.flatnonzero(weights)
                rest = np.flatnonzero(weights == 0)
                extra = rng.choice(rest, size=m_t - positive, replace=False)
                targets = np.concatenate([hubs, extra])
        for s in np.sort(targets).tolist():
            pairs.append((s, t))
            degree[s] += 1
        degree[t] += m_t
        remaining -= m_t

    if not spec.directed:
        return pairs
    # Orient each edge uniformly at random.
    flips = rng.random(len(pairs)) < 0.5
    return [(v, u) if flip else (u, v) for (u, v), flip in zip(pairs, flips.tolist())]


def _lattice_offsets(n: int, m: int, directed: bool) -> List[int]:
    if directed:
        candidates = []
        for k in range(1, n):
            candidates.extend([k, -k])
        candidates = [c for c in candidates if c % n != 0]
        offsets: List[int] = []
        seen: Set[int] = set()
        for c in candidates:
            if c % n in seen:
                continue
            if n * (len(offsets) + 1) > m:
                break
            offsets.append(c)
            seen.add(c % n)
        return offsets
    offsets = []
    placed = 0
    for k in range(1, n // 2 + 1):
        # The antipodal offset of an even ring only adds n/2 distinct edges.
        size = n // 2 if 2 * k == n else n
        if placed + size > m:
            break
        offsets.append(k)
        placed += size
    return offsets


def _newman_watts(spec: GenSpec, rng: np.random.Generator) -> List[Pair]:
    n = spec.n
    m = spec.edge_target
    if m > _pair_capacity(n, spec.directed):
        raise InfeasibleSpecError(f"{m} edges exceed the simple-graph capacity for n={n}")
    if m < n:
        raise InfeasibleSpecError(f"Newman-Watts needs at least a ring of {n} edges, {m} requested")

    edges: Set[Pair] = set()
    for offset in _lattice_offsets(n, m, spec.directed):
        for u in range(n):
            v = (u + offset) % n
            edges.add((u, v) if spec.directed else (min(u, v), max(u, v)))

    shortcuts_needed = m - len(edges)
    if shortcuts_needed > 0:
        if spec.directed:
            free = [(u, v) for u in range(n) for v in range(n) if u != v and (u, v) not in edges]
        else:
            free = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
        chosen = rng.choice(len(free), size=shortcuts_needed, replace=False)
        edges.update(free[k] for k in chosen.tolist())
    return sorted(edges)


def _q_snapback(spec: GenSpec, rng: np.random.Generator) -> List[Pair]:
    # Backbone chain i-1 -> i plus snapback edges i -> j (j < i).
    n = spec.n
    m = spec.edge_target
    chain = [(i - 1, i) for i in range(1, n)]
    if spec.directed:
        candidates = [(i, j) for i in range(1, n) for j in range(i)]
    else:
        candidates = [(j, i) for i in range(2, n) for j in range(i - 1)]
    needed = m - len(chain)
    if needed < 0:
        raise InfeasibleSpecError(f"q-snapback needs at least the {len(chain)}-edge backbone, {m} requested")
    if needed > len(candidates):
        raise InfeasibleSpecError(
            f"q-snapback on {n} nodes holds at most {len(chain) + len(candidates)} edges, {m} requested"
        )
    if needed == 0:
        return chain

    q = spec.q if spec.q is not None else needed / len(candidates)
    drawn = rng.random(len(candidates)) < q
    picked = np.flatnonzero(drawn)
    if len(picked) > needed:
        picked = rng.choice(picked, size=needed, replace=False)
    elif len(picked) < needed:
        rest = np.flatnonzero(~drawn)
        picked = np.concatenate([picked, rng.choice(rest, size=needed - len(picked), replace=False)])
    return chain + [candidates[k] for k in np.sort(picked).tolist()]


_GENERATORS: Dict[Topology, Callable[[GenSpec, np.random.Generator], List[Pair]]] = {
    Topology.ER: _erdos_renyi,
    Topology.BA: _barabasi_albert,
    Topology.SF: _static_scale_free,
    Topology.NW: _newman_watts,
    Topology.QSN: _q_snapback,
}


def generate(spec: GenSpec) -> Graph:
    """Generate one simple graph for ``spec``.

    Args:
        spec: Topology, size, target average degree and seed.

    Returns:
        A fully active graph with exactly ``spec.edge_target`` edges.

    Raises:
        InfeasibleSpecError: If the requested edge count cannot be realized.
    """
    rng = np.random.default_rng(spec.seed)
    pairs = _GENERATORS[spec.topology](spec, rng)

    if spec.weighted:
        lo, hi = spec.weight_range
        weights = rng.uniform(lo, hi, size=len(pairs)) if hi > lo else np.full(len(pairs), lo)
        edges = [(u, v, float(w)) for (u, v), w in zip(pairs, weights)]
    else:
        edges = [(u, v, 1.0) for u, v in pairs]

    graph = Graph.from_edges(spec.n, edges, spec.directed)
    logger.debug(
        "graph_generated",
        topology=spec.topology.value,
        n=spec.n,
        edges=len(edges),
        directed=spec.directed,
        seed=spec.seed,
    )
    return graph
