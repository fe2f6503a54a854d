"""Hopcroft-Karp maximum bipartite matching with warm starts.

Left and right vertices are both the node ids of one graph (out-copies and
in-copies). Vertices whose ``alive`` flag is off are invisible, which lets
the attack simulation keep the previous matching after each removal and
only search for the few augmenting paths the removal can open.
"""
from collections import deque
from typing import Deque, List, Optional, Sequence

INFINITY = -1


class HopcroftKarp:
    """Maximum matching on a bipartite graph given by left adjacency lists.

    The adjacency lists are never mutated; liveness comes from ``alive``,
    which the caller may update between ``run`` calls.
    """

    def __init__(self, adjacency: Sequence[Sequence[int]], alive: Sequence[bool], n_right: Optional[int] = None):
        self._adj = adjacency
        self.alive = alive
        n_left = len(adjacency)
        self.match_left: List[int] = [-1] * n_left
        self.match_right: List[int] = [-1] * (n_left if n_right is None else n_right)
        self._dist: List[int] = [INFINITY] * n_left
        self._cursor: List[int] = [0] * n_left

    def release(self, v: int) -> None:
        """Drop every matched edge touching vertex ``v`` on either side."""
        right = self.match_left[v]
        if right != -1:
            self.match_right[right] = -1
            self.match_left[v] = -1
        if v < len(self.match_right):
            left = self.match_right[v]
            if left != -1:
                self.match_left[left] = -1
                self.match_right[v] = -1

    @property
    def size(self) -> int:
        alive = self.alive
        return sum(1 for u, v in enumerate(self.match_left) if v != -1 and alive[u])

    def run(self) -> int:
        """Augment the current matching to a maximum one and return its size."""
        while self._bfs():
            self._cursor = [0] * len(self._adj)
            for u in range(len(self._adj)):
                if self.alive[u] and self.match_left[u] == -1:
                    self._augment(u)
        return self.size

    def _bfs(self) -> bool:
        alive = self.alive
        dist = self._dist
        queue: Deque[int] = deque()
        for u in range(len(self._adj)):
            if alive[u] and self.match_left[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INFINITY
        # Layer of the shortest augmenting paths; nothing deeper is explored.
        limit: Optional[int] = None
        while queue:
            u = queue.popleft()
            if limit is not None and dist[u] > limit:
                break
            for v in self._adj[u]:
                if not alive[v]:
                    continue
                w = self.match_right[v]
                if w == -1:
                    if limit is None:
                        limit = dist[u]
                elif dist[w] == INFINITY:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if limit is None:
            return False
        for u in range(len(dist)):
            if dist[u] > limit:
                dist[u] = INFINITY
        return True

    def _augment(self, root: int) -> bool:
        # Iterative layered DFS; paths can be as long as the graph.
        alive = self.alive
        dist = self._dist
        stack = [root]
        chosen: List[int] = []
        while stack:
            u = stack[-1]
            adjacency = self._adj[u]
            advanced = False
            while self._cursor[u] < len(adjacency):
                v = adjacency[self._cursor[u]]
                self._cursor[u] += 1
                if not alive[v]:
                    continue
                w = self.match_right[v]
                if w == -1:
                    chosen.append(v)
                    for left, right in zip(stack, chosen):
                        self.match_left[left] = right
                        self.match_right[right] = left
                    return True
                if dist[w] == dist[u] + 1:
                    chosen.append(v)
                    stack.append(w)
                    advanced = True
                    break
            if not advanced:
                dist[u] = INFINITY
                stack.pop()
                if chosen:
                    chosen.pop()
        return False


def maximum_matching_size(adjacency: Sequence[Sequence[int]], alive: Sequence[bool]) -> int:
    return HopcroftKarp(adjacency, alive).run()
