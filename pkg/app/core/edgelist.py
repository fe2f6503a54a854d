"""Edge-list text format.

First non-comment line is the node count ``N``; every following line is
``u v`` or ``u v w`` with 0-based ids and a positive decimal weight. ``#``
starts a comment. Undirected files list each edge once; directedness comes
from the caller.
"""
from pathlib import Path
from typing import List, Optional, Tuple, Union

from app.core.exceptions import EdgeListParseError, GraphStateError
from app.core.graph import Graph

PathLike = Union[str, Path]


def parse_edge_list(text: str, directed: bool) -> Graph:
    """Parse edge-list text into a graph.

    Raises:
        EdgeListParseError: With the 1-based line number of the first bad line.
    """
    n: Optional[int] = None
    edges: List[Tuple[int, int, float]] = []
    seen = set()

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()

        if n is None:
            if len(fields) != 1:
                raise EdgeListParseError("expected the node count on the first line", line_number)
            try:
                n = int(fields[0])
            except ValueError:
                raise EdgeListParseError(f"invalid node count {fields[0]!r}", line_number)
            if n < 0:
                raise EdgeListParseError(f"negative node count {n}", line_number)
            continue

        if len(fields) not in (2, 3):
            raise EdgeListParseError(f"expected 'u v' or 'u v w', got {line!r}", line_number)
        try:
            u, v = int(fields[0]), int(fields[1])
            w = float(fields[2]) if len(fields) == 3 else 1.0
        except ValueError:
            raise EdgeListParseError(f"cannot parse {line!r}", line_number)

        if not (0 <= u < n and 0 <= v < n):
            raise EdgeListParseError(f"node id out of range 0..{n - 1} in {line!r}", line_number)
        if u == v:
            raise EdgeListParseError(f"self-loop on node {u}", line_number)
        if not w > 0:
            raise EdgeListParseError(f"weight must be positive, got {w}", line_number)
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            raise EdgeListParseError(f"duplicate edge ({u}, {v})", line_number)
        seen.add(key)
        edges.append((u, v, w))

    if n is None:
        raise EdgeListParseError("empty edge list: missing node count")
    try:
        return Graph.from_edges(n, edges, directed)
    except GraphStateError as e:
        raise EdgeListParseError(str(e))


def format_edge_list(g: Graph) -> str:
    """Serialize the active subgraph; weights are written only for weighted graphs."""
    sub, _ = g.induced_subgraph() if not g.fully_active() else (g, None)
    weighted = sub.is_weighted
    lines = [str(sub.n)]
    for u, v, w in sub.edges():
        lines.append(f"{u} {v} {w!r}" if weighted else f"{u} {v}")
    return "\n".join(lines) + "\n"


def load_edge_list(path: PathLike, directed: bool) -> Graph:
    return parse_edge_list(Path(path).read_text(), directed)


def save_edge_list(g: Graph, path: PathLike) -> None:
    Path(path).write_text(format_edge_list(g))
