from __future__ import annotations

from mpclib.errors import GraphFormatError
from mpclib.graph.graph import Graph
from mpclib.utils.file_ops import guarantee_parent

__all__ = [
    "load_graph",
    "save_graph",
    "parse_edge_list",
    "format_edge_list",
]


def _parse_pair(line: str, line_number: int) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise GraphFormatError(f"expected two integers, got {line.strip()!r}", line_number)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"non-integer token in {line.strip()!r}", line_number)


def parse_edge_list(text: str) -> Graph:
    """
    Parses the edge-list format: a header line "n m" followed by
    m lines "u v". Errors carry the offending line number.
    """
    lines = text.splitlines()
    if not lines:
        raise GraphFormatError("missing header line", 1)
    n, m = _parse_pair(lines[0], 1)
    if n < 0 or m < 0:
        raise GraphFormatError("negative node or edge count", 1)
    body = lines[1:]
    if len(body) != m:
        raise GraphFormatError(f"header announces {m} edges, found {len(body)}", len(lines))
    neighbor_sets: list[set[int]] = [set() for _ in range(n)]
    for offset, line in enumerate(body):
        line_number = offset + 2
        u, v = _parse_pair(line, line_number)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"node id out of range [0, {n})", line_number)
        if u == v:
            raise GraphFormatError("self-loop", line_number)
        if v in neighbor_sets[u]:
            raise GraphFormatError(f"duplicate edge ({min(u, v)}, {max(u, v)})", line_number)
        neighbor_sets[u].add(v)
        neighbor_sets[v].add(u)
    return Graph(n, tuple(tuple(sorted(nbrs)) for nbrs in neighbor_sets))


def format_edge_list(graph: Graph) -> str:
    lines = [f"{graph.n} {graph.m}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges())
    return "\n".join(lines) + "\n"


def load_graph(path: str) -> Graph:
    with open(path, "r") as fp:
        return parse_edge_list(fp.read())


def save_graph(graph: Graph, path: str) -> None:
    with open(guarantee_parent(path), "w") as fp:
        fp.write(format_edge_list(graph))
