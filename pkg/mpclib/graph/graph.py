from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from mpclib.errors import GraphFormatError

__all__ = [
    "Graph",
    "GraphStats",
    "graph_stats",
    "induced_subgraph",
    "lift_nodes",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Static undirected simple graph on nodes 0..n-1, stored as
    strictly increasing adjacency tuples.
    """
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    m: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "m", sum(map(len, self.adjacency)) // 2)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Graph:
        neighbor_sets: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphFormatError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) out of range for n={n}")
            if v in neighbor_sets[u]:
                raise GraphFormatError(f"duplicate edge ({min(u, v)}, {max(u, v)})")
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        return cls(n, tuple(tuple(sorted(nbrs)) for nbrs in neighbor_sets))

    @classmethod
    def empty(cls, n: int = 0) -> Graph:
        return cls(n, tuple(() for _ in range(n)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash((self.n, self.adjacency))

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter(map(len, self.adjacency), dtype=np.int64, count=self.n)

    @cached_property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.adjacency[u]
        index = bisect.bisect_left(nbrs, v)
        return index < len(nbrs) and nbrs[index] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges (u, v) with u < v in lexicographic order."""
        for u, nbrs in enumerate(self.adjacency):
            start = bisect.bisect_right(nbrs, u)
            for v in nbrs[start:]:
                yield (u, v)

    @cached_property
    def csr(self) -> csr_matrix:
        """Adjacency matrix with unit entries."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter(
            (v for nbrs in self.adjacency for v in nbrs),
            dtype=np.int64,
            count=int(indptr[-1]),
        )
        data = np.ones(len(indices), dtype=np.float64)
        return csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def check_invariants(self) -> None:
        for v, nbrs in enumerate(self.adjacency):
            for a, b in zip(nbrs, nbrs[1:]):
                if a >= b:
                    raise GraphFormatError(f"adjacency of {v} is not strictly increasing")
            for u in nbrs:
                if u == v:
                    raise GraphFormatError(f"self-loop at node {v}")
                if not self.has_edge(u, v):
                    raise GraphFormatError(f"edge ({v}, {u}) is not symmetric")
        if 2 * self.m != int(self.degrees.sum()):
            raise GraphFormatError("degree sum differs from 2m")


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    max_degree: int
    degree_histogram: tuple[int, ...]
    components: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "max_degree": self.max_degree,
            "degree_histogram": list(self.degree_histogram),
            "components": self.components,
        }


def graph_stats(graph: Graph) -> GraphStats:
    if graph.n == 0:
        return GraphStats(0, 0, 0, (), 0)
    histogram = np.bincount(graph.degrees, minlength=graph.max_degree + 1)
    n_components, _ = connected_components(graph.csr, directed=False)
    return GraphStats(
        n=graph.n,
        m=graph.m,
        max_degree=graph.max_degree,
        degree_histogram=tuple(int(count) for count in histogram),
        components=int(n_components),
    )


def induced_subgraph(graph: Graph, nodes: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """
    Returns G[S] relabelled to 0..|S|-1 in increasing order of the
    original ids, together with the mapping new id -> original id.
    """
    mapping = tuple(sorted(set(nodes)))
    index = {v: i for i, v in enumerate(mapping)}
    adjacency = tuple(
        tuple(index[u] for u in graph.adjacency[v] if u in index)
        for v in mapping
    )
    return Graph(len(mapping), adjacency), mapping


def lift_nodes(mapping: Sequence[int], nodes: Iterable[int]) -> frozenset[int]:
    """Translates subgraph ids back to the ids of the graph it was cut from."""
    return frozenset(mapping[v] for v in nodes)
