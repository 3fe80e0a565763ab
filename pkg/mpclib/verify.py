"""
Brute-force checks of algorithm outputs. Every check is a pure function
of the graph and the node set it certifies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.sparse.csgraph import dijkstra

from mpclib.graph.graph import induced_subgraph
from mpclib.utils.simple_functions import log2

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph

__all__ = [
    "Verdict",
    "ComponentReport",
    "verify_independent",
    "verify_domination",
    "verify_degree_bound",
    "degree_bound",
    "component_report",
]


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    witness: Any = None
    measured: float | None = None
    bound: float | None = None
    # Soft verdicts are reported but do not fail a run
    hard: bool = True

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        witness = self.witness
        if isinstance(witness, tuple):
            witness = list(witness)
        return {
            "name": self.name,
            "passed": self.passed,
            "hard": self.hard,
            "witness": witness,
            "measured": self.measured,
            "bound": self.bound,
        }


def _mask(graph: Graph, nodes: Iterable[int]) -> np.ndarray:
    mask = np.zeros(graph.n, dtype=bool)
    mask[list(nodes)] = True
    return mask


def verify_independent(graph: Graph, nodes: Iterable[int]) -> Verdict:
    """No edge of the graph has both endpoints in `nodes`; the witness is such an edge."""
    mask = _mask(graph, nodes)
    for u, v in graph.edges():
        if mask[u] and mask[v]:
            return Verdict("independent", False, witness=(u, v))
    return Verdict("independent", True)


def verify_domination(graph: Graph, nodes: Iterable[int], beta: int) -> Verdict:
    """
    Every node is within `beta` hops of `nodes`. On failure the witness
    is the unreached node farthest from the set, unreachable ones first.
    """
    name = f"dominated_{beta}"
    sources = sorted(set(nodes))
    if graph.n == 0:
        return Verdict(name, True, measured=0, bound=beta)
    if not sources:
        return Verdict(name, False, witness=0, measured=math.inf, bound=beta)
    distances = dijkstra(
        graph.csr, directed=False, unweighted=True, indices=sources, min_only=True,
    )
    farthest = float(distances.max())
    if farthest <= beta:
        return Verdict(name, True, measured=farthest, bound=beta)
    # argmax returns the first maximum; prefer the largest id among ties
    ties = np.flatnonzero(distances == distances.max())
    return Verdict(name, False, witness=int(ties[-1]), measured=farthest, bound=beta)


def degree_bound(f: float, c: float, n: int) -> float:
    """2 c f ln n."""
    return 2 * c * f * math.log(n) if n > 1 else 0.0


def verify_degree_bound(graph: Graph, nodes: Iterable[int], f: float, c: float, n: int, hard: bool = False) -> Verdict:
    """Largest degree inside G[nodes] against 2 c f ln n; the witness is the node attaining it."""
    sub, mapping = induced_subgraph(graph, nodes)
    bound = degree_bound(f, c, n)
    if sub.n == 0:
        return Verdict("degree_bound", True, measured=0, bound=bound, hard=hard)
    degrees = sub.degrees
    worst = int(np.argmax(degrees))
    measured = int(degrees[worst])
    passed = measured <= bound
    return Verdict(
        "degree_bound", passed,
        witness=None if passed else mapping[worst],
        measured=measured, bound=bound, hard=hard,
    )


@dataclass(frozen=True)
class ComponentReport:
    sizes: tuple[int, ...]
    total: int
    largest_words: int
    # Delta^4 log_Delta n, reported next to the measured sizes
    size_bound: float
    # n / Delta^10
    residual_bound: float

    @property
    def largest(self) -> int:
        return self.sizes[0] if self.sizes else 0

    def to_json(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "total": self.total,
            "largest": self.largest,
            "largest_words": self.largest_words,
            "size_bound": self.size_bound,
            "residual_bound": self.residual_bound,
        }


def component_report(graph: Graph, nodes: Iterable[int]) -> ComponentReport:
    """Component sizes of G[nodes], largest first."""
    sub, _ = induced_subgraph(graph, nodes)
    delta = max(2, graph.max_degree)
    size_bound = delta ** 4 * max(1.0, log2(graph.n) / log2(delta))
    residual_bound = graph.n / float(delta) ** 10
    if sub.n == 0:
        return ComponentReport((), 0, 0, size_bound, residual_bound)
    count, labels = connected_components(sub.csr, directed=False)
    sizes = np.bincount(labels, minlength=count)
    words = np.bincount(labels, weights=1 + sub.degrees, minlength=count)
    return ComponentReport(
        sizes=tuple(sorted((int(s) for s in sizes), reverse=True)),
        total=sub.n,
        largest_words=int(words.max()),
        size_bound=size_bound,
        residual_bound=residual_bound,
    )
