from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.sparse.csgraph import connected_components

from mpclib.errors import FinishOffError
from mpclib.graph.graph import induced_subgraph
from mpclib.graph.graph import lift_nodes
from mpclib.logger import log
from mpclib.mpc.cluster import Cluster
from mpclib.mpc.cluster import Message

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph
    from mpclib.mpc.machines import MachineConfig

__all__ = [
    "FinishOffResult",
    "residual_components",
    "greedy_mis",
    "finish_off",
]


@dataclass
class FinishOffResult:
    chosen: frozenset[int]
    # Component sizes in nodes, largest first
    components: list[int]
    largest_component_words: int
    doubling_steps: int = 0
    cluster: Cluster | None = None

    @property
    def mpc_rounds(self) -> int:
        return self.cluster.rounds if self.cluster else 0


def residual_components(graph: Graph) -> list[list[int]]:
    """Connected components of a graph as sorted node lists, ordered by smallest member."""
    if graph.n == 0:
        return []
    count, labels = connected_components(graph.csr, directed=False)
    groups: list[list[int]] = [[] for _ in range(count)]
    for v, label in enumerate(labels):
        groups[label].append(v)
    return sorted(groups, key=lambda group: group[0])


def _component_words(graph: Graph, members: Iterable[int]) -> int:
    # One word per node plus both directions of every edge
    return sum(1 + graph.degree(v) for v in members)


def greedy_mis(graph: Graph) -> frozenset[int]:
    """Greedy MIS scanning nodes by ascending id."""
    chosen = np.zeros(graph.n, dtype=bool)
    for v in range(graph.n):
        if not any(chosen[u] for u in graph.neighbors(v)):
            chosen[v] = True
    return frozenset(np.flatnonzero(chosen).tolist())


def _gather_components(cluster: Cluster, graph: Graph) -> int:
    """
    Charges the cluster for collecting every component on one machine:
    every node learns its component by known-set doubling, the smallest
    id becomes the leader and receives the adjacency of each member,
    then sends every member its verdict. Returns the doubling steps.
    """
    layout = cluster.layout
    machines = dict(zip(range(graph.n), cluster.add_machines(graph.n)))
    known = {v: frozenset(graph.neighbors(v)) | {v} for v in range(graph.n)}

    def stored(held: dict[int, int]) -> list[int]:
        words = cluster.stored()
        for v, amount in held.items():
            words[machines[v]] = amount
        return words

    cluster.exchange(
        [Message(layout.host(v), machines[v], 1 + graph.degree(v), v) for v in range(graph.n)],
        label="finish:adjacency",
    )
    steps = 0
    while True:
        held = {v: len(members) for v, members in known.items()}
        requests, replies = [], []
        for v in range(graph.n):
            for u in sorted(known[v] - {v}):
                requests.append(Message(machines[v], machines[u], 1, v))
                replies.append(Message(machines[u], machines[v], len(known[u]), known[u]))
        cluster.exchange(requests, label=f"finish:double{steps}:request", stored=stored(held))
        cluster.exchange(replies, label=f"finish:double{steps}:reply", stored=stored(held))
        steps += 1
        grown = {
            v: frozenset().union(*(known[u] for u in known[v]))
            for v in range(graph.n)
        }
        if grown == known:
            break
        known = grown

    leaders = {v: min(known[v]) for v in range(graph.n)}
    cluster.exchange(
        [
            Message(layout.host(v), machines[leaders[v]], 1 + graph.degree(v), v)
            for v in range(graph.n)
        ],
        label="finish:gather",
        stored=stored({}),
    )
    cluster.exchange(
        [Message(machines[leaders[v]], layout.host(v), 1, v) for v in range(graph.n)],
        label="finish:verdicts",
        stored=stored({}),
    )
    cluster.release_machines()
    return steps


def finish_off(
    graph: Graph,
    residual: Iterable[int],
    machine_config: MachineConfig,
    simulate: bool = True,
) -> FinishOffResult:
    """
    Computes an MIS of G[residual] by moving each connected component
    onto a machine of its own and solving it greedily by id there.
    On a cluster every component must fit in S words; without one the
    components are only solved.
    """
    sub, mapping = induced_subgraph(graph, residual)
    components = residual_components(sub)
    capacity = machine_config.words
    largest = 0
    for members in components:
        words = _component_words(sub, members)
        largest = max(largest, words)
        if words > capacity and simulate:
            raise FinishOffError([mapping[v] for v in members], words, capacity)

    cluster = None
    steps = 0
    if simulate and sub.n:
        cluster = Cluster.for_graph(sub, machine_config)
        steps = _gather_components(cluster, sub)

    chosen = lift_nodes(mapping, greedy_mis(sub))
    sizes = sorted((len(members) for members in components), reverse=True)
    log.debug(
        f"finish-off: {len(components)} components, largest {sizes[0] if sizes else 0} nodes, "
        f"{len(chosen)} chosen"
    )
    return FinishOffResult(chosen, sizes, largest, steps, cluster)
