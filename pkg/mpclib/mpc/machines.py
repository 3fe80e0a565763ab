from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field

from mpclib.constants import INPUT_LINEAR
from mpclib.constants import MEMORY_MODES
from mpclib.constants import UNRESTRICTED
from mpclib.errors import ConfigurationError
from mpclib.logger import log
from mpclib.utils.config_ops import digest_config
from mpclib.utils.simple_functions import safe_log2

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph

__all__ = [
    "MachineConfig",
    "NodeCopy",
    "MachineLayout",
    "build_layout",
]


class MachineConfig(object):
    """
    Machine model for a given input size: S = ceil(n^epsilon) words
    per machine and a total-memory budget depending on memory_mode.
    Built once from the input graph, then reused for every subgraph a
    pipeline works on.
    """
    CONFIG = {
        "epsilon": 0.5,
        "memory_mode": UNRESTRICTED,
        "polylog_slack": 4,
        # Share of a machine filled with graph data by the layout
        "graph_fill": 0.5,
        # Words reserved next to each node for its program state
        "state_words": 1,
        "machine_count_constant": 8,
        "words_override": None,
        "budget_override": None,
    }

    def __init__(self, n: int, m: int, **kwargs):
        digest_config(self, kwargs)
        if not 0 < self.epsilon < 1:
            raise ConfigurationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.memory_mode not in MEMORY_MODES:
            raise ConfigurationError(
                f"unknown memory mode {self.memory_mode!r}; "
                f"choose one of {', '.join(MEMORY_MODES)}"
            )
        self.n = int(n)
        self.m = int(m)
        if self.words_override is not None:
            self.words = int(self.words_override)
        else:
            self.words = max(2, math.ceil(max(self.n, 1) ** self.epsilon))
        if self.words < 2:
            raise ConfigurationError(f"machines need at least 2 words, got {self.words}")

    @property
    def tree_depth_bound(self) -> int:
        return math.ceil(1 / self.epsilon)

    @property
    def total_budget(self) -> float:
        """
        Words the whole cluster may hold. Input-linear memory is O(n + m)
        rather than O(m): every node, isolated ones included, keeps at
        least its id and state on its host.
        """
        if self.budget_override is not None:
            return float(self.budget_override)
        polylog = safe_log2(self.n) ** 2
        if self.memory_mode == INPUT_LINEAR:
            base = self.n + self.m
        else:
            base = self.m + self.n ** (1 + self.epsilon)
        return self.polylog_slack * base * polylog

    @property
    def machine_guideline(self) -> float:
        size = max(self.n + self.m, 2)
        return self.machine_count_constant * size ** (1 - self.epsilon)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "memory_mode": self.memory_mode,
            "words_per_machine": self.words,
            "total_budget": self.total_budget,
            "polylog_slack": self.polylog_slack,
        }


@dataclass(frozen=True)
class NodeCopy:
    node: int
    index: int
    # Position of this copy's chunk inside the node's adjacency list
    start: int
    stop: int
    words: int
    machine: int

    @property
    def is_primary(self) -> bool:
        return self.index == 0


@dataclass
class MachineLayout:
    """
    Where every node lives. A node whose adjacency does not fit one
    machine is split into copies, arranged as a heap-ordered tree with
    fan-out S rooted at the primary copy.
    """
    config: MachineConfig
    copies: list[list[NodeCopy]]
    stored: list[int]
    fill: int
    chunk_starts: list[list[int]] = field(default_factory=list)

    @property
    def machine_count(self) -> int:
        return len(self.stored)

    @property
    def fan_out(self) -> int:
        return self.config.words

    def host(self, v: int) -> int:
        return self.copies[v][0].machine

    def copy_holding(self, v: int, u: int, graph: Graph) -> NodeCopy:
        """The copy of v whose adjacency chunk contains neighbor u."""
        position = bisect.bisect_left(graph.neighbors(v), u)
        index = bisect.bisect_right(self.chunk_starts[v], position) - 1
        return self.copies[v][index]

    def parent(self, copy: NodeCopy) -> NodeCopy | None:
        if copy.index == 0:
            return None
        return self.copies[copy.node][(copy.index - 1) // self.fan_out]

    def depth_of(self, index: int) -> int:
        depth = 0
        while index > 0:
            index = (index - 1) // self.fan_out
            depth += 1
        return depth

    def tree_depth(self, v: int) -> int:
        return self.depth_of(len(self.copies[v]) - 1)

    @property
    def max_tree_depth(self) -> int:
        if not self.copies:
            return 0
        return max(self.tree_depth(v) for v in range(len(self.copies)))

    def split_nodes(self) -> list[int]:
        return [v for v, copies in enumerate(self.copies) if len(copies) > 1]

    def to_json(self) -> dict:
        return {
            "machines": self.machine_count,
            "fill": self.fill,
            "split_nodes": len(self.split_nodes()),
            "max_tree_depth": self.max_tree_depth,
            "stored_words": sum(self.stored),
        }


def _chunk_bounds(degree: int, primary_room: int, room: int) -> list[tuple[int, int]]:
    bounds = [(0, min(degree, primary_room))]
    start = bounds[0][1]
    while start < degree:
        bounds.append((start, min(degree, start + room)))
        start = bounds[-1][1]
    return bounds


class _FirstFit(object):
    """
    First-fit bin packing. Machines are bucketed by remaining room, each
    bucket a heap of machine ids, so the lowest-id machine with room w
    is the smallest heap top among buckets >= w.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.remaining: list[int] = []
        self.buckets: dict[int, list[int]] = {}

    def _push(self, machine: int) -> None:
        heapq.heappush(self.buckets.setdefault(self.remaining[machine], []), machine)

    def place(self, words: int) -> int:
        best = None
        for room in range(words, self.capacity + 1):
            heap = self.buckets.get(room)
            # Drop stale entries left behind by earlier placements
            while heap and self.remaining[heap[0]] != room:
                heapq.heappop(heap)
            if heap and (best is None or heap[0] < best):
                best = heap[0]
        if best is None:
            best = len(self.remaining)
            self.remaining.append(self.capacity)
        else:
            heapq.heappop(self.buckets[self.remaining[best]])
        self.remaining[best] -= words
        self._push(best)
        return best


def build_layout(graph: Graph, config: MachineConfig) -> MachineLayout:
    """
    Packs every node onto machines by first fit in descending order of
    degree. Graph data fills at most graph_fill of a machine so that
    the remainder can receive messages.
    """
    words = config.words
    fill = int(words * config.graph_fill)
    if fill < 2 + config.state_words:
        fill = words
    if fill < 2 + config.state_words:
        raise ConfigurationError(
            f"machines of {words} words cannot hold a node id, "
            f"{config.state_words} state words and one neighbor"
        )
    primary_room = fill - 1 - config.state_words
    room = fill - 1

    packer = _FirstFit(fill)
    copies: list[list[NodeCopy]] = [[] for _ in range(graph.n)]
    chunk_starts: list[list[int]] = [[] for _ in range(graph.n)]
    order = sorted(range(graph.n), key=lambda v: (-graph.degree(v), v))
    for v in order:
        bounds = _chunk_bounds(graph.degree(v), primary_room, room)
        chunk_starts[v] = [start for start, _ in bounds]
        for index, (start, stop) in enumerate(bounds):
            size = 1 + (stop - start) + (config.state_words if index == 0 else 0)
            machine = packer.place(size)
            copies[v].append(NodeCopy(v, index, start, stop, size, machine))

    stored = [fill - remaining for remaining in packer.remaining]
    layout = MachineLayout(config, copies, stored, fill, chunk_starts)

    total = sum(stored)
    if total > config.total_budget:
        raise ConfigurationError(
            f"storing the graph takes {total} words, the {config.memory_mode} "
            f"budget is {config.total_budget:.0f}"
        )
    if layout.max_tree_depth > config.tree_depth_bound:
        log.warning(
            f"aggregation tree depth {layout.max_tree_depth} exceeds "
            f"ceil(1/epsilon) = {config.tree_depth_bound}"
        )
    if layout.machine_count > config.machine_guideline:
        log.warning(
            f"{layout.machine_count} machines exceed the guideline of "
            f"{config.machine_guideline:.0f} for epsilon={config.epsilon}"
        )
    log.debug(
        f"layout: {layout.machine_count} machines of {words} words, "
        f"{len(layout.split_nodes())} split nodes"
    )
    return layout
