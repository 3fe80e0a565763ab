from __future__ import annotations

from collections import defaultdict
from typing import Any, Sequence

from mpclib.mpc.cluster import Cluster
from mpclib.mpc.cluster import Message
from mpclib.separable import Tag
from mpclib.separable import check_separable
from mpclib.separable import combine
from mpclib.separable import fold
from mpclib.utils.iterables import pack_by_weight
from mpclib.utils.words import payload_words

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph

__all__ = [
    "aggregate_separable",
    "bundle",
]


def bundle(
    cluster: Cluster,
    items: dict[tuple[int, int], list[tuple[Any, int]]],
    stored: Sequence[int] | None = None,
) -> list[Message]:
    """
    Groups (payload, words) items travelling between the same pair of
    machines into as few messages as the receiver can take per round.
    """
    stored = cluster.stored() if stored is None else stored
    messages = []
    for (src, dst), entries in sorted(items.items()):
        capacity = max(1, cluster.words - stored[dst]) if src != dst else cluster.words
        batches = pack_by_weight(
            [payload for payload, _ in entries],
            [words for _, words in entries],
            capacity,
        )
        for batch, words in batches:
            messages.append(Message(src, dst, words, batch))
    return messages


def _merge(partials: dict, key, tag: Tag, value) -> None:
    if key in partials:
        partials[key] = combine(tag, partials[key], value)
    else:
        partials[key] = fold(tag, [value])


def aggregate_separable(
    cluster: Cluster,
    graph: Graph,
    tag: Tag,
    values: Sequence[Any],
    label: str = "aggregate",
) -> list[Any]:
    """
    For every node v, folds values[u] over the neighbors u of v with
    the separable function tag. A value of None means u contributes
    nothing; nodes without contributors get None.

    Values travel down each split node's copy tree, across edges to the
    copy of the receiver holding that edge, and partial folds travel up
    to the primary copy, one round per tree level each way.
    """
    check_separable(tag)
    layout = cluster.layout
    word_bits = cluster.word_bits
    contributors = [u for u in range(graph.n) if values[u] is not None]

    def item_words(value) -> int:
        return 1 + payload_words(value, word_bits)

    # Down the copy trees
    by_depth: dict[int, list] = defaultdict(list)
    for u in contributors:
        for copy in layout.copies[u][1:]:
            by_depth[layout.depth_of(copy.index)].append(copy)
    for depth in sorted(by_depth):
        items: dict[tuple[int, int], list] = defaultdict(list)
        for copy in by_depth[depth]:
            parent = layout.parent(copy)
            value = values[copy.node]
            items[(parent.machine, copy.machine)].append((copy.node, item_words(value)))
        cluster.exchange(bundle(cluster, items), label=f"{label}:down")

    # Across the edges
    items = defaultdict(list)
    for u in contributors:
        value = values[u]
        words = item_words(value)
        neighbors = graph.neighbors(u)
        for copy in layout.copies[u]:
            for w in neighbors[copy.start:copy.stop]:
                target = layout.copy_holding(w, u, graph)
                items[(copy.machine, target.machine)].append(((w, target.index, value), words))
    delivered = cluster.exchange(bundle(cluster, items), label=f"{label}:edges")

    partials: dict[tuple[int, int], Any] = {}
    for machine in sorted(delivered):
        for batch in delivered[machine]:
            for w, index, value in batch:
                _merge(partials, (w, index), tag, value)

    # Up the copy trees, deepest level first
    max_depth = max(
        (layout.tree_depth(w) for w, index in partials if index > 0),
        default=0,
    )
    for depth in range(max_depth, 0, -1):
        items = defaultdict(list)
        for (w, index), value in sorted(partials.items()):
            if index == 0 or layout.depth_of(index) != depth:
                continue
            copy = layout.copies[w][index]
            parent = layout.parent(copy)
            items[(copy.machine, parent.machine)].append(
                ((w, parent.index, value), item_words(value))
            )
        delivered = cluster.exchange(bundle(cluster, items), label=f"{label}:up")
        for machine in sorted(delivered):
            for batch in delivered[machine]:
                for w, index, value in batch:
                    _merge(partials, (w, index), tag, value)

    return [partials.get((v, 0)) for v in range(graph.n)]
