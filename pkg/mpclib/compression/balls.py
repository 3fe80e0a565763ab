from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from mpclib.congest.engine import deliver
from mpclib.congest.program import NodeContext
from mpclib.congest.program import Status
from mpclib.congest.program import Transition
from mpclib.congest.program import outbox_words
from mpclib.errors import BallOverflowError
from mpclib.errors import EstimatorUnsoundError
from mpclib.mpc.cluster import Message

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.compression.marking import Marking
    from mpclib.compression.program import SparseProgram
    from mpclib.graph.graph import Graph
    from mpclib.mpc.cluster import Cluster
    from mpclib.randomness import RandomTape

__all__ = [
    "Ball",
    "relay_ball",
    "gather_balls",
    "cover_low_degree",
    "fast_forward",
]


@dataclass(frozen=True)
class Ball:
    """
    The center plus every marked node reachable from it by at most
    `radius` edges whose nodes past the center are all marked.
    """
    center: int
    radius: int
    members: frozenset[int]
    # Hop distance from the center inside the ball
    distances: dict
    edges: tuple[tuple[int, int], ...]
    words: int

    @property
    def size(self) -> int:
        return len(self.members)


def relay_ball(graph: Graph, marked: Iterable[int], center: int, radius: int) -> tuple[frozenset[int], dict[int, int]]:
    """Breadth-first search from center that only continues through marked nodes."""
    marked = set(marked)
    distances = {center: 0}
    queue = deque([center])
    while queue:
        v = queue.popleft()
        if distances[v] == radius:
            continue
        for u in graph.neighbors(v):
            if u in marked and u not in distances:
                distances[u] = distances[v] + 1
                queue.append(u)
    return frozenset(distances), distances


def _induced_edges(graph: Graph, members: frozenset[int]) -> tuple[tuple[int, int], ...]:
    return tuple(
        (u, v)
        for u in sorted(members)
        for v in graph.neighbors(u)
        if u < v and v in members
    )


class _Records(object):
    """Words of the record each node contributes to a ball."""

    def __init__(self, graph, program, marking, states, outboxes, word_bits):
        self.graph = graph
        self.program = program
        self.marked = marking.marked
        self.states = states
        self.outboxes = outboxes
        self.word_bits = word_bits
        self._cache: dict[int, int] = {}

    def words(self, u: int) -> int:
        if u not in self._cache:
            marked_neighbors = sum(1 for w in self.graph.neighbors(u) if w in self.marked)
            # id, marked rounds, state, message on the wire, marked adjacency
            self._cache[u] = (
                2 + self.program.state_words(self.states[u], self.word_bits)
                + outbox_words(self.outboxes[u], self.word_bits) + marked_neighbors
            )
        return self._cache[u]

    def ball_words(self, members: Iterable[int]) -> int:
        return sum(self.words(u) for u in members)


def gather_balls(
    cluster: Cluster,
    graph: Graph,
    program: SparseProgram,
    marking: Marking,
    states: Sequence[Any],
    outboxes: Sequence[Any],
    centers: Sequence[int],
    radius: int,
    label: str = "gather",
) -> tuple[dict[int, Ball], dict[int, int]]:
    """
    Assembles the ball of every center by doubling. Balls of radius 1
    come straight from the hosts; radius 2r is the union of the radius-r
    balls of the members of a radius-r ball, and radius ell composes the
    powers of two along the binary digits of ell.

    Every center and every marked node gets a machine of its own.
    Returns the balls and the machine each center's ball lives on.
    """
    S = cluster.words
    marked = marking.marked
    records = _Records(graph, program, marking, states, outboxes, cluster.word_bits)
    owners = sorted(set(centers) | marked)
    machines = dict(zip(owners, cluster.add_machines(len(owners))))
    layout = cluster.layout

    def stored(held: dict[int, int]) -> list[int]:
        words = cluster.stored()
        for u, amount in held.items():
            words[machines[u]] = amount
        return words

    # Radius 1: every owner gets its own record, plus one per marked neighbor
    messages = []
    power: dict[int, frozenset[int]] = {}
    for u in owners:
        messages.append(Message(layout.host(u), machines[u], records.words(u), u))
        members = {u}
        for w in graph.neighbors(u):
            if w in marked:
                members.add(w)
                messages.append(Message(layout.host(w), machines[u], records.words(w), w))
        power[u] = frozenset(members)
    for u, members in power.items():
        if records.ball_words(members) > S:
            raise BallOverflowError(u, records.ball_words(members), S)
    cluster.exchange(messages, label=f"{label}:records", stored=stored({}))

    def compose(current: dict[int, frozenset[int]], step: dict[int, frozenset[int]], name: str):
        held = {
            u: records.ball_words(current.get(u, frozenset()) | step.get(u, frozenset()))
            for u in set(current) | set(step)
        }
        needed = defaultdict(int)
        requests = []
        replies = []
        for u in sorted(current):
            for w in sorted(current[u]):
                if w == u:
                    continue
                piece = records.ball_words(step[w])
                requests.append(Message(machines[u], machines[w], 1, u))
                replies.append(Message(machines[w], machines[u], piece, step[w]))
                needed[u] = max(needed[u], piece)
                needed[w] = max(needed[w], 1)
        for u, room in needed.items():
            if held[u] + room > S:
                raise BallOverflowError(u, held[u] + room, S)
        cluster.exchange(requests, label=f"{label}:{name}:request", stored=stored(held))
        delivered = cluster.exchange(replies, label=f"{label}:{name}:reply", stored=stored(held))
        result = {}
        for u in current:
            members = set(current[u]) | step.get(u, frozenset())
            for piece in delivered.get(machines[u], ()):
                members |= piece
            result[u] = frozenset(members)
            if records.ball_words(result[u]) > S:
                raise BallOverflowError(u, records.ball_words(result[u]), S)
        return result

    powers = {1: power}
    size = 1
    while 2 * size <= radius:
        powers[2 * size] = compose(powers[size], powers[size], f"double{2 * size}")
        size *= 2

    balls = {v: powers[size][v] for v in centers}
    covered = size
    for bit in sorted(powers, reverse=True):
        if bit < size and covered + bit <= radius:
            balls = compose(balls, powers[bit], f"compose{covered + bit}")
            covered += bit

    result = {}
    for v in centers:
        members = balls[v]
        _, distances = relay_ball(graph, members - {v}, v, radius)
        result[v] = Ball(
            center=v,
            radius=radius,
            members=members,
            distances=distances,
            edges=_induced_edges(graph, members),
            words=records.ball_words(members),
        )
    return result, {v: machines[v] for v in centers}


def cover_low_degree(
    cluster: Cluster,
    graph: Graph,
    program: SparseProgram,
    marking: Marking,
    states: Sequence[Any],
    outboxes: Sequence[Any],
    balls: dict[int, Ball],
    machines: dict[int, int],
    low: Sequence[int],
    radius: int,
    label: str = "gather",
) -> tuple[dict[int, Ball], dict[int, int], list[int]]:
    """
    Serves low-degree nodes from the balls of adjacent centers. Each
    low node outside a neighboring center's ball ships its record to
    that center; center u then serves v when u's ball holds the relay
    ball of radius `radius` around v, apart from v itself.

    Returns the served balls, the center serving each of them and the
    low nodes no center could serve.
    """
    S = cluster.words
    marked = marking.marked
    records = _Records(graph, program, marking, states, outboxes, cluster.word_bits)
    layout = cluster.layout

    held = {u: ball.words for u, ball in balls.items()}
    messages = []
    for v in low:
        for u in graph.neighbors(v):
            if u in balls and v not in balls[u].members:
                messages.append(Message(layout.host(v), machines[u], records.words(v), v))
                held[u] += records.words(v)
    for u, words in held.items():
        if words > S:
            raise BallOverflowError(u, words, S)
    stored = cluster.stored()
    for u, words in held.items():
        stored[machines[u]] = words
    cluster.exchange(messages, label=f"{label}:cover", stored=stored)

    served: dict[int, Ball] = {}
    served_by: dict[int, int] = {}
    uncovered = []
    for v in low:
        members, distances = relay_ball(graph, marked, v, radius)
        hosts = [
            u for u in graph.neighbors(v)
            if u in balls and members - {v} <= balls[u].members
        ]
        if not hosts:
            uncovered.append(v)
            continue
        served_by[v] = min(hosts)
        served[v] = Ball(
            center=v,
            radius=radius,
            members=members,
            distances=distances,
            edges=_induced_edges(graph, members),
            words=records.ball_words(members),
        )
    return served, served_by, uncovered


def fast_forward(
    ball: Ball,
    graph: Graph,
    program: SparseProgram,
    tape: RandomTape,
    marking: Marking,
    states: Sequence[Any],
    statuses: Sequence[Status],
    outboxes: Sequence[Any],
) -> tuple[Transition, int | None]:
    """
    Replays the rounds of the phase inside the ball and returns the
    center's transition after the last one, together with the round in
    which the center halted (None if it did not).

    A member at distance d from the center holds its true state for the
    first radius - d rounds, which is all the center needs. Messages to
    nodes outside the ball are dropped. A member whose state is still
    exact and who sends in a round it was not marked for makes the
    estimator unsound.
    """
    t, ell = marking.start, marking.length
    center = ball.center
    members = sorted(ball.members)
    local_states = {u: states[u] for u in members}
    local_statuses = {u: statuses[u] for u in members}
    local_outboxes = {u: outboxes[u] for u in members}
    halted_at = None
    word_bits = tape.word_bits

    for k in range(1, ell + 1):
        round = t + k
        senders = [u for u in members if local_outboxes[u] is not None]
        if k > 1:
            for u in senders:
                exact = ball.distances[u] <= ball.radius - k + 1
                if exact and not marking.is_marked(u, round):
                    raise EstimatorUnsoundError(str(program), u, round)
        alive = [u for u in members if local_statuses[u] is not Status.HALTED]
        inboxes = deliver(
            senders, local_outboxes, graph, round,
            program.exchange_for(round), alive,
        )
        for u in senders:
            local_outboxes[u] = None
        for u in alive:
            ctx = NodeContext(u, graph.neighbors(u), round, tape.n, tape)
            transition = program.step(ctx, local_states[u], inboxes[u])
            program.check_outbox(u, round + 1, transition.outbox, graph, word_bits)
            local_states[u] = transition.state
            local_outboxes[u] = transition.outbox
            local_statuses[u] = Status(transition.status)
            if u == center and local_statuses[u] is Status.HALTED:
                halted_at = round

    return Transition(
        local_states[center],
        local_outboxes[center],
        local_statuses[center],
    ), halted_at
