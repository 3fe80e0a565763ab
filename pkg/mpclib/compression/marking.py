from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from mpclib.congest.program import Status
from mpclib.errors import EstimatorError
from mpclib.utils.simple_functions import safe_log2

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.compression.program import SparseProgram
    from mpclib.graph.graph import Graph
    from mpclib.randomness import RandomTape

__all__ = [
    "Marking",
    "mark_nodes",
    "estimated_activity",
    "growth_violations",
    "sparsity_certificate",
    "ball_size_bound",
]


def growth_violations(activity: dict[int, float], alpha: float) -> list[int]:
    """Rounds whose activity exceeds alpha times that of the previous listed round."""
    rounds = sorted(activity)
    return [
        b for a, b in zip(rounds, rounds[1:])
        if activity[b] > alpha * activity[a] + 1e-9
    ]


@dataclass
class Marking:
    start: int
    length: int
    # Node -> rounds of the phase it is marked for
    marked_rounds: dict[int, frozenset[int]] = field(default_factory=dict)
    # Round -> estimated activity level of the most active counted node
    activity: dict[int, float] = field(default_factory=dict)
    # Rounds of the phase decided by a coin flip
    sampling: frozenset[int] = frozenset()

    @property
    def marked(self) -> frozenset[int]:
        return frozenset(self.marked_rounds)

    def is_marked(self, node: int, round: int) -> bool:
        return round in self.marked_rounds.get(node, ())

    def growth_violations(self, alpha: float) -> list[int]:
        return growth_violations(
            {tau: a for tau, a in self.activity.items() if tau in self.sampling},
            alpha,
        )


def _estimates(
    program: SparseProgram,
    states: Sequence[Any],
    statuses: Sequence[Status],
    t: int,
    tau: int,
) -> np.ndarray:
    values = np.zeros(len(states), dtype=np.float64)
    for u, state in enumerate(states):
        if statuses[u] is Status.HALTED:
            continue
        value = program.estimate_activation(state, t, tau)
        if not (isinstance(value, (int, float)) and 0 <= value <= 1):
            raise EstimatorError(str(program), u, tau, value)
        values[u] = value
    return values


def _level(graph: Graph, estimates: np.ndarray, counted: np.ndarray) -> float:
    if not graph.n or not counted.any():
        return 0.0
    return float((graph.csr @ estimates)[counted].max())


def _counted(statuses: Sequence[Status]) -> np.ndarray:
    return np.array([status is Status.ACTIVE for status in statuses], dtype=bool)


def estimated_activity(
    graph: Graph,
    program: SparseProgram,
    states: Sequence[Any],
    statuses: Sequence[Status],
    t: int,
    rounds: Iterable[int],
) -> dict[int, float]:
    """
    For every tau in rounds, the largest sum of neighbor estimates over
    active nodes, all estimates taken from the round-t states.
    """
    counted = _counted(statuses)
    return {
        tau: _level(graph, _estimates(program, states, statuses, t, tau), counted)
        for tau in rounds
    }


def sparsity_certificate(
    graph: Graph,
    program: SparseProgram,
    states: Sequence[Any],
    statuses: Sequence[Status],
    t: int,
    rounds: Iterable[int],
    alpha: float | None = None,
) -> list[int]:
    """
    Sampling rounds among `rounds` at which estimated activity, seen
    from round t, grows by more than alpha over the previous sampling
    round. An empty list certifies the program alpha-sparse there.
    """
    if alpha is None:
        alpha = program.alpha
    sampling = [tau for tau in rounds if program.sampling_round(tau)]
    activity = estimated_activity(graph, program, states, statuses, t, sampling)
    return growth_violations(activity, alpha)


def mark_nodes(
    graph: Graph,
    program: SparseProgram,
    states: Sequence[Any],
    statuses: Sequence[Status],
    outboxes: Sequence[Any],
    tape: RandomTape,
    t: int,
    length: int,
) -> Marking:
    """
    Marks u for round t + 1 when it has a message on the wire, and for
    tau >= t + 2 when its real at the activation address of tau is at
    most the estimate computed from its round-t state.
    """
    marking = Marking(t, length)
    rounds: dict[int, set[int]] = {}
    nodes = np.arange(graph.n)
    counted = _counted(statuses)
    for tau in range(t + 1, t + length + 1):
        estimates = _estimates(program, states, statuses, t, tau)
        marking.activity[tau] = _level(graph, estimates, counted)
        if tau == t + 1:
            senders = [u for u in range(graph.n) if outboxes[u] is not None]
        else:
            reals = tape.round_reals(nodes, program.activation_address(tau))
            senders = np.flatnonzero((estimates > 0) & (reals <= estimates)).tolist()
        for u in senders:
            rounds.setdefault(u, set()).add(tau)
    marking.marked_rounds = {u: frozenset(taus) for u, taus in sorted(rounds.items())}
    marking.sampling = frozenset(
        tau for tau in marking.activity if program.sampling_round(tau)
    )
    return marking


def ball_size_bound(marking: Marking, n: int, radius: int | None = None) -> float:
    """
    sum_{j=0}^{r} B^j with B = sum_tau A_tau * log2 n, the number of
    nodes a tree of marked relays of depth r around a center can hold.
    r defaults to the phase length.
    """
    if radius is None:
        radius = marking.length
    B = sum(marking.activity.values()) * safe_log2(n)
    try:
        return sum(B ** j for j in range(radius + 1))
    except OverflowError:
        return math.inf
