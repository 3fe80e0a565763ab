from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from mpclib.congest.program import Inbox
from mpclib.congest.program import NodeContext
from mpclib.congest.program import NodeProgram
from mpclib.congest.program import Status
from mpclib.congest.program import Transition
from mpclib.congest.program import broadcast_payload
from mpclib.congest.program import expand_outbox
from mpclib.constants import DEFAULT_KAPPA
from mpclib.logger import log
from mpclib.separable import fold
from mpclib.utils.words import payload_words

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.congest.program import Exchange
    from mpclib.graph.graph import Graph
    from mpclib.randomness import RandomTape

__all__ = [
    "RoundRecord",
    "ExecutionTrace",
    "CongestionReport",
    "run_congest",
    "check_state_congested",
    "deliver",
]


@dataclass
class RoundRecord:
    round: int
    statuses: tuple[Status, ...]
    state_words: np.ndarray
    messages_sent: int
    max_message_words: int

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "active": sum(status is Status.ACTIVE for status in self.statuses),
            "send_only": sum(status is Status.SEND_ONLY for status in self.statuses),
            "halted": sum(status is Status.HALTED for status in self.statuses),
            "max_state_words": int(self.state_words.max()) if len(self.state_words) else 0,
            "messages_sent": self.messages_sent,
            "max_message_words": self.max_message_words,
        }


@dataclass
class ExecutionTrace:
    word_bits: int
    initial: RoundRecord
    rounds: list[RoundRecord] = field(default_factory=list)
    final_states: list[Any] = field(default_factory=list)
    final_statuses: list[Status] = field(default_factory=list)
    halted_round: list[int | None] = field(default_factory=list)

    @property
    def round_count(self) -> int:
        return len(self.rounds)

    def records(self) -> list[RoundRecord]:
        return [self.initial, *self.rounds]

    def to_json(self) -> dict:
        return {
            "word_bits": self.word_bits,
            "rounds": [record.to_json() for record in self.records()],
            "halted_round": list(self.halted_round),
        }


@dataclass(frozen=True)
class CongestionReport:
    passed: bool
    kappa: int
    worst_node: int | None
    worst_round: int | None
    worst_bits: int
    budget_bits: int

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "kappa": self.kappa,
            "worst_node": self.worst_node,
            "worst_round": self.worst_round,
            "worst_bits": self.worst_bits,
            "budget_bits": self.budget_bits,
        }


def deliver(
    senders: Iterable[int],
    outboxes: Sequence[Any],
    graph: Graph,
    round: int,
    exchange: Exchange | None,
    receivers: Iterable[int],
) -> dict[int, Inbox]:
    """
    Builds the round-`round` inboxes of `receivers` from the pending
    outboxes of `senders`. Messages to anyone else are dropped.
    """
    receivers = set(receivers)
    if exchange is None:
        messages: dict[int, list] = defaultdict(list)
        for u in sorted(senders):
            for v, payload in expand_outbox(outboxes[u], graph.neighbors(u)):
                if v in receivers:
                    messages[v].append((u, payload))
        return {
            v: Inbox(v, round, messages=tuple(messages.get(v, ())))
            for v in receivers
        }
    lifted: dict[int, list] = defaultdict(list)
    for u in sorted(senders):
        payload = broadcast_payload(outboxes[u], u, round, graph.neighbors(u))
        if payload is None:
            continue
        value = exchange.lift(u, payload)
        for v in graph.neighbors(u):
            if v in receivers:
                lifted[v].append(value)
    return {
        v: Inbox.folded(v, round, fold(exchange.tag, lifted.get(v, ())))
        for v in receivers
    }


def _message_stats(outboxes, senders, graph, word_bits) -> tuple[int, int]:
    count = 0
    max_words = 0
    for u in senders:
        for _, payload in expand_outbox(outboxes[u], graph.neighbors(u)):
            count += 1
            max_words = max(max_words, payload_words(payload, word_bits))
    return count, max_words


def run_congest(
    graph: Graph,
    program: NodeProgram,
    tape: RandomTape,
    max_rounds: int | None = None,
    node_order: Sequence[int] | None = None,
) -> tuple[list[Any], ExecutionTrace]:
    """
    Executes `program` in lockstep rounds until every node has halted
    or `max_rounds` rounds have run. Inboxes are sorted by sender, so
    the order in which nodes are stepped does not matter.
    """
    if max_rounds is None:
        max_rounds = program.total_rounds(graph)
    if max_rounds < 0:
        raise ValueError(f"max_rounds must be non-negative, got {max_rounds}")
    n = graph.n
    word_bits = tape.word_bits
    order = list(range(n)) if node_order is None else list(node_order)

    states: list[Any] = [None] * n
    outboxes: list[Any] = [None] * n
    statuses: list[Status] = [Status.ACTIVE] * n
    halted_round: list[int | None] = [None] * n

    def apply(v: int, transition: Transition, round: int):
        program.check_outbox(v, round + 1, transition.outbox, graph, word_bits)
        states[v] = transition.state
        outboxes[v] = transition.outbox
        statuses[v] = Status(transition.status)
        if statuses[v] is Status.HALTED:
            halted_round[v] = round

    def snapshot(round: int, sent: int, max_words: int) -> RoundRecord:
        return RoundRecord(
            round=round,
            statuses=tuple(statuses),
            state_words=np.array(
                [program.state_words(state, word_bits) for state in states],
                dtype=np.int64,
            ),
            messages_sent=sent,
            max_message_words=max_words,
        )

    for v in order:
        ctx = NodeContext(v, graph.neighbors(v), 0, tape.n, tape)
        apply(v, program.init(ctx), 0)
    trace = ExecutionTrace(word_bits=word_bits, initial=snapshot(0, 0, 0))

    round = 0
    while round < max_rounds and any(s is not Status.HALTED for s in statuses):
        round += 1
        senders = [u for u in range(n) if outboxes[u] is not None]
        alive = [v for v in range(n) if statuses[v] is not Status.HALTED]
        sent, max_words = _message_stats(outboxes, senders, graph, word_bits)
        inboxes = deliver(
            senders, outboxes, graph, round,
            program.exchange_for(round), alive,
        )
        for u in senders:
            outboxes[u] = None
        for v in order:
            if statuses[v] is Status.HALTED:
                continue
            ctx = NodeContext(v, graph.neighbors(v), round, tape.n, tape)
            apply(v, program.step(ctx, states[v], inboxes[v]), round)
        trace.rounds.append(snapshot(round, sent, max_words))

    log.debug(f"{program}: {round} CONGEST rounds on n={n}")
    trace.final_states = list(states)
    trace.final_statuses = list(statuses)
    trace.halted_round = halted_round
    return states, trace


def check_state_congested(
    trace: ExecutionTrace,
    graph: Graph,
    kappa: int = DEFAULT_KAPPA,
) -> CongestionReport:
    """
    A state fits when it stays within kappa * (deg(v) + 1) words, i.e.
    deg(v)*kappa*ceil(log2 n) + kappa*ceil(log2 n) bits.
    """
    budgets = kappa * (graph.degrees + 1)
    worst_ratio = -1.0
    worst = (None, None, 0, 0)
    passed = True
    for record in trace.records():
        if graph.n == 0:
            break
        ratios = record.state_words / budgets
        v = int(np.argmax(ratios))
        if ratios[v] > 1:
            passed = False
        if ratios[v] > worst_ratio:
            worst_ratio = float(ratios[v])
            worst = (
                v, record.round,
                int(record.state_words[v]) * trace.word_bits,
                int(budgets[v]) * trace.word_bits,
            )
    if not passed:
        log.warning(
            f"state of node {worst[0]} reaches {worst[2]} bits in round {worst[1]}, "
            f"budget is {worst[3]} bits"
        )
    return CongestionReport(passed, kappa, *worst)
