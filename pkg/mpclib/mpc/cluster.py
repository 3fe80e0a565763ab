from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

from mpclib.errors import ResourceError
from mpclib.logger import log
from mpclib.mpc.machines import MachineConfig
from mpclib.mpc.machines import MachineLayout
from mpclib.mpc.machines import build_layout
from mpclib.utils.simple_functions import word_bits

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph

__all__ = [
    "Message",
    "RoundMetrics",
    "AuditReport",
    "Cluster",
    "audit",
]


class Message(NamedTuple):
    src: int
    dst: int
    words: int
    payload: Any = None


@dataclass(frozen=True)
class RoundMetrics:
    label: str
    max_sent_words: int
    max_recv_words: int
    max_resident_words: int
    total_resident_words: int
    machines: int

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "max_sent_words": self.max_sent_words,
            "max_recv_words": self.max_recv_words,
            "max_resident_words": self.max_resident_words,
            "total_resident_words": self.total_resident_words,
            "machines": self.machines,
        }


@dataclass(frozen=True)
class AuditReport:
    passed: bool
    rounds: int
    first_offending_round: int | None
    reason: str | None
    peak_machine_words: int
    peak_total_words: int
    budget: float

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "rounds": self.rounds,
            "first_offending_round": self.first_offending_round,
            "reason": self.reason,
            "peak_machine_words": self.peak_machine_words,
            "peak_total_words": self.peak_total_words,
            "budget": self.budget,
        }


class Cluster(object):
    """
    A simulated set of machines with S words each. Every communication
    goes through exchange(), which splits deliveries across as many
    rounds as the send and receive caps require and records one
    RoundMetrics per round.
    """

    def __init__(self, config: MachineConfig, layout: MachineLayout | None = None):
        self.config = config
        self.layout = layout
        self.word_bits = word_bits(config.n)
        self.base_stored: list[int] = list(layout.stored) if layout else []
        self.extra_stored: list[int] = []
        self.history: list[RoundMetrics] = []
        self.peak_machines = len(self.base_stored)

    @classmethod
    def for_graph(cls, graph: Graph, config: MachineConfig) -> Cluster:
        return cls(config, build_layout(graph, config))

    @classmethod
    def scratch(cls, config: MachineConfig, machines: int) -> Cluster:
        """A cluster of empty machines, handy for exercising exchange alone."""
        cluster = cls(config)
        cluster.base_stored = [0] * machines
        cluster.peak_machines = machines
        return cluster

    @property
    def words(self) -> int:
        return self.config.words

    @property
    def machine_count(self) -> int:
        return len(self.base_stored) + len(self.extra_stored)

    @property
    def rounds(self) -> int:
        return len(self.history)

    def stored(self) -> list[int]:
        return self.base_stored + self.extra_stored

    def add_machines(self, count: int) -> list[int]:
        start = self.machine_count
        self.extra_stored.extend([0] * count)
        self.peak_machines = max(self.peak_machines, self.machine_count)
        return list(range(start, start + count))

    def set_stored(self, machine: int, words: int) -> None:
        offset = machine - len(self.base_stored)
        if offset < 0:
            raise ValueError(f"machine {machine} holds graph data and is not reassignable")
        self.extra_stored[offset] = words

    def release_machines(self) -> None:
        self.extra_stored = []

    def exchange(
        self,
        messages: Sequence[Message],
        label: str = "exchange",
        stored: Sequence[int] | None = None,
    ) -> dict[int, list[Any]]:
        """
        Delivers messages, returning the payloads received by each
        machine in (sender, sequence) order. A machine sends at most S
        words per round and receives at most S minus what it stores.
        Messages a machine sends to itself are free.
        """
        S = self.words
        stored = list(self.stored() if stored is None else stored)
        machines = len(stored)
        received: dict[int, list[tuple[int, int, Any]]] = defaultdict(list)
        pending = []
        for seq, message in enumerate(messages):
            if message.words > S:
                raise ResourceError(
                    f"message of {message.words} words from machine {message.src} "
                    f"to machine {message.dst} exceeds the machine size S={S}"
                )
            if message.src == message.dst:
                received[message.dst].append((message.src, seq, message.payload))
            else:
                pending.append((seq, message))
        pending.sort(key=lambda item: (
            item[1].src,
            (item[1].dst - item[1].src) % machines,
            item[0],
        ))

        max_stored = max(stored, default=0)
        total_stored = sum(stored)
        first = True
        while pending or first:
            first = False
            sent: dict[int, int] = defaultdict(int)
            recv: dict[int, int] = defaultdict(int)
            left = []
            for seq, message in pending:
                src, dst, words = message.src, message.dst, message.words
                if sent[src] + words <= S and recv[dst] + words <= S - stored[dst]:
                    sent[src] += words
                    recv[dst] += words
                    received[dst].append((src, seq, message.payload))
                else:
                    left.append((seq, message))
            if left and len(left) == len(pending):
                _, stuck = left[0]
                raise ResourceError(
                    f"cannot deliver {stuck.words} words to machine {stuck.dst}, "
                    f"which stores {stored[stuck.dst]} of S={S} words"
                )
            self.history.append(RoundMetrics(
                label=label,
                max_sent_words=max(sent.values(), default=0),
                max_recv_words=max(recv.values(), default=0),
                max_resident_words=max(
                    [max_stored] + [stored[m] + words for m, words in recv.items()]
                ),
                total_resident_words=total_stored + sum(recv.values()),
                machines=machines,
            ))
            pending = left

        return {
            dst: [payload for _, _, payload in sorted(items, key=lambda x: (x[0], x[1]))]
            for dst, items in received.items()
        }

    def audit(self) -> AuditReport:
        return audit(self.history, self.config)


def audit(history: Sequence[RoundMetrics], config: MachineConfig) -> AuditReport:
    """Passes iff every round respects the S-word caps and the total budget."""
    S = config.words
    budget = config.total_budget
    first = None
    reason = None
    for index, metrics in enumerate(history, start=1):
        if metrics.max_sent_words > S:
            reason = f"a machine sent {metrics.max_sent_words} words"
        elif metrics.max_recv_words > S:
            reason = f"a machine received {metrics.max_recv_words} words"
        elif metrics.max_resident_words > S:
            reason = f"a machine held {metrics.max_resident_words} words"
        elif metrics.total_resident_words > budget:
            reason = f"{metrics.total_resident_words} words in total exceed the budget of {budget:.0f}"
        if reason is not None:
            first = index
            break
    report = AuditReport(
        passed=first is None,
        rounds=len(history),
        first_offending_round=first,
        reason=reason,
        peak_machine_words=max((m.max_resident_words for m in history), default=0),
        peak_total_words=max((m.total_resident_words for m in history), default=0),
        budget=budget,
    )
    if not report.passed:
        log.warning(f"audit failed in MPC round {first}: {reason}")
    return report
