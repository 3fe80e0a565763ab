from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Mapping, NamedTuple, Union

from mpclib.constants import DEFAULT_MESSAGE_WORDS
from mpclib.errors import ProgramError
from mpclib.separable import Tag
from mpclib.separable import check_separable
from mpclib.utils.config_ops import digest_config
from mpclib.utils.words import payload_words
from mpclib.utils.words import state_words

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph
    from mpclib.randomness import RandomTape

__all__ = [
    "Status",
    "Broadcast",
    "Transition",
    "Exchange",
    "Inbox",
    "NodeContext",
    "NodeProgram",
    "expand_outbox",
    "is_broadcast",
    "broadcast_payload",
    "outbox_words",
]


class Status(str, Enum):
    ACTIVE = "active"
    SEND_ONLY = "send_only"
    HALTED = "halted"


@dataclass(frozen=True)
class Broadcast:
    """The same payload to every neighbor."""
    payload: Any


Outbox = Union[None, Broadcast, Mapping[int, Any]]


class Transition(NamedTuple):
    state: Any
    outbox: Outbox = None
    status: Status = Status.ACTIVE


def identity_lift(sender: int, payload: Any) -> Any:
    return payload


@dataclass(frozen=True)
class Exchange:
    """
    Declares that receivers of a round consume only the separable fold
    of lift(sender, payload) over their incoming messages. Dense rounds
    are ones where most nodes send, so they are never sampled.
    """
    tag: Tag
    lift: Callable[[int, Any], Any] = identity_lift
    dense: bool = False

    def __post_init__(self):
        check_separable(self.tag)


class Inbox(object):
    """
    What a node receives in one round: either the raw messages as
    (sender, payload) pairs sorted by sender, or only their fold.
    """

    def __init__(
        self,
        node: int,
        round: int,
        messages: tuple[tuple[int, Any], ...] | None = None,
        value: Any = None,
        folded: bool = False,
    ):
        self.node = node
        self.round = round
        self._messages = messages or ()
        self._value = value
        self.is_folded = folded

    @classmethod
    def of(cls, node: int, round: int, messages) -> Inbox:
        return cls(node, round, messages=tuple(sorted(messages, key=lambda m: m[0])))

    @classmethod
    def folded(cls, node: int, round: int, value: Any) -> Inbox:
        return cls(node, round, value=value, folded=True)

    @property
    def messages(self) -> tuple[tuple[int, Any], ...]:
        if self.is_folded:
            raise ProgramError(
                "round was declared foldable, raw messages are unavailable",
                self.node, self.round,
            )
        return self._messages

    @property
    def value(self) -> Any:
        if not self.is_folded:
            raise ProgramError(
                "round was not declared foldable, there is no folded value",
                self.node, self.round,
            )
        return self._value

    def senders(self) -> tuple[int, ...]:
        return tuple(sender for sender, _ in self.messages)

    def __len__(self) -> int:
        return len(self.messages)


class NodeContext(object):
    """Everything a node may know locally while executing one step."""

    def __init__(
        self,
        node: int,
        neighbors: tuple[int, ...],
        round: int,
        n: int,
        tape: RandomTape,
    ):
        self.node = node
        self.neighbors = neighbors
        self.degree = len(neighbors)
        self.round = round
        self.n = n
        self.tape = tape

    def real(self, round: int | None = None) -> float:
        return self.tape.round_real(self.node, self.round if round is None else round)

    def integer(self, round: int | None = None) -> int:
        return self.tape.round_integer(self.node, self.round if round is None else round)

    def sample(self, p: float, round: int | None = None) -> bool:
        return self.tape.sample_event(self.node, self.round if round is None else round, p)

    def broadcast(self, payload: Any) -> Broadcast:
        return Broadcast(payload)


def is_broadcast(outbox: Outbox, neighbors: tuple[int, ...]) -> bool:
    if isinstance(outbox, Broadcast):
        return True
    if not outbox:
        return False
    if set(outbox) != set(neighbors):
        return False
    payloads = list(outbox.values())
    return all(payload == payloads[0] for payload in payloads)


def expand_outbox(outbox: Outbox, neighbors: tuple[int, ...]) -> list[tuple[int, Any]]:
    """(receiver, payload) pairs of an outbox, sorted by receiver."""
    if outbox is None:
        return []
    if isinstance(outbox, Broadcast):
        return [(u, outbox.payload) for u in neighbors]
    return sorted(outbox.items(), key=lambda item: item[0])


def broadcast_payload(outbox: Outbox, node: int, round: int, neighbors: tuple[int, ...]) -> Any:
    """The payload of a broadcast outbox, None if there is nothing to send."""
    if outbox is None or (not isinstance(outbox, Broadcast) and not outbox):
        return None
    if not is_broadcast(outbox, neighbors):
        raise ProgramError(
            "a foldable round needs the same payload sent to every neighbor",
            node, round,
        )
    if isinstance(outbox, Broadcast):
        return outbox.payload
    return next(iter(outbox.values()))


class NodeProgram(object):
    """
    A synchronous CONGEST algorithm described node-locally.

    init(ctx) is step 0. The outbox returned by step r is delivered as
    the inbox of step r + 1, and those messages are said to be sent in
    round r + 1. A halting step still gets its outbox delivered.
    """
    CONFIG = {
        "name": None,
        "message_words": DEFAULT_MESSAGE_WORDS,
    }

    def __init__(self, **kwargs):
        digest_config(self, kwargs)

    def __str__(self) -> str:
        return self.name or self.__class__.__name__

    def init(self, ctx: NodeContext) -> Transition:
        raise NotImplementedError()

    def step(self, ctx: NodeContext, state: Any, inbox: Inbox) -> Transition:
        raise NotImplementedError()

    def exchange_for(self, round: int) -> Exchange | None:
        """How messages sent in this round are consumed; None for raw inboxes."""
        return None

    def total_rounds(self, graph: Graph) -> int:
        raise NotImplementedError()

    def state_words(self, state: Any, word_bits: int) -> int:
        return state_words(state, word_bits)

    def message_budget(self, word_bits: int) -> int:
        return self.message_words

    def check_outbox(
        self,
        node: int,
        round: int,
        outbox: Outbox,
        graph: Graph,
        word_bits: int,
    ) -> None:
        """Rejects messages to non-neighbors and oversized payloads."""
        if outbox is None:
            return
        budget = self.message_budget(word_bits)
        if isinstance(outbox, Broadcast):
            items = [(None, outbox.payload)]
        else:
            items = list(outbox.items())
        for receiver, payload in items:
            if receiver is not None and not graph.has_edge(node, receiver):
                raise ProgramError(f"message addressed to non-neighbor {receiver}", node, round)
            words = payload_words(payload, word_bits)
            if words > budget:
                raise ProgramError(
                    f"payload of {words} words exceeds the {budget}-word message budget",
                    node, round,
                )


def outbox_words(outbox: Outbox, word_bits: int) -> int:
    """Words needed to keep an outbox: one payload for a broadcast, else addressed payloads."""
    if outbox is None:
        return 0
    if isinstance(outbox, Broadcast):
        return payload_words(outbox.payload, word_bits)
    return sum(1 + payload_words(payload, word_bits) for payload in outbox.values())
