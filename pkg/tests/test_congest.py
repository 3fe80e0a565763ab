import pytest

from mpclib.algorithms.luby import luby_mis
from mpclib.algorithms.shatter import ShatterProgram
from mpclib.algorithms.sparsify import SparsifyProgram
from mpclib.congest.engine import check_state_congested
from mpclib.congest.engine import run_congest
from mpclib.congest.program import Broadcast
from mpclib.congest.program import Exchange
from mpclib.congest.program import Inbox
from mpclib.congest.program import NodeProgram
from mpclib.congest.program import Status
from mpclib.congest.program import Transition
from mpclib.errors import ProgramError
from mpclib.graph.generators import gen_graph
from mpclib.randomness import RandomTape


class HaltImmediately(NodeProgram):
    def total_rounds(self, graph):
        return 5

    def init(self, ctx):
        return Transition((ctx.node, 0), None, Status.HALTED)


class BroadcastIdOnce(NodeProgram):
    def total_rounds(self, graph):
        return 3

    def init(self, ctx):
        return Transition((), Broadcast(ctx.node))

    def step(self, ctx, state, inbox):
        return Transition(inbox.senders(), None, Status.HALTED)


class HaltWhileSending(NodeProgram):
    """Node 0 halts in init with a message on the wire."""

    def total_rounds(self, graph):
        return 2

    def init(self, ctx):
        if ctx.node == 0:
            return Transition(99, Broadcast(1), Status.HALTED)
        return Transition(0)

    def step(self, ctx, state, inbox):
        return Transition(state + len(inbox), None, Status.HALTED)


class SendsTo(NodeProgram):
    CONFIG = {
        "receiver": 2,
        "payload": 1,
    }

    def total_rounds(self, graph):
        return 1

    def init(self, ctx):
        if ctx.node == 0:
            return Transition(None, {self.receiver: self.payload})
        return Transition(None)

    def step(self, ctx, state, inbox):
        return Transition(None, None, Status.HALTED)


class ReadsRawMessages(BroadcastIdOnce):
    def exchange_for(self, round):
        return Exchange("sum")

    def step(self, ctx, state, inbox):
        return Transition(inbox.messages, None, Status.HALTED)


class HoardsWords(NodeProgram):
    """Keeps deg(v)^2 words of state."""

    def total_rounds(self, graph):
        return 1

    def init(self, ctx):
        return Transition((0,) * ctx.degree ** 2)

    def step(self, ctx, state, inbox):
        return Transition(state, None, Status.HALTED)


def test_halt_immediately(path5):
    states, trace = run_congest(path5, HaltImmediately(), RandomTape(1, 5))
    assert trace.round_count == 0
    assert states == [(v, 0) for v in range(5)]


def test_broadcast_once():
    graph = gen_graph("path", {"n": 3})
    states, trace = run_congest(graph, BroadcastIdOnce(), RandomTape(1, 3))
    assert states[1] == (0, 2)
    assert states[0] == (1,)
    assert trace.round_count == 1
    assert trace.halted_round == [1, 1, 1]


def test_halting_outbox_is_delivered():
    graph = gen_graph("path", {"n": 2})
    states, trace = run_congest(graph, HaltWhileSending(), RandomTape(1, 2))
    assert states == [99, 1]
    assert trace.halted_round == [0, 1]


def test_non_neighbor_aborts():
    graph = gen_graph("path", {"n": 3})
    with pytest.raises(ProgramError) as info:
        run_congest(graph, SendsTo(receiver=2), RandomTape(1, 3))
    assert (info.value.node, info.value.round) == (0, 1)


def test_oversized_payload_aborts():
    graph = gen_graph("path", {"n": 3})
    with pytest.raises(ProgramError, match="message budget"):
        run_congest(graph, SendsTo(receiver=1, payload=(1, 1, 1)), RandomTape(1, 3))


def test_folded_rounds_hide_raw_messages():
    graph = gen_graph("path", {"n": 3})
    with pytest.raises(ProgramError, match="foldable"):
        run_congest(graph, ReadsRawMessages(), RandomTape(1, 3))


def test_inbox_sorted_by_sender():
    inbox = Inbox.of(4, 2, [(9, "a"), (1, "b"), (5, "c")])
    assert inbox.senders() == (1, 5, 9)
    with pytest.raises(ProgramError):
        inbox.value


def test_max_rounds_zero(path5):
    states, trace = run_congest(path5, BroadcastIdOnce(), RandomTape(1, 5), max_rounds=0)
    assert trace.round_count == 0
    assert states == [()] * 5


def test_node_order_does_not_matter(small_gnp):
    tape = RandomTape(3, small_gnp.n)
    program = SparsifyProgram(f=8, c=3, max_degree=small_gnp.max_degree, n=small_gnp.n)
    forward, trace_a = run_congest(small_gnp, program, tape)
    backward, trace_b = run_congest(
        small_gnp, program, tape, node_order=list(reversed(range(small_gnp.n))),
    )
    assert forward == backward
    assert trace_a.to_json() == trace_b.to_json()


def test_luby_on_clique():
    graph = gen_graph("clique", {"n": 5})
    first = luby_mis(graph, "congest", RandomTape(1, 5))
    again = luby_mis(graph, "congest", RandomTape(1, 5))
    assert len(first.independent) == 1
    assert first.independent == again.independent


@pytest.mark.parametrize("make", [
    lambda g: SparsifyProgram(f=8, c=3, max_degree=g.max_degree, n=g.n),
    lambda g: ShatterProgram(max_degree=g.max_degree, n=g.n),
])
def test_shipped_programs_are_state_congested(small_gnp, make):
    _, trace = run_congest(small_gnp, make(small_gnp), RandomTape(2, small_gnp.n))
    assert check_state_congested(trace, small_gnp).passed


def test_hoarding_program_is_flagged():
    graph = gen_graph("star", {"n": 10})
    _, trace = run_congest(graph, HoardsWords(), RandomTape(1, 10))
    report = check_state_congested(trace, graph, kappa=8)
    assert not report.passed
    assert report.worst_node == 0
    assert report.worst_bits > report.budget_bits
