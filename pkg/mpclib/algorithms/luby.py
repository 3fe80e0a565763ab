from __future__ import annotations

from dataclasses import dataclass, replace

from mpclib.algorithms.common import ProgramRun
from mpclib.algorithms.common import run_program
from mpclib.compression.program import SparseProgram
from mpclib.congest.program import Broadcast
from mpclib.congest.program import Exchange
from mpclib.congest.program import Status
from mpclib.congest.program import Transition
from mpclib.constants import DEFAULT_MESSAGE_WORDS
from mpclib.logger import log
from mpclib.utils.simple_functions import ceil_log2

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph
    from mpclib.mpc.machines import MachineConfig
    from mpclib.randomness import RandomTape

__all__ = [
    "LubyState",
    "LubyProgram",
    "LubyResult",
    "luby_mis",
]


@dataclass(frozen=True)
class LubyState:
    node: int
    active: bool = True
    in_mis: bool = False


def _draw_key(sender: int, draw: int) -> tuple[int, int]:
    # Equal draws are broken by id
    return draw, sender


class LubyProgram(SparseProgram):
    """
    Luby's MIS. Odd rounds carry the draws of the active nodes and each
    node only needs the smallest one around it, so they fold with min.
    A node whose own draw beats its neighborhood joins the MIS, and the
    even round that follows retires its neighbors.
    """
    CONFIG = {
        # None derives 8 * ceil(log2(n + 2)) + 8
        "max_iterations": None,
        "n": None,
    }

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        if self.max_iterations is None:
            self.max_iterations = 8 * ceil_log2((self.n or 0) + 2) + 8
        self.exchanges = (
            Exchange("min", lift=_draw_key, dense=True),
            Exchange("or"),
        )

    def total_rounds(self, graph: Graph) -> int:
        return 2 * self.max_iterations

    def exchange_for(self, round: int) -> Exchange:
        return self.exchanges[(round - 1) % 2]

    def init(self, ctx):
        return Transition(LubyState(ctx.node), Broadcast(ctx.integer(1)))

    def step(self, ctx, state: LubyState, inbox) -> Transition:
        if ctx.round % 2:
            mine = (ctx.integer(ctx.round), ctx.node)
            best = inbox.value
            if best is None or mine < best:
                return Transition(replace(state, in_mis=True), Broadcast(True), Status.HALTED)
            return Transition(state)
        if inbox.value:
            return Transition(replace(state, active=False), None, Status.HALTED)
        return Transition(state, Broadcast(ctx.integer(ctx.round + 1)))

    def estimate_activation(self, state: LubyState, t: int, tau: int) -> float:
        """
        Whether a node joins depends on its neighbors' draws, which no
        state at a phase start can bound below 1. Draw rounds are dense,
        so Luby only ever runs round by round on separable exchanges.
        """
        if not state.active:
            return 0.0
        if tau == t + 1 and tau % 2 == 0:
            # Joiners halt while announcing, so the wire holds no survivor
            return 0.0
        return 1.0


@dataclass
class LubyResult:
    independent: frozenset[int]
    run: ProgramRun


def luby_mis(
    graph: Graph,
    engine: str,
    tape: RandomTape,
    machine_config: MachineConfig | None = None,
    max_iterations: int | None = None,
    force_ell: int | None = None,
    show_progress: bool = False,
    message_words: int = DEFAULT_MESSAGE_WORDS,
) -> LubyResult:
    program = LubyProgram(max_iterations=max_iterations, n=tape.n, message_words=message_words)
    run = run_program(graph, program, engine, tape, machine_config, force_ell, show_progress)
    independent = frozenset(v for v, s in enumerate(run.states) if s.in_mis)
    undecided = sum(1 for s in run.states if s.active and not s.in_mis)
    if undecided:
        log.warning(
            f"{program}: {undecided} nodes undecided after {program.max_iterations} iterations"
        )
    return LubyResult(independent, run)
