from __future__ import annotations

import math
from dataclasses import dataclass, replace

from mpclib.algorithms.common import ProgramRun
from mpclib.algorithms.common import run_program
from mpclib.compression.program import SparseProgram
from mpclib.congest.program import Broadcast
from mpclib.congest.program import Exchange
from mpclib.congest.program import Status
from mpclib.congest.program import Transition
from mpclib.constants import DEFAULT_MESSAGE_WORDS
from mpclib.errors import ConfigurationError
from mpclib.logger import log
from mpclib.utils.simple_functions import ceil_log

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph
    from mpclib.mpc.machines import MachineConfig
    from mpclib.randomness import RandomTape

__all__ = [
    "SparsifyState",
    "SparsifyProgram",
    "SparsifyResult",
    "join_probability",
    "sparsify_iterations",
    "deg_ordered_sparsify",
]

# Rounds of one iteration: degree count, heavy announcement, join announcement
DEGREE, HEAVY, JOIN = 0, 1, 2
ROUNDS_PER_ITERATION = 3


@dataclass(frozen=True)
class SparsifyState:
    node: int
    iteration: int = 1
    active: bool = True
    in_u: bool = False
    heavy: bool = False
    participating: bool = False
    isolated: bool = False


def join_probability(iteration: int, f: float, c: float, ln_n: float, max_degree: int) -> float:
    """min(1, f^i * c * ln n / Delta)."""
    if max_degree <= 0:
        return 1.0
    return min(1.0, f ** iteration * c * ln_n / max_degree)


def sparsify_iterations(max_degree: int, f: float) -> int:
    """Smallest K >= 1 with f^K >= Delta."""
    return max(1, ceil_log(max_degree, f))


def _alive(sender: int, payload) -> int:
    return 1


class SparsifyProgram(SparseProgram):
    """
    Samples a set U that dominates every node while every node of U
    keeps few neighbors in U. Iteration i finds the heavy nodes, those
    with at least Delta / f^i active neighbors, lets every active node
    in or next to a heavy node join U with probability f^i c ln n / Delta,
    and retires U together with its neighbors.
    """
    CONFIG = {
        "f": 8,
        "c": 3,
        # f <= 3 is raised to this value
        "min_f": 4,
        "max_degree": None,
        # Node count of the input graph, used for ln n
        "n": None,
    }

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        if self.max_degree is None or self.n is None:
            raise ConfigurationError("SparsifyProgram needs max_degree and n")
        if self.f <= 3:
            log.debug(f"sparsify: f={self.f} raised to {self.min_f}")
            self.f = self.min_f
        self.alpha = max(2, self.f)
        self.ln_n = math.log(self.n) if self.n > 1 else 0.0
        self.iterations = sparsify_iterations(self.max_degree, self.f)
        self.exchanges = {
            DEGREE: Exchange("sum", lift=_alive, dense=True),
            HEAVY: Exchange("or"),
            JOIN: Exchange("or"),
        }

    def __str__(self) -> str:
        return self.name or f"Sparsify(f={self.f:.3g})"

    @staticmethod
    def locate(round: int) -> tuple[int, int]:
        """(iteration, kind) of a round."""
        return (round - 1) // ROUNDS_PER_ITERATION + 1, (round - 1) % ROUNDS_PER_ITERATION

    def total_rounds(self, graph: Graph) -> int:
        return ROUNDS_PER_ITERATION * self.iterations

    def exchange_for(self, round: int) -> Exchange:
        return self.exchanges[self.locate(round)[1]]

    def probability(self, iteration: int) -> float:
        return join_probability(iteration, self.f, self.c, self.ln_n, self.max_degree)

    def init(self, ctx):
        state = SparsifyState(node=ctx.node, isolated=ctx.degree == 0)
        return Transition(state, Broadcast(1))

    def step(self, ctx, state: SparsifyState, inbox) -> Transition:
        iteration, kind = self.locate(ctx.round)
        if kind == DEGREE:
            degree = inbox.value or 0
            heavy = degree >= self.max_degree / self.f ** iteration
            state = replace(state, iteration=iteration, heavy=heavy, participating=False)
            return Transition(state, Broadcast(True) if heavy else None)

        if kind == HEAVY:
            final = iteration == self.iterations
            participating = state.heavy or bool(inbox.value) or final or state.isolated
            if not participating:
                return Transition(state)
            p = 1.0 if (final or state.isolated) else self.probability(iteration)
            joined = ctx.sample(p, round=ctx.round + 1)
            state = replace(state, participating=True, in_u=joined)
            return Transition(state, Broadcast(True) if joined else None)

        # Nodes of U and their neighbors retire
        if state.in_u or inbox.value:
            return Transition(replace(state, active=False), None, Status.HALTED)
        if iteration < self.iterations:
            return Transition(state, Broadcast(1))
        return Transition(state, None, Status.HALTED)

    def estimate_activation(self, state: SparsifyState, t: int, tau: int) -> float:
        if not state.active:
            return 0.0
        iteration, kind = self.locate(tau)
        if kind == HEAVY and tau == t + 1:
            return 1.0 if state.heavy else 0.0
        if kind != JOIN:
            return 1.0
        if state.in_u and tau > t + 1:
            return 0.0
        if tau == t + 1 and not state.participating:
            return 0.0
        if iteration == self.iterations or state.isolated:
            return 1.0
        return self.probability(iteration)

    def sampling_round(self, tau: int) -> bool:
        return self.locate(tau)[1] == JOIN


@dataclass
class SparsifyResult:
    chosen: frozenset[int]
    f: float
    c: float
    max_degree: int
    iterations: int
    run: ProgramRun


def deg_ordered_sparsify(
    graph: Graph,
    f: float,
    c: float,
    engine: str,
    tape: RandomTape,
    machine_config: MachineConfig | None = None,
    force_ell: int | None = None,
    min_f: float = 4,
    show_progress: bool = False,
    message_words: int = DEFAULT_MESSAGE_WORDS,
) -> SparsifyResult:
    program = SparsifyProgram(
        f=f, c=c, min_f=min_f, max_degree=graph.max_degree, n=tape.n,
        message_words=message_words,
    )
    run = run_program(graph, program, engine, tape, machine_config, force_ell, show_progress)
    chosen = frozenset(v for v, state in enumerate(run.states) if state.in_u)
    log.debug(
        f"{program}: |U|={len(chosen)} of {graph.n} nodes in "
        f"{run.congest_rounds} CONGEST rounds"
    )
    return SparsifyResult(chosen, program.f, c, graph.max_degree, program.iterations, run)
