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
from mpclib.utils.simple_functions import log2

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph
    from mpclib.mpc.machines import MachineConfig
    from mpclib.randomness import RandomTape

__all__ = [
    "ShatterState",
    "ShatterProgram",
    "ShatterResult",
    "shatter_iterations",
    "shatter_phase_length",
    "shatter",
]

# Round kinds: desire exchange opening a phase, then beep and join per iteration
EXCHANGE, BEEP, JOIN = "e", "a", "b"


@dataclass(frozen=True)
class ShatterState:
    """Desire level is 2^-exponent; beep_exponent is the one the pending beep was drawn with."""
    node: int
    exponent: int = 1
    beep_exponent: int = 1
    beeped: bool = False
    active: bool = True
    in_independent_set: bool = False
    super_heavy: bool = False

    @property
    def desire(self) -> float:
        return 2.0 ** -self.exponent


def shatter_iterations(max_degree: int, iteration_factor: float = 4) -> int:
    return max(1, math.ceil(iteration_factor * log2(max_degree + 2)))


def shatter_phase_length(n: int, delta: float = 1) -> int:
    """Iterations per phase, max(1, floor(sqrt(delta log2 n) / 10))."""
    if n <= 1:
        return 1
    return max(1, math.floor(math.sqrt(delta * log2(n)) / 10))


class ShatterProgram(SparseProgram):
    """
    Sparsified shattering. Every phase opens with a dense exchange in
    which nodes sum their neighbors' desire levels; nodes whose sum
    reaches 2^(sqrt(log2 n) / 5) are super-heavy for the phase and only
    send. Each iteration then has a beep round, after which a non
    super-heavy node that beeped alone joins I, and a join round in
    which joiners retire their neighbors.
    """
    CONFIG = {
        "delta": 1,
        "iteration_factor": 4,
        # Overrides for the derived iteration count and phase length
        "iterations": None,
        "phase_length": None,
        "max_degree": None,
        "n": None,
    }

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        if self.max_degree is None or self.n is None:
            raise ConfigurationError("ShatterProgram needs max_degree and n")
        if self.delta <= 0:
            raise ConfigurationError(f"shatter delta must be positive, got {self.delta}")
        self.alpha = 2
        if self.iterations is None:
            self.iterations = shatter_iterations(self.max_degree, self.iteration_factor)
        if self.phase_length is None:
            self.phase_length = shatter_phase_length(self.n, self.delta)
        self.phases = math.ceil(self.iterations / self.phase_length)
        # Exponents never exceed 1 + iterations, so lifted desires are integers
        self.lift_exponent = self.iterations + 1
        self.super_heavy_threshold = 2.0 ** (math.sqrt(max(0.0, log2(self.n))) / 5)
        self.exchanges = {
            EXCHANGE: Exchange("sum", lift=self.lift_desire, dense=True),
            BEEP: Exchange("or"),
            JOIN: Exchange("or"),
        }

    def __str__(self) -> str:
        return self.name or f"Shatter(T={self.iterations}, L={self.phase_length})"

    def lift_desire(self, sender: int, exponent: int) -> int:
        return 1 << (self.lift_exponent - exponent)

    def locate(self, round: int) -> tuple[int, str, int]:
        """(phase, kind, iteration within the phase) of a round."""
        span = 1 + 2 * self.phase_length
        phase, offset = divmod(round - 1, span)
        if offset == 0:
            return phase, EXCHANGE, 0
        return phase, BEEP if offset % 2 else JOIN, (offset + 1) // 2

    def phase_iterations(self, phase: int) -> int:
        return min(self.phase_length, self.iterations - phase * self.phase_length)

    def total_rounds(self, graph: Graph) -> int:
        return self.phases + 2 * self.iterations

    def exchange_for(self, round: int) -> Exchange:
        return self.exchanges[self.locate(round)[1]]

    def beep_round(self, tau: int) -> int:
        return tau if self.locate(tau)[1] == BEEP else tau - 1

    def activation_address(self, tau: int) -> int:
        # A join is only ever sent by a node whose beep succeeded
        return self.beep_round(tau)

    def _status(self, state: ShatterState) -> Status:
        return Status.SEND_ONLY if state.super_heavy else Status.ACTIVE

    def _draw_beep(self, ctx, state: ShatterState) -> Transition:
        beeped = ctx.sample(state.desire, round=ctx.round + 1)
        state = replace(state, beeped=beeped, beep_exponent=state.exponent)
        return Transition(state, Broadcast(True) if beeped else None, self._status(state))

    def init(self, ctx):
        return Transition(ShatterState(node=ctx.node), Broadcast(1))

    def step(self, ctx, state: ShatterState, inbox) -> Transition:
        phase, kind, j = self.locate(ctx.round)
        if kind == EXCHANGE:
            total = inbox.value or 0
            super_heavy = total >= self.super_heavy_threshold * 2 ** self.lift_exponent
            return self._draw_beep(ctx, replace(state, super_heavy=super_heavy))

        if kind == BEEP:
            heard = bool(inbox.value)
            joined = state.beeped and not heard and not state.super_heavy
            if state.super_heavy or heard:
                exponent = state.exponent + 1
            else:
                exponent = max(1, state.exponent - 1)
            state = replace(state, exponent=exponent, beeped=False, in_independent_set=joined)
            return Transition(state, Broadcast(True) if joined else None, self._status(state))

        if state.in_independent_set:
            return Transition(state, None, Status.HALTED)
        if inbox.value:
            return Transition(replace(state, active=False), None, Status.HALTED)
        if j < self.phase_iterations(phase):
            return self._draw_beep(ctx, state)
        state = replace(state, super_heavy=False)
        if phase < self.phases - 1:
            return Transition(state, Broadcast(state.exponent))
        # Residual node: nothing left to do
        return Transition(state)

    def estimate_activation(self, state: ShatterState, t: int, tau: int) -> float:
        if not state.active:
            return 0.0
        phase, kind, j = self.locate(tau)
        if kind == EXCHANGE:
            return 1.0
        if state.in_independent_set and tau > t + 1:
            return 0.0
        beep = self.beep_round(tau)
        if t >= beep - 1:
            return min(0.5, 2.0 ** -state.beep_exponent)
        # The exponent drops by at most one per beep round before the draw
        steps = sum(1 for r in range(t + 1, beep) if self.locate(r)[1] == BEEP)
        return min(0.5, 2.0 ** (steps - state.exponent))

    def sampling_round(self, tau: int) -> bool:
        return self.locate(tau)[1] != EXCHANGE


@dataclass
class ShatterResult:
    independent: frozenset[int]
    residual: frozenset[int]
    iterations: int
    phase_length: int
    run: ProgramRun


def shatter(
    graph: Graph,
    engine: str,
    tape: RandomTape,
    machine_config: MachineConfig | None = None,
    delta: float = 1,
    iteration_factor: float = 4,
    iterations: int | None = None,
    phase_length: int | None = None,
    force_ell: int | None = None,
    show_progress: bool = False,
    message_words: int = DEFAULT_MESSAGE_WORDS,
) -> ShatterResult:
    program = ShatterProgram(
        delta=delta,
        iteration_factor=iteration_factor,
        iterations=iterations,
        phase_length=phase_length,
        max_degree=graph.max_degree,
        n=tape.n,
        message_words=message_words,
    )
    run = run_program(graph, program, engine, tape, machine_config, force_ell, show_progress)
    independent = frozenset(v for v, s in enumerate(run.states) if s.in_independent_set)
    residual = frozenset(
        v for v, s in enumerate(run.states)
        if s.active and not s.in_independent_set
    )
    log.debug(f"{program}: |I|={len(independent)}, {len(residual)} residual nodes")
    return ShatterResult(independent, residual, program.iterations, program.phase_length, run)
