from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from tqdm import tqdm as ProgressDisplay

from mpclib.compression.balls import Ball
from mpclib.compression.balls import cover_low_degree
from mpclib.compression.balls import fast_forward
from mpclib.compression.balls import gather_balls
from mpclib.compression.marking import ball_size_bound
from mpclib.compression.marking import mark_nodes
from mpclib.compression.planner import PhasePlan
from mpclib.compression.planner import V1
from mpclib.compression.planner import V2
from mpclib.compression.planner import plan_phases_v1
from mpclib.compression.planner import plan_phases_v2
from mpclib.congest.engine import deliver
from mpclib.congest.program import Inbox
from mpclib.congest.program import NodeContext
from mpclib.congest.program import Status
from mpclib.congest.program import Transition
from mpclib.congest.program import broadcast_payload
from mpclib.congest.program import expand_outbox
from mpclib.congest.program import outbox_words
from mpclib.logger import log
from mpclib.mpc.aggregation import aggregate_separable
from mpclib.mpc.aggregation import bundle
from mpclib.mpc.cluster import Message
from mpclib.utils.words import payload_words

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.compression.program import SparseProgram
    from mpclib.graph.graph import Graph
    from mpclib.mpc.cluster import Cluster
    from mpclib.randomness import RandomTape

__all__ = [
    "PhaseReport",
    "CompressedRun",
    "plan_for",
    "run_compressed",
]

AGGREGATE = "aggregate"
DIRECT = "direct"
GATHER = "gather"
STEPPED = "stepped"


@dataclass
class PhaseReport:
    start: int
    length: int
    mode: str
    mpc_rounds: int
    stage: int | None = None
    case: str | None = None
    marked: int = 0
    centers: int = 0
    max_ball_nodes: int = 0
    max_ball_words: int = 0
    ball_bound: float | None = None
    bound_exceeded: bool = False
    activity: list[float] = field(default_factory=list)
    growth_violations: list[int] = field(default_factory=list)
    degree_threshold: float | None = None
    min_center_degree: int | None = None
    covered: int = 0
    uncovered: int = 0

    def to_json(self) -> dict:
        return {
            "start": self.start,
            "length": self.length,
            "mode": self.mode,
            "mpc_rounds": self.mpc_rounds,
            "stage": self.stage,
            "case": self.case,
            "marked": self.marked,
            "centers": self.centers,
            "max_ball_nodes": self.max_ball_nodes,
            "max_ball_words": self.max_ball_words,
            "ball_bound": self.ball_bound,
            "bound_exceeded": self.bound_exceeded,
            "activity": list(self.activity),
            "growth_violations": list(self.growth_violations),
            "degree_threshold": self.degree_threshold,
            "min_center_degree": self.min_center_degree,
            "covered": self.covered,
            "uncovered": self.uncovered,
        }


@dataclass
class CompressedRun:
    states: list[Any]
    statuses: list[Status]
    halted_round: list[int | None]
    congest_rounds: int
    plans: list[PhasePlan]
    phases: list[PhaseReport]
    cluster: Cluster

    @property
    def mpc_rounds(self) -> int:
        return self.cluster.rounds


def plan_for(
    program: SparseProgram,
    graph: Graph,
    cluster: Cluster,
    total_rounds: int,
    version: str = V1,
    force_ell: int | None = None,
) -> list[PhasePlan]:
    config = cluster.config
    if version == V2:
        return plan_phases_v2(
            program.stage_lengths(total_rounds), program.alpha,
            graph.max_degree, config.n, config.epsilon, force_ell,
        )
    return plan_phases_v1(total_rounds, program.alpha, config.n, config.epsilon, force_ell)


def _segments(program: SparseProgram, plan: PhasePlan) -> list[list[int]]:
    """Maximal runs of sparse rounds inside a plan; dense rounds stand alone."""
    segments: list[list[int]] = []
    sparse: list[int] = []
    for round in plan.rounds:
        exchange = program.exchange_for(round)
        if exchange is not None and exchange.dense:
            if sparse:
                segments.append(sparse)
                sparse = []
            segments.append([round])
        else:
            sparse.append(round)
    if sparse:
        segments.append(sparse)
    return segments


class _Execution(object):
    """Mutable per-node bookkeeping of one compressed run."""

    def __init__(self, graph, program, cluster, tape):
        self.graph = graph
        self.program = program
        self.cluster = cluster
        self.tape = tape
        self.word_bits = tape.word_bits
        n = graph.n
        self.states: list[Any] = [None] * n
        self.outboxes: list[Any] = [None] * n
        self.statuses: list[Status] = [Status.ACTIVE] * n
        self.halted_round: list[int | None] = [None] * n

    def context(self, v: int, round: int) -> NodeContext:
        return NodeContext(v, self.graph.neighbors(v), round, self.tape.n, self.tape)

    def apply(self, v: int, transition: Transition, round: int, halted_at: int | None = None) -> None:
        self.program.check_outbox(v, round + 1, transition.outbox, self.graph, self.word_bits)
        self.states[v] = transition.state
        self.outboxes[v] = transition.outbox
        self.statuses[v] = Status(transition.status)
        if self.statuses[v] is Status.HALTED and self.halted_round[v] is None:
            self.halted_round[v] = round if halted_at is None else halted_at

    def alive(self) -> list[int]:
        return [v for v in range(self.graph.n) if self.statuses[v] is not Status.HALTED]

    def all_halted(self) -> bool:
        return all(status is Status.HALTED for status in self.statuses)

    def init(self) -> None:
        for v in range(self.graph.n):
            self.apply(v, self.program.init(self.context(v, 0)), 0)

    def clear_outboxes(self) -> None:
        self.outboxes = [None] * self.graph.n

    def aggregate_round(self, round: int) -> None:
        exchange = self.program.exchange_for(round)
        values = [None] * self.graph.n
        for u in range(self.graph.n):
            payload = broadcast_payload(self.outboxes[u], u, round, self.graph.neighbors(u))
            if payload is not None:
                values[u] = exchange.lift(u, payload)
        results = aggregate_separable(
            self.cluster, self.graph, exchange.tag, values, label=f"round{round}",
        )
        alive = self.alive()
        self.clear_outboxes()
        for v in alive:
            inbox = Inbox.folded(v, round, results[v])
            self.apply(v, self.program.step(self.context(v, round), self.states[v], inbox), round)

    def direct_round(self, round: int) -> None:
        graph, layout = self.graph, self.cluster.layout
        senders = [u for u in range(graph.n) if self.outboxes[u] is not None]
        items: dict = {}
        for u in senders:
            for v, payload in expand_outbox(self.outboxes[u], graph.neighbors(u)):
                key = (layout.host(u), layout.host(v))
                words = 1 + payload_words(payload, self.word_bits)
                items.setdefault(key, []).append(((u, v, payload), words))
        self.cluster.exchange(bundle(self.cluster, items), label=f"round{round}")
        alive = self.alive()
        inboxes = deliver(senders, self.outboxes, graph, round, None, alive)
        self.clear_outboxes()
        for v in alive:
            self.apply(v, self.program.step(self.context(v, round), self.states[v], inboxes[v]), round)


def run_compressed(
    graph: Graph,
    program: SparseProgram,
    cluster: Cluster,
    tape: RandomTape,
    plans: list[PhasePlan] | None = None,
    version: str = V1,
    force_ell: int | None = None,
    max_rounds: int | None = None,
    show_progress: bool = False,
) -> CompressedRun:
    """
    Runs `program` on the simulated cluster. Dense rounds go through
    separable aggregation; runs of sparse rounds inside a phase are
    compressed by marking likely senders, gathering their balls and
    replaying the rounds locally at every center. The final states
    equal those of run_congest with the same tape.
    """
    if max_rounds is None:
        max_rounds = program.total_rounds(graph)
    if plans is None:
        plans = plan_for(program, graph, cluster, max_rounds, version, force_ell)
    run = _Execution(graph, program, cluster, tape)
    run.init()
    reports: list[PhaseReport] = []

    for plan in ProgressDisplay(plans, desc=str(program), leave=False, disable=not show_progress):
        for segment in _segments(program, plan):
            segment = [r for r in segment if r <= max_rounds]
            if not segment or run.all_halted():
                continue
            before = cluster.rounds
            exchange = program.exchange_for(segment[0])
            if len(segment) == 1 and exchange is not None:
                run.aggregate_round(segment[0])
                report = PhaseReport(segment[0] - 1, 1, AGGREGATE, 0, plan.stage, plan.case)
            elif len(segment) == 1:
                run.direct_round(segment[0])
                report = PhaseReport(segment[0] - 1, 1, DIRECT, 0, plan.stage, plan.case)
            else:
                report = _gather_phase(run, segment[0] - 1, len(segment), plan, version)
            report.mpc_rounds = cluster.rounds - before
            reports.append(report)
            log.debug(
                f"{program}: rounds {report.start + 1}..{report.start + report.length} "
                f"by {report.mode} in {report.mpc_rounds} MPC rounds"
            )

    if run.all_halted():
        congest_rounds = max((r for r in run.halted_round if r is not None), default=0)
    else:
        congest_rounds = max((report.start + report.length for report in reports), default=0)
    return CompressedRun(
        states=run.states,
        statuses=run.statuses,
        halted_round=run.halted_round,
        congest_rounds=congest_rounds,
        plans=plans,
        phases=reports,
        cluster=cluster,
    )


def _step_rounds(run: _Execution, rounds: range) -> None:
    for round in rounds:
        if run.program.exchange_for(round) is not None:
            run.aggregate_round(round)
        else:
            run.direct_round(round)


def _gather_phase(run: _Execution, t: int, length: int, plan: PhasePlan, version: str) -> PhaseReport:
    """
    Compresses rounds t + 1 .. t + length. v1 gathers a ball of radius
    length at every alive node. v2 gathers balls of radius length + 1
    only at centers, the nodes next to a marked node or marked
    themselves whose degree exceeds Delta^(1/2^stage); every other node
    next to a marked one is served by an adjacent center whose ball
    contains its own. If some node cannot be served the phase is
    stepped round by round instead.
    """
    graph, program, cluster = run.graph, run.program, run.cluster
    marking = mark_nodes(
        graph, program, run.states, run.statuses, run.outboxes, run.tape, t, length,
    )
    marked = marking.marked
    alive = run.alive()
    alive_set = set(alive)
    report = PhaseReport(
        start=t,
        length=length,
        mode=GATHER,
        mpc_rounds=0,
        stage=plan.stage,
        case=plan.case,
        marked=len(marked),
        activity=[marking.activity[tau] for tau in sorted(marking.activity)],
        growth_violations=marking.growth_violations(program.alpha),
    )
    if report.growth_violations:
        log.warning(
            f"{program}: estimated activity grows faster than alpha={program.alpha} "
            f"into rounds {report.growth_violations}"
        )

    if version == V2:
        flags = [True if u in marked else None for u in range(graph.n)]
        near_marked = aggregate_separable(cluster, graph, "or", flags, label="involved")
        needy = [v for v in alive if near_marked[v]]
        threshold = graph.max_degree ** (1 / 2 ** (plan.stage or 1))
        radius = length + 1
        centers = sorted(v for v in set(needy) | marked if graph.degree(v) > threshold)
        low = [v for v in needy if graph.degree(v) <= threshold]
        report.degree_threshold = threshold
    else:
        radius = length
        centers = alive
        low = []
    report.centers = len(centers)
    report.min_center_degree = min((graph.degree(v) for v in centers), default=None)

    balls, machines = gather_balls(
        cluster, graph, program, marking, run.states, run.outboxes, centers, radius,
    )
    served: dict[int, Ball] = {}
    served_by: dict[int, int] = {}
    if low:
        served, served_by, uncovered = cover_low_degree(
            cluster, graph, program, marking, run.states, run.outboxes,
            balls, machines, low, length,
        )
        report.covered = len(served)
        report.uncovered = len(uncovered)
    if report.uncovered:
        cluster.release_machines()
        log.warning(
            f"{report.uncovered} low-degree nodes have no covering center in rounds "
            f"{t + 1}..{t + length}; stepping them round by round"
        )
        _step_rounds(run, range(t + 1, t + length + 1))
        report.mode = STEPPED
        return report

    local = {v: balls[v] for v in centers if v in alive_set}
    local.update(served)
    for v in alive:
        if v not in local:
            local[v] = Ball(v, length, frozenset([v]), {v: 0}, (), 0)
    results = {
        v: fast_forward(
            local[v], graph, program, run.tape, marking,
            run.states, run.statuses, run.outboxes,
        )
        for v in sorted(local)
    }

    commits = []
    for v, (transition, _) in results.items():
        if v in balls:
            source = machines[v]
        elif v in served_by:
            source = machines[served_by[v]]
        else:
            continue
        words = (
            program.state_words(transition.state, run.word_bits)
            + outbox_words(transition.outbox, run.word_bits)
        )
        commits.append(Message(source, cluster.layout.host(v), max(1, words), v))
    cluster.exchange(commits, label="commit")
    cluster.release_machines()

    run.clear_outboxes()
    for v, (transition, halted_at) in results.items():
        run.apply(v, transition, t + length, halted_at)

    shown = list(balls.values()) + list(served.values())
    bound = ball_size_bound(marking, run.tape.n, radius)
    report.ball_bound = bound
    report.max_ball_nodes = max((ball.size for ball in shown), default=0)
    report.max_ball_words = max((ball.words for ball in shown), default=0)
    if report.max_ball_nodes > bound:
        report.bound_exceeded = True
        log.warning(
            f"ball of {report.max_ball_nodes} nodes exceeds the activity bound "
            f"{bound:.1f} in rounds {t + 1}..{t + length}"
        )
    return report
