from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from mpclib.compression.engine import PhaseReport
from mpclib.compression.engine import run_compressed
from mpclib.compression.planner import V1
from mpclib.compression.planner import V2
from mpclib.congest.engine import ExecutionTrace
from mpclib.congest.engine import run_congest
from mpclib.congest.program import Status
from mpclib.constants import ENGINE_ALIASES
from mpclib.constants import ENGINE_CONGEST
from mpclib.constants import ENGINE_MPC_V1
from mpclib.constants import ENGINES
from mpclib.errors import ConfigurationError
from mpclib.mpc.cluster import AuditReport
from mpclib.mpc.cluster import Cluster
from mpclib.mpc.cluster import audit

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.compression.program import SparseProgram
    from mpclib.graph.graph import Graph
    from mpclib.mpc.machines import MachineConfig
    from mpclib.randomness import RandomTape

__all__ = [
    "resolve_engine",
    "is_mpc",
    "ProgramRun",
    "RunMetrics",
    "run_program",
    "collect_metrics",
]


def resolve_engine(name: str) -> str:
    name = ENGINE_ALIASES.get(name, name)
    if name not in ENGINES:
        raise ConfigurationError(
            f"unknown engine {name!r}; choose one of {', '.join(ENGINES)}"
        )
    return name


def is_mpc(engine: str) -> bool:
    return resolve_engine(engine) != ENGINE_CONGEST


@dataclass
class ProgramRun:
    program: str
    engine: str
    states: list[Any]
    statuses: list[Status]
    congest_rounds: int
    trace: ExecutionTrace | None = None
    cluster: Cluster | None = None
    phases: list[PhaseReport] = field(default_factory=list)

    @property
    def mpc_rounds(self) -> int:
        return self.cluster.rounds if self.cluster else 0

    def alive(self) -> list[int]:
        return [v for v, status in enumerate(self.statuses) if status is not Status.HALTED]


def run_program(
    graph: Graph,
    program: SparseProgram,
    engine: str,
    tape: RandomTape,
    machine_config: MachineConfig | None = None,
    force_ell: int | None = None,
    show_progress: bool = False,
) -> ProgramRun:
    engine = resolve_engine(engine)
    if engine == ENGINE_CONGEST:
        states, trace = run_congest(graph, program, tape)
        return ProgramRun(
            program=str(program),
            engine=engine,
            states=states,
            statuses=trace.final_statuses,
            congest_rounds=trace.round_count,
            trace=trace,
        )
    if machine_config is None:
        raise ConfigurationError(f"engine {engine} needs a machine configuration")
    cluster = Cluster.for_graph(graph, machine_config)
    run = run_compressed(
        graph, program, cluster, tape,
        version=V1 if engine == ENGINE_MPC_V1 else V2,
        force_ell=force_ell,
        show_progress=show_progress,
    )
    return ProgramRun(
        program=str(program),
        engine=engine,
        states=run.states,
        statuses=run.statuses,
        congest_rounds=run.congest_rounds,
        cluster=cluster,
        phases=run.phases,
    )


@dataclass
class RunMetrics:
    """Resource totals of a pipeline, summed or maximized over its stages."""
    congest_rounds: int = 0
    mpc_rounds: int = 0
    max_sent_words: int = 0
    max_recv_words: int = 0
    peak_machine_words: int = 0
    peak_total_words: int = 0
    machines: int = 0
    phases: list[PhaseReport] = field(default_factory=list)
    audits: list[AuditReport] = field(default_factory=list)

    @property
    def audit_passed(self) -> bool:
        return all(report.passed for report in self.audits)

    def to_json(self) -> dict:
        return {
            "congest_rounds": self.congest_rounds,
            "mpc_rounds": self.mpc_rounds,
            "max_sent_words": self.max_sent_words,
            "max_recv_words": self.max_recv_words,
            "peak_machine_words": self.peak_machine_words,
            "peak_total_words": self.peak_total_words,
            "machines": self.machines,
            "audit_passed": self.audit_passed,
            "phases": [phase.to_json() for phase in self.phases],
        }


def collect_metrics(congest_rounds: int, clusters: Iterable[Cluster | None], phases=()) -> RunMetrics:
    metrics = RunMetrics(congest_rounds=congest_rounds, phases=list(phases))
    for cluster in clusters:
        if cluster is None:
            continue
        history = cluster.history
        metrics.mpc_rounds += len(history)
        metrics.max_sent_words = max([metrics.max_sent_words] + [m.max_sent_words for m in history])
        metrics.max_recv_words = max([metrics.max_recv_words] + [m.max_recv_words for m in history])
        metrics.peak_machine_words = max(
            [metrics.peak_machine_words] + [m.max_resident_words for m in history]
        )
        metrics.peak_total_words = max(
            [metrics.peak_total_words] + [m.total_resident_words for m in history]
        )
        metrics.machines = max(metrics.machines, cluster.peak_machines)
        metrics.audits.append(audit(history, cluster.config))
    return metrics
