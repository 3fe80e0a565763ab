from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from mpclib.algorithms.common import RunMetrics
from mpclib.algorithms.common import collect_metrics
from mpclib.algorithms.common import is_mpc
from mpclib.algorithms.common import resolve_engine
from mpclib.algorithms.finish import finish_off
from mpclib.algorithms.luby import luby_mis
from mpclib.algorithms.schedules import f_schedule
from mpclib.algorithms.schedules import schedule_for_memory
from mpclib.algorithms.shatter import shatter
from mpclib.algorithms.sparsify import deg_ordered_sparsify
from mpclib.congest.engine import check_state_congested
from mpclib.constants import DEFAULT_KAPPA
from mpclib.constants import DEFAULT_MESSAGE_WORDS
from mpclib.constants import ENGINE_CONGEST
from mpclib.graph.graph import induced_subgraph
from mpclib.graph.graph import lift_nodes
from mpclib.logger import log
from mpclib.utils.config_ops import digest_config
from mpclib.verify import ComponentReport
from mpclib.verify import Verdict
from mpclib.verify import component_report
from mpclib.verify import verify_degree_bound
from mpclib.verify import verify_domination
from mpclib.verify import verify_independent

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph
    from mpclib.mpc.machines import MachineConfig
    from mpclib.randomness import RandomTape

__all__ = [
    "StageReport",
    "RulingSetResult",
    "Pipeline",
    "maximal_independent_set",
    "two_ruling_set",
    "beta_ruling_set",
]


@dataclass
class StageReport:
    stage: int
    kind: str
    nodes: int
    max_degree: int
    chosen: int
    congest_rounds: int = 0
    mpc_rounds: int = 0
    f: float | None = None
    verdicts: list[Verdict] = field(default_factory=list)
    components: ComponentReport | None = None

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "kind": self.kind,
            "nodes": self.nodes,
            "max_degree": self.max_degree,
            "chosen": self.chosen,
            "congest_rounds": self.congest_rounds,
            "mpc_rounds": self.mpc_rounds,
            "f": self.f,
            "verdicts": [verdict.to_json() for verdict in self.verdicts],
            "components": self.components.to_json() if self.components else None,
        }


@dataclass
class RulingSetResult:
    algorithm: str
    chosen: frozenset[int]
    beta: int
    # S_1, ..., S_{beta-1} of the sparsification stages
    stage_sets: list[frozenset[int]]
    verdicts: list[Verdict]
    stages: list[StageReport]
    metrics: RunMetrics

    @property
    def passed(self) -> bool:
        return all(verdict.passed for verdict in self.verdicts if verdict.hard)

    def verdict(self, name: str) -> Verdict | None:
        for verdict in self.verdicts:
            if verdict.name == name:
                return verdict
        return None

    @property
    def independent(self) -> bool | None:
        verdict = self.verdict("independent")
        return verdict.passed if verdict else None

    @property
    def dominated(self) -> bool | None:
        for verdict in self.verdicts:
            if verdict.name.startswith("dominated"):
                return verdict.passed
        return None

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "set_size": len(self.chosen),
            "independent": self.independent,
            "dominated": self.dominated,
            "beta": self.beta,
            "verdicts": [verdict.to_json() for verdict in self.verdicts],
            "stage_sizes": [len(nodes) for nodes in self.stage_sets],
            "stages": [stage.to_json() for stage in self.stages],
        }


class Pipeline(object):
    """
    Runs the composed algorithms on one input graph. Every stage works
    on an induced subgraph, is executed by the chosen engine with a tape
    derived from the pipeline's tape, and is charged to its own cluster
    built with the machine model of the whole input.
    """
    CONFIG = {
        "engine": ENGINE_CONGEST,
        "c": 3,
        "min_f": 4,
        "delta": 1,
        "iteration_factor": 4,
        "shatter_iterations": None,
        "luby_iterations": None,
        "force_ell": None,
        "kappa": DEFAULT_KAPPA,
        "message_words": DEFAULT_MESSAGE_WORDS,
        "show_progress": False,
    }

    def __init__(self, graph: Graph, tape: RandomTape, machine_config: MachineConfig, **kwargs):
        digest_config(self, kwargs)
        self.engine = resolve_engine(self.engine)
        self.graph = graph
        self.tape = tape
        self.machine_config = machine_config
        self.stages: list[StageReport] = []
        self.clusters: list = []
        self.phases: list = []
        self.congest_rounds = 0

    def _charge(self, run) -> None:
        self.congest_rounds += run.congest_rounds
        self.clusters.append(run.cluster)
        self.phases.extend(run.phases)

    def _congestion(self, run, graph: Graph) -> list[Verdict]:
        """State-congestion of a CONGEST-engine run, as a soft verdict."""
        if run.trace is None:
            return []
        report = check_state_congested(run.trace, graph, self.kappa)
        return [Verdict(
            "state_congested", report.passed,
            witness=None if report.passed else report.worst_node,
            measured=report.worst_bits, bound=report.budget_bits, hard=False,
        )]

    def sparsify(self, nodes: frozenset[int], f: float, stage: int) -> frozenset[int]:
        sub, mapping = induced_subgraph(self.graph, nodes)
        if sub.n == 0:
            return frozenset()
        result = deg_ordered_sparsify(
            sub, f, self.c, self.engine, self.tape.derive(f"sparsify{stage}"),
            self.machine_config, self.force_ell, self.min_f, self.show_progress,
            self.message_words,
        )
        self._charge(result.run)
        self.stages.append(StageReport(
            stage=stage,
            kind="sparsify",
            nodes=sub.n,
            max_degree=sub.max_degree,
            chosen=len(result.chosen),
            congest_rounds=result.run.congest_rounds,
            mpc_rounds=result.run.mpc_rounds,
            f=result.f,
            verdicts=[
                verify_domination(sub, result.chosen, 1),
                verify_degree_bound(sub, result.chosen, result.f, self.c, self.tape.n),
            ] + self._congestion(result.run, sub),
        ))
        return lift_nodes(mapping, result.chosen)

    def shatter(self, nodes: frozenset[int], stage: int) -> tuple[frozenset[int], frozenset[int]]:
        """Independent set and residual of shattering G[nodes], in the ids of the input graph."""
        sub, mapping = induced_subgraph(self.graph, nodes)
        if sub.n == 0:
            return frozenset(), frozenset()
        result = shatter(
            sub, self.engine, self.tape.derive(f"shatter{stage}"), self.machine_config,
            delta=self.delta,
            iteration_factor=self.iteration_factor,
            iterations=self.shatter_iterations,
            force_ell=self.force_ell,
            show_progress=self.show_progress,
            message_words=self.message_words,
        )
        self._charge(result.run)
        report = component_report(sub, result.residual)
        fits = Verdict(
            "residual_fits",
            report.largest_words <= self.machine_config.words,
            measured=report.largest_words,
            bound=self.machine_config.words,
            hard=is_mpc(self.engine),
        )
        self.stages.append(StageReport(
            stage=stage,
            kind="shatter",
            nodes=sub.n,
            max_degree=sub.max_degree,
            chosen=len(result.independent),
            congest_rounds=result.run.congest_rounds,
            mpc_rounds=result.run.mpc_rounds,
            verdicts=[verify_independent(sub, result.independent), fits] + self._congestion(result.run, sub),
            components=report,
        ))
        return lift_nodes(mapping, result.independent), lift_nodes(mapping, result.residual)

    def mis(self, nodes: frozenset[int], stage: int) -> frozenset[int]:
        """Shatter followed by finish-off on G[nodes]."""
        independent, residual = self.shatter(nodes, stage)
        finished = finish_off(
            self.graph, residual, self.machine_config, simulate=is_mpc(self.engine),
        )
        self.clusters.append(finished.cluster)
        self.stages.append(StageReport(
            stage=stage,
            kind="finish_off",
            nodes=len(residual),
            max_degree=max((self.graph.degree(v) for v in residual), default=0),
            chosen=len(finished.chosen),
            mpc_rounds=finished.mpc_rounds,
        ))
        return independent | finished.chosen

    def result(self, algorithm: str, chosen, beta: int, stage_sets, verdicts) -> RulingSetResult:
        metrics = collect_metrics(self.congest_rounds, self.clusters, self.phases)
        result = RulingSetResult(
            algorithm=algorithm,
            chosen=frozenset(chosen),
            beta=beta,
            stage_sets=list(stage_sets),
            verdicts=list(verdicts),
            stages=list(self.stages),
            metrics=metrics,
        )
        for verdict in result.verdicts:
            if not verdict.passed:
                level = log.error if verdict.hard else log.warning
                level(f"{algorithm}: check {verdict.name} failed (witness {verdict.witness})")
        return result

    def run_mis(self) -> RulingSetResult:
        nodes = frozenset(range(self.graph.n))
        chosen = self.mis(nodes, 1)
        return self.result("mis", chosen, 1, [], [
            verify_independent(self.graph, chosen),
            verify_domination(self.graph, chosen, 1),
        ])

    def run_ruling_set(self, beta: int, schedule: str, algorithm: str = "brs") -> RulingSetResult:
        current = frozenset(range(self.graph.n))
        stage_sets = []
        fs = f_schedule(self.graph.max_degree, beta, schedule)
        log.info(
            f"{algorithm}: beta={beta}, schedule {schedule}, "
            f"f = {', '.join(f'{f:.3g}' for f in fs)}"
        )
        for stage, f in enumerate(fs, start=1):
            current = self.sparsify(current, f, stage)
            stage_sets.append(current)
        chosen = self.mis(current, beta)
        return self.result(algorithm, chosen, beta, stage_sets, [
            verify_independent(self.graph, chosen),
            verify_domination(self.graph, chosen, beta),
        ])

    def run_luby(self) -> RulingSetResult:
        result = luby_mis(
            self.graph, self.engine, self.tape, self.machine_config,
            max_iterations=self.luby_iterations,
            force_ell=self.force_ell,
            show_progress=self.show_progress,
            message_words=self.message_words,
        )
        self._charge(result.run)
        return self.result("luby", result.independent, 1, [], [
            verify_independent(self.graph, result.independent),
            verify_domination(self.graph, result.independent, 1),
        ])

    def run_sparsify(self, f: float) -> RulingSetResult:
        chosen = self.sparsify(frozenset(range(self.graph.n)), f, 1)
        used = self.stages[-1].f if self.stages else f
        return self.result("sparsify", chosen, 1, [chosen], [
            verify_domination(self.graph, chosen, 1),
            verify_degree_bound(self.graph, chosen, used, self.c, self.tape.n),
        ])

    def run_shatter(self) -> RulingSetResult:
        """Shatter alone: reports I and how the residual breaks apart, without finishing it."""
        independent, _ = self.shatter(frozenset(range(self.graph.n)), 1)
        return self.result("shatter", independent, 1, [], self.stages[-1].verdicts)


def maximal_independent_set(graph: Graph, tape: RandomTape, machine_config: MachineConfig, **kwargs: Any) -> RulingSetResult:
    return Pipeline(graph, tape, machine_config, **kwargs).run_mis()


def two_ruling_set(
    graph: Graph,
    tape: RandomTape,
    machine_config: MachineConfig,
    memory_mode: str | None = None,
    **kwargs: Any,
) -> RulingSetResult:
    """
    Sparsify with f = 2^((log2 Delta)^(2/3)), or 2^((log2 Delta)^(1/2))
    when total memory is input-linear, then compute an MIS of the
    sampled set.
    """
    schedule = schedule_for_memory(memory_mode or machine_config.memory_mode)
    return Pipeline(graph, tape, machine_config, **kwargs).run_ruling_set(2, schedule, "2rs")


def beta_ruling_set(
    graph: Graph,
    beta: int,
    tape: RandomTape,
    machine_config: MachineConfig,
    schedule: str | None = None,
    **kwargs: Any,
) -> RulingSetResult:
    if schedule is None:
        schedule = schedule_for_memory(machine_config.memory_mode)
    return Pipeline(graph, tape, machine_config, **kwargs).run_ruling_set(beta, schedule)
