from __future__ import annotations

import os
import sys
import time
from typing import Any

from mpclib.algorithms.ruling_sets import Pipeline
from mpclib.algorithms.schedules import auto_beta
from mpclib.algorithms.schedules import predicted_rounds
from mpclib.algorithms.schedules import schedule_for_memory
from mpclib.constants import EXIT_AUDIT_FAILED
from mpclib.constants import EXIT_OK
from mpclib.constants import EXIT_VERIFICATION_FAILED
from mpclib.errors import MpcLibError
from mpclib.graph.generators import gen_graph
from mpclib.graph.generators import parse_graph_descriptor
from mpclib.graph.graph_io import format_edge_list
from mpclib.graph.graph_io import load_graph
from mpclib.graph.graph_io import save_graph
from mpclib.harness.records import RunRecord
from mpclib.logger import log
from mpclib.mpc.machines import MachineConfig
from mpclib.randomness import RandomTape
from mpclib.utils.file_ops import guarantee_parent

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mpclib.graph.graph import Graph

__all__ = [
    "resolve_graph",
    "execute_run",
    "exit_code",
    "cmd_gen",
    "cmd_run",
    "safe_execute",
]


def resolve_graph(descriptor: str) -> Graph:
    """An edge-list file if the path exists, otherwise a generator descriptor."""
    if os.path.exists(descriptor):
        return load_graph(descriptor)
    model, params, seed = parse_graph_descriptor(descriptor)
    return gen_graph(model, params, seed)


def _beta_for(run: dict, graph: Graph) -> int | None:
    beta = run.get("beta")
    if run["algorithm"] == "2rs":
        return 2
    if run["algorithm"] != "brs":
        return None
    if beta in (None, "auto"):
        return auto_beta(graph.max_degree)
    return int(beta)


def execute_run(run: dict[str, Any], config: dict[str, Any], graph: Graph | None = None) -> RunRecord:
    """
    Runs one algorithm on one graph. `run` names the graph, algorithm,
    engine, seed and per-run overrides; `config` supplies the layered
    defaults for every other parameter.
    """
    if graph is None:
        graph = resolve_graph(run["graph"])
    algorithm = run["algorithm"]
    mpc = dict(config["mpc"])
    if run.get("epsilon") is not None:
        mpc["epsilon"] = run["epsilon"]
    if run.get("memory_mode") is not None:
        mpc["memory_mode"] = run["memory_mode"]
    machine_config = MachineConfig(graph.n, graph.m, **mpc)
    tape = RandomTape(run["seed"], graph.n, **config["tape"])

    sparsify = dict(config["sparsify"])
    shatter = dict(config["shatter"])
    c = run.get("c") if run.get("c") is not None else sparsify["c"]
    delta = run.get("delta") if run.get("delta") is not None else shatter["delta"]
    f = run.get("f") if run.get("f") is not None else sparsify["f"]
    beta = _beta_for(run, graph)
    schedule = None
    if algorithm in ("2rs", "brs"):
        schedule = run.get("schedule") or config["ruling_set"].get("schedule")
        if algorithm == "2rs" or not schedule:
            schedule = schedule_for_memory(machine_config.memory_mode)

    echo = {
        "graph": run["graph"],
        "n": graph.n,
        "m": graph.m,
        "max_degree": graph.max_degree,
        "algorithm": algorithm,
        "engine": run["engine"],
        "beta": beta,
        "schedule": schedule,
        "epsilon": machine_config.epsilon,
        "memory_mode": machine_config.memory_mode,
        "seed": run["seed"],
        "f": f if algorithm == "sparsify" else None,
        "c": c,
        "delta": delta,
        "force_ell": run.get("force_ell"),
    }
    pipeline = Pipeline(
        graph, tape, machine_config,
        engine=run["engine"],
        c=c,
        min_f=sparsify["min_f"],
        delta=delta,
        iteration_factor=shatter["iteration_factor"],
        shatter_iterations=shatter.get("iterations"),
        luby_iterations=config["luby"].get("max_iterations"),
        force_ell=run.get("force_ell"),
        kappa=config["congest"]["kappa"],
        message_words=config["congest"]["message_words"],
        show_progress=config.get("show_progress", False),
    )

    start = time.perf_counter()
    if algorithm == "mis":
        result = pipeline.run_mis()
    elif algorithm == "luby":
        result = pipeline.run_luby()
    elif algorithm == "sparsify":
        result = pipeline.run_sparsify(f)
    elif algorithm == "shatter":
        result = pipeline.run_shatter()
    else:
        result = pipeline.run_ruling_set(beta, schedule, algorithm)
    wall_seconds = time.perf_counter() - start

    outcome = result.to_json()
    outcome["passed"] = result.passed
    metrics = result.metrics.to_json()
    metrics.update({
        "words_per_machine": machine_config.words,
        "total_budget": machine_config.total_budget,
        "audits": [report.to_json() for report in result.metrics.audits],
        "predicted_rounds": predicted_rounds(
            algorithm, graph.max_degree, beta or 2, schedule or schedule_for_memory(machine_config.memory_mode),
        ),
        "wall_seconds": round(wall_seconds, 6),
    })
    return RunRecord(config=echo, result=outcome, metrics=metrics)


def exit_code(record: RunRecord) -> int:
    if not record.passed:
        return EXIT_VERIFICATION_FAILED
    if not record.audit_passed:
        return EXIT_AUDIT_FAILED
    return EXIT_OK


def cmd_gen(config: dict[str, Any]) -> int:
    gen = config["gen"]
    graph = gen_graph(gen["model"], gen["params"], gen["seed"])
    if gen.get("out"):
        save_graph(graph, guarantee_parent(gen["out"]))
        log.info(f"wrote {gen['model']} graph with n={graph.n}, m={graph.m} to {gen['out']}")
    else:
        sys.stdout.write(format_edge_list(graph))
    return EXIT_OK


def cmd_run(config: dict[str, Any]) -> int:
    run = config["run"]
    record = execute_run(run, config)
    document = record.dumps()
    if run.get("output"):
        with open(guarantee_parent(run["output"]), "w") as file:
            file.write(document + "\n")
    else:
        sys.stdout.write(document + "\n")
    code = exit_code(record)
    if code == EXIT_VERIFICATION_FAILED:
        log.error(f"{run['algorithm']} on {run['graph']}: verification failed")
    elif code == EXIT_AUDIT_FAILED:
        failed = next(report for report in record.metrics["audits"] if not report["passed"])
        log.error(f"resource audit failed in MPC round {failed['first_offending_round']}: {failed['reason']}")
    return code


def safe_execute(
    run: dict[str, Any],
    config: dict[str, Any],
    graph: Graph | None = None,
    graphs: dict[str, Graph] | None = None,
) -> RunRecord:
    """
    execute_run for grids: library errors, graph loading included,
    become a failed row instead of aborting the sweep. Graphs loaded
    here are kept in `graphs` by descriptor.
    """
    try:
        if graph is None and graphs is not None:
            if run["graph"] not in graphs:
                graphs[run["graph"]] = resolve_graph(run["graph"])
            graph = graphs[run["graph"]]
        return execute_run(run, config, graph)
    except MpcLibError as err:
        log.warning(f"run {run} failed: {err}")
        echo = {key: run.get(key) for key in ("graph", "algorithm", "engine", "seed", "beta", "force_ell")}
        return RunRecord(config=echo, error=f"{type(err).__name__}: {err}")
