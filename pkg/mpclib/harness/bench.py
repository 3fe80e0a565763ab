from __future__ import annotations

import itertools as it
import math
import sys
from typing import Any, Iterable, Sequence

import numpy as np
from rich.console import Console
from rich.table import Table
from scipy.optimize import nnls
from tqdm import tqdm as ProgressDisplay

from mpclib.constants import ENGINE_ALIASES
from mpclib.constants import ENGINE_CONGEST
from mpclib.constants import EXIT_AUDIT_FAILED
from mpclib.constants import EXIT_OK
from mpclib.constants import EXIT_VERIFICATION_FAILED
from mpclib.harness.commands import safe_execute
from mpclib.harness.records import RunRecord
from mpclib.harness.records import write_csv
from mpclib.logger import log
from mpclib.utils.file_ops import guarantee_parent
from mpclib.utils.simple_functions import ceil_log2

__all__ = [
    "expand_grid",
    "PhaseCostFit",
    "fit_phase_costs",
    "attach_floor",
    "round_trend",
    "summary_row",
    "print_summary",
    "bench_exit_code",
    "cmd_bench",
]

TREND_NON_INCREASING = "non-increasing"
TREND_MIXED = "mixed"
TREND_NONE = "n/a"


def expand_grid(bench: dict[str, Any]) -> list[dict[str, Any]]:
    """
    One run description per grid point, in grid order: graphs, then
    algorithms, engines, betas, force_ells and finally seeds. Betas
    only vary the generic ruling set.
    """
    runs = []
    for graph, algorithm, engine in it.product(
        bench.get("graphs") or [],
        bench.get("algorithms") or [],
        bench.get("engines") or [],
    ):
        betas = (bench.get("betas") or [None]) if algorithm == "brs" else [None]
        for beta, force_ell, seed in it.product(
            betas,
            bench.get("force_ells") or [None],
            bench.get("seeds") or [],
        ):
            runs.append({
                "graph": graph,
                "algorithm": algorithm,
                "engine": engine,
                "beta": beta,
                "force_ell": force_ell,
                "seed": seed,
                "epsilon": bench.get("epsilon"),
                "memory_mode": bench.get("memory_mode"),
            })
    return runs


class PhaseCostFit(object):
    """
    Non-negative least squares fit of the MPC rounds of every gathered
    phase against c_g * (ceil(log2 ell) + 1) + c_a * ceil(1 / eps).
    """

    def __init__(self, c_g: float, c_a: float, phases: int, violations: int):
        self.c_g = c_g
        self.c_a = c_a
        self.phases = phases
        self.violations = violations

    def predict(self, length: int, epsilon: float) -> float:
        return self.c_g * (ceil_log2(length) + 1) + self.c_a * math.ceil(1 / epsilon)

    def to_json(self) -> dict:
        return {
            "fit_c_g": round(self.c_g, 4),
            "fit_c_a": round(self.c_a, 4),
            "fit_phases": self.phases,
            "fit_violations": self.violations,
        }


def fit_phase_costs(records: Iterable[RunRecord]) -> PhaseCostFit | None:
    """Fits every gathered phase; phases above twice the fit are counted as violations and fail the bench."""
    rows, targets = [], []
    for record in records:
        epsilon = record.config.get("epsilon")
        for phase in record.metrics.get("phases", ()):
            if phase["mode"] != "gather":
                continue
            rows.append([ceil_log2(phase["length"]) + 1, math.ceil(1 / epsilon)])
            targets.append(phase["mpc_rounds"])
    if not rows:
        return None
    A = np.array(rows, dtype=np.float64)
    b = np.array(targets, dtype=np.float64)
    (c_g, c_a), _ = nnls(A, b)
    # Phases costing more than twice the fit
    violations = int(np.sum(b > 2 * (A @ np.array([c_g, c_a])) + 1e-9))
    if violations:
        log.warning(f"{violations} of {len(b)} gathered phases exceed twice the fitted cost")
    return PhaseCostFit(float(c_g), float(c_a), len(b), violations)


def _floor_key(run: dict[str, Any]) -> tuple:
    return tuple(
        run.get(name)
        for name in ("graph", "algorithm", "engine", "seed", "beta", "epsilon", "memory_mode")
    )


def attach_floor(
    runs: Sequence[dict[str, Any]],
    records: Sequence[RunRecord],
    config: dict[str, Any],
    graphs: dict[str, Any] | None = None,
) -> int:
    """
    Adds stepped_mpc_rounds and floor_breach to every compressed run:
    the MPC rounds of the same run at force_ell = 1, where nothing is
    gathered, and whether compression needed more than that. Baselines
    come from the grid when it holds them and are run otherwise.
    Returns the number of breaches.
    """
    baselines: dict[tuple, int | None] = {}
    for run, record in zip(runs, records):
        if run.get("force_ell") == 1 and record.error is None:
            baselines[_floor_key(run)] = record.metrics.get("mpc_rounds")
    breaches = 0
    for run, record in zip(runs, records):
        if record.error is not None or ENGINE_ALIASES.get(run["engine"], run["engine"]) == ENGINE_CONGEST:
            continue
        if not any(phase["mode"] == "gather" for phase in record.metrics.get("phases", ())):
            stepped = record.metrics.get("mpc_rounds")
        else:
            key = _floor_key(run)
            if key not in baselines:
                baseline = safe_execute({**run, "force_ell": 1}, config, graphs=graphs)
                baselines[key] = baseline.metrics.get("mpc_rounds") if baseline.error is None else None
            stepped = baselines[key]
        breach = stepped is not None and record.metrics["mpc_rounds"] > stepped
        record.metrics["stepped_mpc_rounds"] = stepped
        record.metrics["floor_breach"] = breach
        breaches += breach
    if breaches:
        log.warning(f"{breaches} compressed runs used more MPC rounds than stepping every round")
    return breaches


def _trend(values: Sequence[float]) -> str:
    if len(values) < 2:
        return TREND_NONE
    pairs = zip(values, values[1:])
    return TREND_NON_INCREASING if all(b <= a for a, b in pairs) else TREND_MIXED


def round_trend(records: Sequence[RunRecord], axis: str) -> str:
    """
    Whether MPC rounds never grow along `axis` (beta or force_ell) when
    everything else is held fixed. Reported, never asserted.
    """
    groups: dict[tuple, list[tuple[Any, int]]] = {}
    for record in records:
        if record.error is not None or record.config.get(axis) is None:
            continue
        key = tuple(
            record.config.get(name)
            for name in ("graph", "algorithm", "engine", "seed", "beta", "force_ell")
            if name != axis
        )
        groups.setdefault(key, []).append((record.config[axis], record.metrics["mpc_rounds"]))
    trends = [
        _trend([rounds for _, rounds in sorted(points)])
        for points in groups.values()
    ]
    trends = [trend for trend in trends if trend != TREND_NONE]
    if not trends:
        return TREND_NONE
    return TREND_NON_INCREASING if all(t == TREND_NON_INCREASING for t in trends) else TREND_MIXED


def summary_row(records: Sequence[RunRecord]) -> dict[str, Any]:
    fit = fit_phase_costs(records)
    row: dict[str, Any] = {"graph": "summary", "passed": all(r.passed for r in records)}
    row.update(fit.to_json() if fit else {"fit_c_g": None, "fit_c_a": None})
    row["floor_breaches"] = sum(bool(r.metrics.get("floor_breach")) for r in records)
    row["trend_beta"] = round_trend(records, "beta")
    row["trend_force_ell"] = round_trend(records, "force_ell")
    return row


def print_summary(records: Sequence[RunRecord], console: Console | None = None) -> None:
    console = console or Console(stderr=True)
    table = Table(title="benchmark summary")
    for column in ("algorithm", "engine", "beta", "runs", "passed", "congest rounds", "mpc rounds", "stepped floor", "predicted"):
        table.add_column(column, justify="right" if column not in ("algorithm", "engine") else "left")
    groups: dict[tuple, list[RunRecord]] = {}
    for record in records:
        key = (record.config.get("algorithm"), record.config.get("engine"), record.config.get("beta"))
        groups.setdefault(key, []).append(record)
    for (algorithm, engine, beta), group in groups.items():
        done = [r for r in group if r.error is None]

        def mean(key: str) -> str:
            values = [r.metrics[key] for r in done if r.metrics.get(key) is not None]
            return f"{np.mean(values):.1f}" if values else "-"

        table.add_row(
            str(algorithm), str(engine), str(beta if beta is not None else "-"),
            str(len(group)), str(sum(r.passed for r in group)),
            mean("congest_rounds"), mean("mpc_rounds"), mean("stepped_mpc_rounds"), mean("predicted_rounds"),
        )
    console.print(table)


def cmd_bench(config: dict[str, Any]) -> int:
    bench = config["bench"]
    runs = expand_grid(bench)
    graphs: dict[str, Any] = {}
    records = []
    for run in ProgressDisplay(runs, desc="bench", leave=False, disable=not config.get("show_progress")):
        records.append(safe_execute(run, config, graphs=graphs))
    attach_floor(runs, records, config, graphs)

    summary = summary_row(records) if records else None
    if bench.get("output"):
        with open(guarantee_parent(bench["output"]), "w", newline="") as file:
            write_csv(file, records, summary)
        log.info(f"wrote {len(records)} rows to {bench['output']}")
    else:
        write_csv(sys.stdout, records, summary)
    if records:
        print_summary(records)
    return bench_exit_code(records, summary)


def bench_exit_code(records: Sequence[RunRecord], summary: dict[str, Any] | None) -> int:
    if not all(record.passed for record in records):
        log.error(f"{sum(not r.passed for r in records)} of {len(records)} runs failed")
        return EXIT_VERIFICATION_FAILED
    if not all(record.audit_passed for record in records):
        log.error("resource audit failed in at least one run")
        return EXIT_AUDIT_FAILED
    if summary and summary.get("fit_violations"):
        log.error(
            f"{summary['fit_violations']} gathered phases cost more than twice the fitted "
            f"c_g (log2 ell + 1) + c_a ceil(1 / eps)"
        )
        return EXIT_AUDIT_FAILED
    return EXIT_OK
