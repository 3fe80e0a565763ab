import csv
import io
import json

import pytest

from mpclib.config import get_custom_config
from mpclib.constants import EXIT_AUDIT_FAILED
from mpclib.constants import EXIT_OK
from mpclib.constants import EXIT_VERIFICATION_FAILED
from mpclib.harness.bench import attach_floor
from mpclib.harness.bench import bench_exit_code
from mpclib.harness.bench import expand_grid
from mpclib.harness.bench import fit_phase_costs
from mpclib.harness.bench import round_trend
from mpclib.harness.bench import summary_row
from mpclib.harness.commands import cmd_gen
from mpclib.harness.commands import cmd_run
from mpclib.harness.commands import execute_run
from mpclib.harness.commands import exit_code
from mpclib.harness.commands import resolve_graph
from mpclib.harness.commands import safe_execute
from mpclib.harness.records import CSV_COLUMNS
from mpclib.harness.records import RunRecord
from mpclib.harness.records import write_csv


@pytest.fixture
def config(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    config = get_custom_config()
    config["mpc"]["words_override"] = 1024
    return config


def make_run(**kwargs):
    run = {
        "graph": "gnp:n=200,p=0.03,seed=1",
        "algorithm": "2rs",
        "engine": "congest",
        "seed": 1,
    }
    run.update(kwargs)
    return run


def test_record_json_and_row():
    record = RunRecord(
        config={"graph": "path5", "algorithm": "mis"},
        result={"set_size": 2, "independent": True, "dominated": True, "passed": True},
        metrics={"mpc_rounds": 4, "audit_passed": True},
    )
    assert RunRecord.from_json(json.loads(record.dumps())) == record
    row = record.row()
    assert row["passed"] is True
    assert row["mpc_rounds"] == 4
    assert row["seed"] is None
    assert "error" not in record.to_json()


def test_csv_columns_and_summary():
    records = [
        RunRecord(config={"graph": "path5", "seed": seed}, result={"passed": True})
        for seed in (1, 2)
    ]
    stream = io.StringIO()
    write_csv(stream, records, {"graph": "summary", "passed": True, "trend_beta": "n/a"})
    rows = list(csv.DictReader(io.StringIO(stream.getvalue())))
    assert len(rows) == 3
    assert list(rows[0])[:len(CSV_COLUMNS)] == list(CSV_COLUMNS)
    assert [row["seed"] for row in rows] == ["1", "2", ""]
    assert rows[2]["trend_beta"] == "n/a"


def test_execute_two_ruling_set(config):
    record = execute_run(make_run(), config)
    assert record.passed
    assert record.config["beta"] == 2
    assert record.config["schedule"] == "i"
    assert record.config["f"] is None
    assert record.result["independent"] and record.result["dominated"]
    assert record.metrics["mpc_rounds"] == 0
    assert record.metrics["words_per_machine"] == 1024
    assert exit_code(record) == EXIT_OK


@pytest.mark.parametrize("engine", ["mpc-v1", "mpc-v2"])
def test_execute_on_mpc_engine(config, engine):
    record = execute_run(make_run(algorithm="mis", engine=engine, force_ell=3), config)
    assert record.passed
    assert record.metrics["audit_passed"]
    assert record.metrics["mpc_rounds"] > 0
    modes = {phase["mode"] for phase in record.metrics["phases"] if phase["length"] > 1}
    # v2 steps a phase whenever some low-degree node has no covering center
    if engine == "mpc-v1":
        assert modes == {"gather"}
    else:
        assert modes and modes <= {"gather", "stepped"}


def test_execute_sparsify_echoes_f(config):
    record = execute_run(make_run(algorithm="sparsify", f=16), config)
    assert record.config["f"] == 16
    assert record.result["dominated"]


def test_input_linear_selects_schedule(config):
    record = execute_run(make_run(memory_mode="input-linear"), config)
    assert record.config["schedule"] == "ii"


def test_brs_auto_beta(config):
    record = execute_run(make_run(algorithm="brs", beta="auto"), config)
    assert record.config["beta"] == 2
    assert record.passed


def test_exit_codes():
    failed = RunRecord(config={}, result={"passed": False})
    assert exit_code(failed) == EXIT_VERIFICATION_FAILED
    unaudited = RunRecord(config={}, result={"passed": True}, metrics={"audit_passed": False})
    assert exit_code(unaudited) == EXIT_AUDIT_FAILED


def test_safe_execute_turns_errors_into_rows(config):
    record = safe_execute(make_run(graph="nope:n=40"), config)
    assert not record.passed
    assert record.error.startswith("GraphParameterError")
    assert record.config["graph"] == "nope:n=40"
    assert record.row()["error"] == record.error


def test_safe_execute_loads_graphs(config):
    graphs = {}
    record = safe_execute(make_run(graph="nope:n=40"), config, graphs=graphs)
    assert record.error.startswith("GraphParameterError")
    assert graphs == {}
    record = safe_execute(make_run(graph="path:n=7"), config, graphs=graphs)
    assert record.passed
    assert graphs["path:n=7"].n == 7


def test_cmd_gen_and_run(config, tmp_path, capsys):
    config["gen"] = {"model": "path", "params": {"n": 7}, "seed": 0, "out": "graphs/p7.txt"}
    assert cmd_gen(config) == EXIT_OK
    graph = resolve_graph("graphs/p7.txt")
    assert (graph.n, graph.m) == (7, 6)

    config["run"] = make_run(graph="graphs/p7.txt", output="out/record.json")
    assert cmd_run(config) == EXIT_OK
    with open(tmp_path / "out" / "record.json") as fp:
        document = json.load(fp)
    assert document["config"]["graph"] == "graphs/p7.txt"
    assert document["result"]["passed"]

    config["run"] = make_run(graph="path5", algorithm="luby")
    assert cmd_run(config) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["config"]["algorithm"] == "luby"


def test_expand_grid_order():
    runs = expand_grid({
        "graphs": ["path5", "path7"],
        "algorithms": ["2rs", "brs"],
        "engines": ["congest"],
        "betas": [2, 3],
        "seeds": [1, 2],
    })
    assert len(runs) == 2 * (2 + 2 * 2)
    assert [(r["algorithm"], r["beta"], r["seed"]) for r in runs[:6]] == [
        ("2rs", None, 1), ("2rs", None, 2),
        ("brs", 2, 1), ("brs", 2, 2), ("brs", 3, 1), ("brs", 3, 2),
    ]
    assert runs[6]["graph"] == "path7"


def _gather_record(phases, epsilon=0.5):
    return RunRecord(
        config={"epsilon": epsilon},
        metrics={"phases": [
            {"mode": "gather", "length": length, "mpc_rounds": rounds}
            for length, rounds in phases
        ]},
    )


def test_fit_phase_costs():
    # rounds = 3 * (ceil(log2 ell) + 1) + 2 * ceil(1 / eps)
    record = _gather_record([(1, 7), (2, 10), (4, 13), (8, 16)])
    fit = fit_phase_costs([record])
    assert fit.c_g == pytest.approx(3, abs=1e-6)
    assert fit.c_a == pytest.approx(2, abs=1e-6)
    assert fit.violations == 0
    assert fit.predict(4, 0.5) == pytest.approx(13)
    assert fit_phase_costs([RunRecord(config={})]) is None


def test_round_trend():
    def record(beta, rounds, seed=1):
        return RunRecord(
            config={"graph": "g", "algorithm": "brs", "engine": "mpc-v1", "seed": seed, "beta": beta},
            metrics={"mpc_rounds": rounds},
        )

    falling = [record(2, 30), record(3, 20), record(4, 20)]
    assert round_trend(falling, "beta") == "non-increasing"
    assert round_trend(falling + [record(2, 10, 2), record(3, 12, 2)], "beta") == "mixed"
    assert round_trend(falling, "force_ell") == "n/a"
    row = summary_row(falling)
    assert row["graph"] == "summary"
    assert row["fit_c_g"] is None


def test_fit_outliers_fail_the_bench():
    records = [
        RunRecord(
            config={"epsilon": 0.5},
            result={"passed": True},
            metrics={"phases": [
                {"mode": "gather", "length": 2, "mpc_rounds": rounds}
                for rounds in (10, 10, 10, 10, 60)
            ]},
        )
    ]
    # Every phase predicts the mean, 20; only 60 exceeds twice that
    assert fit_phase_costs(records).violations == 1
    summary = summary_row(records)
    assert summary["fit_violations"] == 1
    assert bench_exit_code(records, summary) == EXIT_AUDIT_FAILED
    records[0].metrics["phases"][-1]["mpc_rounds"] = 10
    assert bench_exit_code(records, summary_row(records)) == EXIT_OK


def test_floor_against_stepped_rounds(config):
    def run(engine, force_ell):
        return {"graph": "g", "algorithm": "shatter", "engine": engine, "seed": 1, "force_ell": force_ell}

    gather = [{"mode": "gather", "length": 2, "mpc_rounds": 5}]
    runs = [run("mpc-v1", 1), run("mpc-v1", 3), run("mpc-v1", 2), run("congest", None)]
    records = [
        RunRecord(config=r, result={"passed": True}, metrics=metrics)
        for r, metrics in zip(runs, [
            {"mpc_rounds": 40, "phases": []},
            {"mpc_rounds": 50, "phases": gather},
            {"mpc_rounds": 30, "phases": gather},
            {"mpc_rounds": 0},
        ])
    ]
    assert attach_floor(runs, records, config) == 1
    assert [r.metrics.get("stepped_mpc_rounds") for r in records] == [40, 40, 40, None]
    assert [r.metrics.get("floor_breach") for r in records] == [False, True, False, None]
    assert summary_row(records)["floor_breaches"] == 1
    assert records[1].row()["floor_breach"] is True


def test_floor_runs_missing_baselines(config):
    run = make_run(graph="path:n=60", algorithm="shatter", engine="mpc-v1", force_ell=3)
    records = [safe_execute(run, config)]
    assert any(phase["mode"] == "gather" for phase in records[0].metrics["phases"])
    attach_floor([run], records, config, graphs={})
    assert records[0].metrics["stepped_mpc_rounds"] > 0
    assert records[0].metrics["floor_breach"] == (
        records[0].metrics["mpc_rounds"] > records[0].metrics["stepped_mpc_rounds"]
    )
