from __future__ import annotations

import argparse
import importlib
import inspect
import os
import sys
from typing import Any

import yaml

from mpclib.constants import ALGORITHMS
from mpclib.constants import ENGINE_ALIASES
from mpclib.constants import ENGINE_CONGEST
from mpclib.constants import ENGINES
from mpclib.constants import GRAPH_MODELS
from mpclib.constants import MEMORY_MODES
from mpclib.constants import SCHEDULES
from mpclib.errors import UsageError
from mpclib.logger import log
from mpclib.utils.config_ops import merge_dicts_recursively


__config_file__ = "custom_config.yml"

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
GRAPH_PARAMS = ("n", "p", "d", "k", "size")


def _add_common(parser: argparse.ArgumentParser, default: Any = None) -> None:
    # Subcommands suppress their defaults so flags given before the subcommand survive
    parser.add_argument(
        "--config_file",
        default=default,
        help="Path to the custom configuration file",
    )
    parser.add_argument(
        "--log-level",
        choices=LOG_LEVELS,
        default=default,
        help="Level of messages to display",
    )


def _add_machine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--epsilon",
        type=float,
        help="Machines hold n^epsilon words, 0 < epsilon < 1",
    )
    parser.add_argument(
        "--memory",
        choices=MEMORY_MODES,
        help="Total memory regime of the cluster",
    )
    parser.add_argument(
        "--progress",
        action="store_true",
        help="Show progress bars",
    )


def parse_cli(argv: list[str] | None = None) -> argparse.Namespace:
    try:
        parser = argparse.ArgumentParser(
            prog="mpcsim",
            description="Round compression and ruling sets on a simulated low-memory MPC cluster",
        )
        _add_common(parser)
        parser.add_argument(
            "-v", "--version",
            action="store_true",
            help="Display the version of mpcsim",
        )
        subparsers = parser.add_subparsers(dest="command")

        gen = subparsers.add_parser("gen", help="Generate a graph as an edge list")
        _add_common(gen, argparse.SUPPRESS)
        gen.add_argument("--model", required=True, choices=GRAPH_MODELS)
        gen.add_argument("--n", type=int, help="Number of nodes")
        gen.add_argument("--p", type=float, help="Edge probability of gnp")
        gen.add_argument("--d", type=int, help="Degree of random_regular")
        gen.add_argument("--k", type=int, help="Number of disjoint cliques")
        gen.add_argument("--size", type=int, help="Size of each disjoint clique")
        gen.add_argument("--seed", type=int, default=0)
        gen.add_argument("--out", help="Edge list file; stdout if omitted")

        run = subparsers.add_parser("run", help="Run one algorithm and verify its output")
        _add_common(run, argparse.SUPPRESS)
        run.add_argument(
            "--graph", required=True,
            help="Edge list file, or a descriptor like \"gnp:n=1000,p=0.01,seed=3\" or \"path5\"",
        )
        run.add_argument("--algo", default="2rs", choices=ALGORITHMS)
        run.add_argument(
            "--beta",
            help="Ruling distance of brs, an integer >= 2 or \"auto\"",
        )
        run.add_argument("--schedule", choices=SCHEDULES)
        run.add_argument(
            "--engine", default=ENGINE_CONGEST,
            choices=ENGINES + tuple(ENGINE_ALIASES),
        )
        run.add_argument("--seed", type=int, default=0, help="Master seed of the random tape")
        run.add_argument("--f", type=float, help="Sparsification parameter of --algo sparsify")
        run.add_argument(
            "--force-ell", type=int,
            help="Use this phase length for every gathered phase",
        )
        run.add_argument("--c", type=float, help="Sparsification constant")
        run.add_argument("--delta", type=float, help="Shatter phase-length constant")
        run.add_argument("--output", help="Run record file; stdout if omitted")
        _add_machine_flags(run)

        bench = subparsers.add_parser("bench", help="Run a grid of configurations and emit CSV")
        _add_common(bench, argparse.SUPPRESS)
        bench.add_argument("--graph", nargs="+", help="Edge list files or descriptors")
        bench.add_argument(
            "--model", choices=GRAPH_MODELS,
            help="Model of the graphs generated for --n",
        )
        bench.add_argument("--n", nargs="+", type=int, help="Sizes of generated graphs")
        bench.add_argument("--p", type=float)
        bench.add_argument("--d", type=int)
        bench.add_argument("--algo", nargs="+", choices=ALGORITHMS)
        bench.add_argument("--engine", nargs="+", choices=ENGINES + tuple(ENGINE_ALIASES))
        bench.add_argument("--seeds", help="Seed range \"A..B\", inclusive, or a single seed")
        bench.add_argument("--beta", nargs="+", help="Ruling distances of brs runs")
        bench.add_argument("--force-ell", nargs="+", type=int)
        bench.add_argument("--out", help="CSV file; stdout if omitted")
        _add_machine_flags(bench)

        args = parser.parse_args(argv)
        if args.command is None and not args.version:
            parser.print_usage(sys.stderr)
            log.error("a subcommand is required: gen, run or bench")
            sys.exit(2)
        return args
    except argparse.ArgumentError as err:
        log.error(str(err))
        sys.exit(2)


def get_mpclib_dir() -> str:
    mpclib_module = importlib.import_module("mpclib")
    mpclib_dir = os.path.dirname(inspect.getabsfile(mpclib_module))
    return os.path.abspath(mpclib_dir)


def get_custom_config() -> dict[str, Any]:
    global __config_file__

    global_defaults_file = os.path.join(get_mpclib_dir(), "default_config.yml")

    with open(global_defaults_file, "r") as file:
        config = yaml.safe_load(file)

    if os.path.exists(__config_file__):
        with open(__config_file__, "r") as file:
            local_defaults = yaml.safe_load(file)
        if local_defaults:
            config = merge_dicts_recursively(
                config,
                local_defaults,
            )
    return config


def parse_seeds(text: str) -> list[int]:
    """Seeds from "3" or "1..20", both ends inclusive."""
    start, sep, end = text.partition("..")
    try:
        if not sep:
            return [int(text)]
        seeds = list(range(int(start), int(end) + 1))
    except ValueError:
        raise UsageError(f"--seeds expects A..B or a single integer, got {text!r}")
    if not seeds:
        raise UsageError(f"empty seed range {text!r}")
    return seeds


def parse_beta(text: str | None) -> int | str | None:
    if text is None or text == "auto":
        return text
    try:
        beta = int(text)
    except ValueError:
        raise UsageError(f"--beta expects an integer or \"auto\", got {text!r}")
    if beta < 2:
        raise UsageError(f"--beta must be at least 2, got {beta}")
    return beta


def check_run_flags(run: dict[str, Any]) -> None:
    """Rejects flags that the selected algorithm or engine would silently ignore."""
    algorithm = run["algorithm"]
    only = [
        ("beta", "--beta", ("brs",)),
        ("schedule", "--schedule", ("brs",)),
        ("f", "--f", ("sparsify",)),
        ("c", "--c", ("sparsify", "2rs", "brs")),
        ("delta", "--delta", ("shatter", "mis", "2rs", "brs")),
    ]
    for key, flag, algorithms in only:
        if run.get(key) is not None and algorithm not in algorithms:
            raise UsageError(
                f"{flag} does not apply to --algo {algorithm}; "
                f"it is only used by {', '.join(algorithms)}"
            )
    engine = ENGINE_ALIASES.get(run["engine"], run["engine"])
    if run.get("force_ell") is not None:
        if engine == ENGINE_CONGEST:
            raise UsageError("--force-ell needs a compressed engine (mpc-v1 or mpc-v2)")
        if run["force_ell"] < 1:
            raise UsageError(f"--force-ell must be at least 1, got {run['force_ell']}")


def _gen_configuration(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "model": args.model,
        "params": {
            key: getattr(args, key)
            for key in GRAPH_PARAMS
            if getattr(args, key) is not None
        },
        "seed": args.seed,
        "out": args.out,
    }


def _run_configuration(args: argparse.Namespace) -> dict[str, Any]:
    run = {
        "graph": args.graph,
        "algorithm": args.algo,
        "engine": args.engine,
        "seed": args.seed,
        "beta": parse_beta(args.beta),
        "schedule": args.schedule,
        "f": args.f,
        "c": args.c,
        "delta": args.delta,
        "force_ell": args.force_ell,
        "epsilon": args.epsilon,
        "memory_mode": args.memory,
        "output": args.output,
    }
    check_run_flags(run)
    return run


def _bench_configuration(args: argparse.Namespace, defaults: dict[str, Any]) -> dict[str, Any]:
    bench = dict(defaults)
    graphs = list(args.graph or [])
    if args.n:
        if args.model is None:
            raise UsageError("--n needs --model")
        extra = "".join(
            f",{key}={getattr(args, key)}"
            for key in ("p", "d")
            if getattr(args, key) is not None
        )
        graphs += [f"{args.model}:n={n}{extra}" for n in args.n]
    if graphs:
        bench["graphs"] = graphs
    if not bench.get("graphs"):
        raise UsageError("bench needs at least one graph, from --graph or --model with --n")
    if args.algo:
        bench["algorithms"] = args.algo
    if args.engine:
        bench["engines"] = args.engine
    if args.seeds:
        bench["seeds"] = parse_seeds(args.seeds)
    if args.beta:
        bench["betas"] = [parse_beta(beta) for beta in args.beta]
    if args.force_ell:
        bench["force_ells"] = args.force_ell
    if args.epsilon is not None:
        bench["epsilon"] = args.epsilon
    if args.memory is not None:
        bench["memory_mode"] = args.memory
    if args.out is not None:
        bench["output"] = args.out
    if bench.get("betas") and "brs" not in bench["algorithms"]:
        raise UsageError("--beta only varies brs runs; add brs to --algo")
    if bench.get("force_ells") and all(
        ENGINE_ALIASES.get(engine, engine) == ENGINE_CONGEST
        for engine in bench["engines"]
    ):
        raise UsageError("--force-ell needs a compressed engine (mpc-v1 or mpc-v2)")
    return bench


def get_configuration(args: argparse.Namespace) -> dict[str, Any]:
    global __config_file__

    if args.config_file is not None:
        if not os.path.exists(args.config_file):
            raise UsageError(f"Can't find {args.config_file}")
        __config_file__ = args.config_file

    config = get_custom_config()
    config["command"] = args.command
    if args.log_level:
        config["log_level"] = args.log_level
    if getattr(args, "progress", False):
        config["show_progress"] = True

    if args.command == "gen":
        config["gen"] = _gen_configuration(args)
    elif args.command == "run":
        config["run"] = _run_configuration(args)
    elif args.command == "bench":
        config["bench"] = _bench_configuration(args, config.get("bench") or {})
    return config
