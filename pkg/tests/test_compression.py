import networkx as nx
import numpy as np
import pytest

from conftest import roomy_config
from conftest import to_networkx
from mpclib.algorithms.luby import LubyProgram
from mpclib.algorithms.shatter import ShatterProgram
from mpclib.algorithms.shatter import ShatterState
from mpclib.algorithms.sparsify import SparsifyProgram
from mpclib.algorithms.sparsify import SparsifyState
from mpclib.compression.balls import Ball
from mpclib.compression.balls import fast_forward
from mpclib.compression.balls import gather_balls
from mpclib.compression.balls import relay_ball
from mpclib.compression.engine import run_compressed
from mpclib.compression.marking import Marking
from mpclib.compression.marking import ball_size_bound
from mpclib.compression.marking import mark_nodes
from mpclib.compression.marking import sparsity_certificate
from mpclib.compression.planner import halving_partition
from mpclib.compression.planner import plan_phases_v1
from mpclib.compression.planner import plan_phases_v2
from mpclib.compression.planner import v1_phase_length
from mpclib.compression.planner import v2_phase_length
from mpclib.compression.planner import validate_halving
from mpclib.congest.engine import run_congest
from mpclib.congest.program import Broadcast
from mpclib.congest.program import NodeContext
from mpclib.congest.program import Status
from mpclib.errors import BallOverflowError
from mpclib.errors import ConfigurationError
from mpclib.errors import EstimatorUnsoundError
from mpclib.graph.generators import gen_graph
from mpclib.graph.graph import Graph
from mpclib.mpc.cluster import Cluster
from mpclib.mpc.machines import MachineConfig
from mpclib.randomness import RandomTape


class RecordingShatter(ShatterProgram):
    """Remembers (node, round) for every message it puts on the wire."""

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.sent = set()

    def init(self, ctx):
        transition = super().init(ctx)
        if transition.outbox is not None:
            self.sent.add((ctx.node, 1))
        return transition

    def step(self, ctx, state, inbox):
        transition = super().step(ctx, state, inbox)
        if transition.outbox is not None:
            self.sent.add((ctx.node, ctx.round + 1))
        return transition


def test_halving_partition():
    assert halving_partition(12) == [9, 2, 1]
    assert halving_partition(1) == [1]
    assert halving_partition(0) == []
    assert sum(halving_partition(100)) == 100
    validate_halving(halving_partition(100))


def test_validate_halving():
    with pytest.raises(ConfigurationError):
        validate_halving([4, 3])
    with pytest.raises(ConfigurationError):
        validate_halving([2, 0])


def test_v1_phase_length():
    assert v1_phase_length(2, 2 ** 32, 0.5) == 1
    assert v1_phase_length(2, 2 ** 40, 0.8) == 2
    with pytest.raises(ConfigurationError):
        v1_phase_length(1.5, 1000, 0.5)


def test_v2_phase_length_cases():
    ell, case, alpha_prime = v2_phase_length(1, 2, 2 ** 20, 2 ** 20, 0.5)
    assert (ell, case) == (1, "i")
    assert alpha_prime == 2 * 20 ** 2
    _, case, _ = v2_phase_length(3, 2, 2 ** 20, 2 ** 20, 0.5)
    assert case == "ii"


def test_plans_cover_every_round():
    plans = plan_phases_v1(10, 2, 1000, 0.5, force_ell=3)
    assert [(p.start, p.length) for p in plans] == [(0, 3), (3, 3), (6, 3), (9, 1)]
    plans = plan_phases_v2([9, 2, 1], 2, 64, 1000, 0.5, force_ell=2)
    assert [p.stage for p in plans] == [1, 1, 1, 1, 1, 2, 3]
    assert sum(p.length for p in plans) == 12
    assert plans[-1].end == 12


def test_relay_ball_on_path(path5):
    members, _ = relay_ball(path5, {2}, 0, 2)
    assert members == frozenset({0})
    members, distances = relay_ball(path5, {1, 2}, 0, 2)
    assert members == frozenset({0, 1, 2})
    assert distances == {0: 0, 1: 1, 2: 2}
    members, _ = relay_ball(path5, {1, 2, 3}, 0, 2)
    assert 3 not in members


def test_relay_ball_on_star(star5):
    members, _ = relay_ball(star5, range(5), 0, 1)
    assert members == frozenset(range(5))


def test_ball_size_bound():
    marking = Marking(0, 2, activity={1: 0.5, 2: 0.5})
    # B = 1 * log2(16) = 4; 1 + 4 + 16
    assert ball_size_bound(marking, 16) == 21


def test_marking_covers_actual_senders(sparse_gnp):
    graph = sparse_gnp
    tape = RandomTape(4, graph.n)
    recorder = RecordingShatter(max_degree=graph.max_degree, n=graph.n)
    run_congest(graph, recorder, tape)

    program = ShatterProgram(max_degree=graph.max_degree, n=graph.n)
    states, trace = run_congest(graph, program, tape, max_rounds=1)
    outboxes = [Broadcast(True) if (u, 2) in recorder.sent else None for u in range(graph.n)]
    marking = mark_nodes(graph, program, states, trace.final_statuses, outboxes, tape, 1, 2)
    for tau in (2, 3):
        senders = {u for u, r in recorder.sent if r == tau}
        assert all(marking.is_marked(u, tau) for u in senders)
    assert not marking.growth_violations(program.alpha)


def _equivalent(graph, make, tape, version, force_ell, config=None):
    expected, trace = run_congest(graph, make(), tape)
    cluster = Cluster.for_graph(graph, config or roomy_config(graph, words=1 << 14))
    run = run_compressed(graph, make(), cluster, tape, version=version, force_ell=force_ell)
    assert run.states == expected
    assert run.statuses == trace.final_statuses
    assert run.halted_round == trace.halted_round
    assert run.congest_rounds == trace.round_count
    assert cluster.audit().passed
    for phase in run.phases:
        assert phase.bound_exceeded == (phase.max_ball_nodes > (phase.ball_bound or 0))
        if phase.mode == "gather" and version == "v2":
            assert phase.uncovered == 0
            assert phase.min_center_degree is None or phase.min_center_degree > phase.degree_threshold
    return run


@pytest.mark.parametrize("version", ["v1", "v2"])
@pytest.mark.parametrize("force_ell", [1, 2, 3])
def test_sparsify_compressed_matches_congest(sparse_gnp, version, force_ell):
    graph = sparse_gnp
    make = lambda: SparsifyProgram(f=4, c=3, max_degree=graph.max_degree, n=graph.n)
    run = _equivalent(graph, make, RandomTape(7, graph.n), version, force_ell)
    compressed = [phase for phase in run.phases if phase.length > 1]
    # Heavy and join announcements are sparse; the degree count is not
    assert all(phase.length == 2 for phase in compressed)
    if force_ell == 3:
        assert compressed
        assert all(not phase.growth_violations for phase in compressed)
    if force_ell == 3 and version == "v1":
        assert all(phase.mode == "gather" for phase in compressed)


@pytest.mark.parametrize("version", ["v1", "v2"])
@pytest.mark.parametrize("force_ell", [1, 2, 3])
def test_shatter_compressed_matches_congest(sparse_gnp, version, force_ell):
    graph = sparse_gnp
    make = lambda: ShatterProgram(max_degree=graph.max_degree, n=graph.n)
    run = _equivalent(graph, make, RandomTape(8, graph.n), version, force_ell)
    compressed = [phase for phase in run.phases if phase.length > 1]
    # Beep and join rounds are sparse; a window holding both compresses them
    if force_ell == 1:
        assert not compressed
    else:
        assert compressed
        assert all(phase.length == 2 for phase in compressed)
        assert all(phase.mode in ("gather", "stepped") for phase in compressed)
    if version == "v1":
        assert all(phase.mode == "gather" for phase in compressed)


@pytest.mark.parametrize("version", ["v1", "v2"])
def test_luby_compressed_matches_congest(small_gnp, version):
    graph = small_gnp
    make = lambda: LubyProgram(n=graph.n)
    run = _equivalent(graph, make, RandomTape(9, graph.n), version, 2)
    assert {phase.mode for phase in run.phases} == {"aggregate"}


def test_gather_on_a_clique():
    graph = gen_graph("clique", {"n": 12})
    make = lambda: ShatterProgram(max_degree=graph.max_degree, n=graph.n)
    run = _equivalent(graph, make, RandomTape(1, graph.n), "v2", 3)
    assert run.mpc_rounds > 0


class BlindShatter(ShatterProgram):
    """Claims that nobody sends past the first round of a phase."""

    def estimate_activation(self, state, t, tau):
        if tau > t + 1:
            return 0.0
        return super().estimate_activation(state, t, tau)


def _init_states(graph, program, tape):
    transitions = [
        program.init(NodeContext(v, graph.neighbors(v), 0, tape.n, tape))
        for v in range(graph.n)
    ]
    return [tr.state for tr in transitions], [tr.outbox for tr in transitions]


def test_ball_size_bound_radius():
    marking = Marking(0, 2, activity={1: 0.5, 2: 0.5})
    assert ball_size_bound(marking, 16, radius=3) == 1 + 4 + 16 + 64


def test_gather_balls_match_breadth_first_search(small_gnp):
    graph = small_gnp
    rng = np.random.default_rng(3)
    marked = set(np.flatnonzero(rng.random(graph.n) < 0.4).tolist())
    marking = Marking(0, 3, marked_rounds={u: frozenset({1}) for u in marked})
    program = ShatterProgram(max_degree=graph.max_degree, n=graph.n)
    states = [ShatterState(node=v) for v in range(graph.n)]
    cluster = Cluster.for_graph(graph, roomy_config(graph, words=1 << 14))
    centers = list(range(0, graph.n, 7))
    balls, machines = gather_balls(
        cluster, graph, program, marking, states, [None] * graph.n, centers, 3,
    )
    nx_graph = to_networkx(graph)
    for v in centers:
        relays = nx_graph.subgraph(marked | {v})
        expected = nx.single_source_shortest_path_length(relays, v, cutoff=3)
        assert balls[v].members == frozenset(expected)
        assert balls[v].distances == expected
        assert balls[v].radius == 3
    assert len(set(machines.values())) == len(centers)
    assert cluster.rounds > 0


def test_fast_forward_single_round_matches_congest(path7):
    graph = path7
    tape = RandomTape(2, graph.n)
    program = ShatterProgram(max_degree=graph.max_degree, n=graph.n)
    states, outboxes = _init_states(graph, program, tape)
    statuses = [Status.ACTIVE] * graph.n
    expected, trace = run_congest(graph, program, tape, max_rounds=1)
    marking = mark_nodes(graph, program, states, statuses, outboxes, tape, 0, 1)
    assert marking.marked == frozenset(range(graph.n))
    for v in range(graph.n):
        members, distances = relay_ball(graph, marking.marked, v, 1)
        ball = Ball(v, 1, members, distances, (), 0)
        transition, halted_at = fast_forward(
            ball, graph, program, tape, marking, states, statuses, outboxes,
        )
        assert transition.state == expected[v]
        assert Status(transition.status) is trace.final_statuses[v]
        assert halted_at is None


def test_unsound_estimator_is_caught(sparse_gnp):
    graph = sparse_gnp
    tape = RandomTape(8, graph.n)
    cluster = Cluster.for_graph(graph, roomy_config(graph, words=1 << 14))
    program = BlindShatter(max_degree=graph.max_degree, n=graph.n)
    with pytest.raises(EstimatorUnsoundError):
        run_compressed(graph, program, cluster, tape, version="v1", force_ell=3)


def test_sparsity_certificate_from_the_start():
    graph = gen_graph("gnp", {"n": 400, "p": 0.1}, seed=2)
    statuses = [Status.ACTIVE] * graph.n

    def certificate(c):
        program = SparsifyProgram(f=8, c=c, max_degree=graph.max_degree, n=graph.n)
        states = [SparsifyState(node=v, isolated=graph.degree(v) == 0) for v in range(graph.n)]
        rounds = range(1, program.total_rounds(graph) + 1)
        return program, sparsity_certificate(graph, program, states, statuses, 0, rounds)

    # c ln n >= 1 keeps the jump to probability 1 in the last iteration within f
    program, violations = certificate(0.25)
    assert program.iterations >= 2
    assert violations == []
    program, violations = certificate(0.05)
    assert violations and violations[-1] == program.total_rounds(graph)


# Sparsify on a path has a single iteration, so v2 never sees heavy and join rounds in one stage
@pytest.mark.parametrize("make_program, version", [("sparsify", "v1"), ("shatter", "v1"), ("shatter", "v2")])
def test_compressed_at_machine_size(make_program, version):
    graph = gen_graph("path", {"n": 1000})
    config = MachineConfig(graph.n, graph.m, epsilon=0.7)
    assert config.words == 126
    if make_program == "sparsify":
        make = lambda: SparsifyProgram(f=4, c=3, max_degree=graph.max_degree, n=graph.n)
    else:
        make = lambda: ShatterProgram(max_degree=graph.max_degree, n=graph.n)
    run = _equivalent(graph, make, RandomTape(5, graph.n), version, 3, config)
    gathered = [phase for phase in run.phases if phase.mode == "gather"]
    assert gathered
    assert all(phase.max_ball_words <= 126 for phase in gathered)
    if make_program == "sparsify":
        # Everyone is heavy and joins with probability 1
        assert all(phase.max_ball_nodes == 5 for phase in gathered)
        assert not any(phase.bound_exceeded for phase in gathered)
    if version == "v2":
        assert all(phase.degree_threshold < 2 for phase in gathered)


def test_ball_overflow_at_default_machine_size():
    graph = gen_graph("path", {"n": 1000})
    tape = RandomTape(5, graph.n)
    cluster = Cluster.for_graph(graph, MachineConfig(graph.n, graph.m))
    assert cluster.words == 32
    program = SparsifyProgram(f=4, c=3, max_degree=graph.max_degree, n=graph.n)
    with pytest.raises(BallOverflowError) as info:
        run_compressed(graph, program, cluster, tape, version="v1", force_ell=3)
    assert info.value.capacity == 32
    assert info.value.words > 32


def test_degree_ordered_star_serves_leaves_from_the_hub():
    graph = gen_graph("star", {"n": 17})
    make = lambda: ShatterProgram(max_degree=graph.max_degree, n=graph.n)
    covered = 0
    for seed in range(1, 21):
        run = _equivalent(graph, make, RandomTape(seed, graph.n), "v2", 3)
        for phase in run.phases:
            assert phase.mode != "stepped"
            if phase.mode == "gather":
                assert phase.centers <= 1
                covered += phase.covered
    assert covered > 0


def test_uncovered_nodes_step_the_phase():
    # Two disjoint edges: every node is low-degree, so no center exists
    graph = Graph.from_edges(4, [(0, 1), (2, 3)])
    make = lambda: ShatterProgram(max_degree=graph.max_degree, n=graph.n)
    stepped = []
    for seed in range(1, 6):
        run = _equivalent(graph, make, RandomTape(seed, graph.n), "v2", 3)
        # Phases go through gathering only when nobody needs a ball
        assert all(phase.centers == 0 and phase.covered == 0 for phase in run.phases)
        stepped += [phase for phase in run.phases if phase.mode == "stepped"]
    assert stepped
    assert all(phase.uncovered > 0 and phase.centers == 0 for phase in stepped)


@pytest.mark.parametrize("seed", range(1, 21))
@pytest.mark.parametrize("version", ["v1", "v2"])
def test_equivalence_over_seeds(seed, version):
    graph = gen_graph("gnp", {"n": 150, "p": 0.03}, seed=4)
    tape = RandomTape(seed, graph.n)
    _equivalent(
        graph, lambda: ShatterProgram(max_degree=graph.max_degree, n=graph.n),
        tape, version, 3,
    )
    _equivalent(
        graph, lambda: SparsifyProgram(f=4, c=3, max_degree=graph.max_degree, n=graph.n),
        tape, version, 3,
    )
