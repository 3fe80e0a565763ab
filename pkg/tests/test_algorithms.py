import networkx as nx
import pytest

from conftest import roomy_config
from conftest import to_networkx
from mpclib.algorithms.finish import finish_off
from mpclib.algorithms.finish import greedy_mis
from mpclib.algorithms.luby import LubyProgram
from mpclib.algorithms.luby import LubyState
from mpclib.algorithms.luby import luby_mis
from mpclib.algorithms.ruling_sets import beta_ruling_set
from mpclib.algorithms.ruling_sets import maximal_independent_set
from mpclib.algorithms.ruling_sets import two_ruling_set
from mpclib.algorithms.schedules import auto_beta
from mpclib.algorithms.schedules import f_schedule
from mpclib.algorithms.schedules import schedule_for_memory
from mpclib.algorithms.schedules import stage_exponents
from mpclib.algorithms.shatter import ShatterProgram
from mpclib.algorithms.shatter import shatter
from mpclib.algorithms.sparsify import SparsifyProgram
from mpclib.algorithms.sparsify import SparsifyState
from mpclib.algorithms.sparsify import deg_ordered_sparsify
from mpclib.algorithms.sparsify import join_probability
from mpclib.algorithms.sparsify import sparsify_iterations
from mpclib.constants import INPUT_LINEAR
from mpclib.constants import SCHEDULE_BOUNDED
from mpclib.constants import SCHEDULE_INPUT_LINEAR
from mpclib.constants import SCHEDULE_UNRESTRICTED
from mpclib.errors import ConfigurationError
from mpclib.errors import FinishOffError
from mpclib.graph.generators import gen_graph
from mpclib.graph.graph import Graph
from mpclib.mpc.machines import MachineConfig
from mpclib.randomness import RandomTape
from mpclib.verify import verify_domination
from mpclib.verify import verify_independent


def test_join_probability():
    assert join_probability(1, 4, 3, 10, 256) == 120 / 256
    assert join_probability(4, 4, 3, 10, 256) == 1.0
    assert join_probability(1, 4, 3, 10, 0) == 1.0


def test_sparsify_iterations():
    assert sparsify_iterations(256, 4) == 4
    assert sparsify_iterations(257, 4) == 5
    assert sparsify_iterations(1, 8) == 1
    assert sparsify_iterations(0, 8) == 1


def test_sparsify_edgeless_graph():
    graph = gen_graph("gnp", {"n": 10, "p": 0.0})
    result = deg_ordered_sparsify(graph, 8, 3, "congest", RandomTape(1, 10))
    assert result.chosen == frozenset(range(10))
    assert result.run.congest_rounds == 3


def test_sparsify_dominates(small_gnp):
    result = deg_ordered_sparsify(small_gnp, 8, 3, "congest", RandomTape(2, small_gnp.n))
    assert verify_domination(small_gnp, result.chosen, 1).passed
    assert result.run.congest_rounds <= 3 * result.iterations


def test_small_f_is_raised(small_gnp):
    result = deg_ordered_sparsify(small_gnp, 2, 3, "congest", RandomTape(2, small_gnp.n))
    assert result.f == 4


def test_sparsify_round_kinds():
    program = SparsifyProgram(f=4, c=3, max_degree=64, n=1000)
    assert program.iterations == 3
    # Degree count, heavy announcement, join announcement
    assert [program.exchange_for(r).dense for r in (1, 2, 3)] == [True, False, False]
    assert [program.sampling_round(r) for r in (1, 2, 3, 4)] == [False, False, True, False]
    heavy = SparsifyState(node=0, heavy=True)
    light = SparsifyState(node=1)
    assert program.estimate_activation(heavy, 1, 2) == 1.0
    assert program.estimate_activation(light, 1, 2) == 0.0
    assert program.estimate_activation(light, 1, 3) == program.probability(1)
    assert program.estimate_activation(light, 0, 9) == 1.0


def test_luby_estimate():
    program = LubyProgram(n=10)
    assert program.estimate_activation(LubyState(0), 1, 2) == 0.0
    assert program.estimate_activation(LubyState(0), 1, 4) == 1.0
    assert program.estimate_activation(LubyState(0), 2, 3) == 1.0
    assert program.estimate_activation(LubyState(0, active=False), 2, 3) == 0.0


def test_shatter_round_count():
    program = ShatterProgram(max_degree=16, n=1000, iterations=5, phase_length=2)
    assert program.phases == 3
    assert program.total_rounds(None) == 3 + 2 * 5


def test_shatter_leaves_residual_undominated(small_gnp):
    result = shatter(small_gnp, "congest", RandomTape(3, small_gnp.n))
    assert verify_independent(small_gnp, result.independent).passed
    retired = set(result.independent)
    for v in result.independent:
        retired.update(small_gnp.neighbors(v))
    assert not (result.residual & retired)
    assert result.run.congest_rounds <= 3 * result.iterations


def test_finish_off_two_edges():
    graph = Graph.from_edges(4, [(0, 1), (2, 3)])
    result = finish_off(graph, range(4), roomy_config(graph))
    assert result.chosen == frozenset({0, 2})
    assert result.components == [2, 2]
    assert result.cluster is not None and result.mpc_rounds > 0
    assert result.cluster.audit().passed


def test_finish_off_empty_residual(triangle):
    result = finish_off(triangle, [], roomy_config(triangle))
    assert result.chosen == frozenset()
    assert result.cluster is None


def test_finish_off_oversized_component():
    graph = gen_graph("clique", {"n": 10})
    config = MachineConfig(graph.n, graph.m)
    with pytest.raises(FinishOffError) as info:
        finish_off(graph, range(10), config)
    assert info.value.words == 100
    assert len(finish_off(graph, range(10), config, simulate=False).chosen) == 1


def test_greedy_mis(path5):
    assert greedy_mis(path5) == frozenset({0, 2, 4})


def test_luby_gives_mis(small_gnp):
    result = luby_mis(small_gnp, "congest", RandomTape(4, small_gnp.n))
    assert verify_independent(small_gnp, result.independent).passed
    assert verify_domination(small_gnp, result.independent, 1).passed
    nx_graph = to_networkx(small_gnp)
    assert nx.is_dominating_set(nx_graph, result.independent)
    assert not any(nx_graph.has_edge(u, v) for u in result.independent for v in result.independent)


def test_schedules():
    assert stage_exponents(2, SCHEDULE_UNRESTRICTED) == pytest.approx([2 / 3])
    assert stage_exponents(3, SCHEDULE_UNRESTRICTED) == pytest.approx([6 / 7, 4 / 7])
    assert stage_exponents(3, SCHEDULE_BOUNDED) == pytest.approx([0.75, 0.5])
    assert stage_exponents(4, SCHEDULE_INPUT_LINEAR) == pytest.approx([0.75, 0.5, 0.25])
    assert f_schedule(2 ** 16, 2, SCHEDULE_INPUT_LINEAR) == [16.0]
    assert schedule_for_memory(INPUT_LINEAR) == SCHEDULE_INPUT_LINEAR
    with pytest.raises(ConfigurationError):
        stage_exponents(1, SCHEDULE_UNRESTRICTED)
    with pytest.raises(ConfigurationError):
        stage_exponents(2, "iii")


def test_auto_beta():
    assert auto_beta(2) == 2
    assert auto_beta(2 ** 16) == 2
    assert auto_beta(2 ** 256) == 3


def test_mis_on_clique():
    graph = gen_graph("clique", {"n": 10})
    result = maximal_independent_set(graph, RandomTape(1, 10), roomy_config(graph))
    assert len(result.chosen) == 1
    assert result.passed


@pytest.mark.parametrize("seed", range(1, 21))
def test_two_ruling_set_on_path(path7, seed):
    result = two_ruling_set(path7, RandomTape(seed, 7), roomy_config(path7))
    assert result.independent
    assert result.dominated
    assert result.verdict("dominated_2").passed


def test_beta_ruling_set(small_gnp):
    result = beta_ruling_set(small_gnp, 3, RandomTape(5, small_gnp.n), roomy_config(small_gnp))
    assert result.passed
    assert len(result.stage_sets) == 2
    assert result.stage_sets[1] <= result.stage_sets[0]
    assert result.chosen <= result.stage_sets[1]


def test_mpc_pipeline_matches_congest(sparse_gnp):
    tape = RandomTape(6, sparse_gnp.n)
    config = roomy_config(sparse_gnp)
    reference = maximal_independent_set(sparse_gnp, tape, config)
    compressed = maximal_independent_set(sparse_gnp, tape, config, engine="mpc-v1", force_ell=3)
    assert compressed.chosen == reference.chosen
    assert compressed.passed
    assert compressed.metrics.audit_passed
    assert compressed.metrics.mpc_rounds > 0
    assert reference.metrics.mpc_rounds == 0
