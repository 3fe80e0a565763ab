import networkx as nx
import pytest

from mpclib.graph.generators import gen_graph
from mpclib.graph.graph import Graph
from mpclib.mpc.machines import MachineConfig
from mpclib.randomness import RandomTape


def to_networkx(graph: Graph) -> nx.Graph:
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(range(graph.n))
    nx_graph.add_edges_from(graph.edges())
    return nx_graph


def roomy_config(graph: Graph, words: int = 1024, **kwargs) -> MachineConfig:
    """Machines large enough that gathered balls never overflow on test graphs."""
    return MachineConfig(graph.n, graph.m, words_override=words, **kwargs)


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path5():
    return gen_graph("path", {"n": 5})


@pytest.fixture
def path7():
    return gen_graph("path", {"n": 7})


@pytest.fixture
def star5():
    # K_{1,4}
    return gen_graph("star", {"n": 5})


@pytest.fixture
def two_triangles():
    return gen_graph("disjoint_cliques", {"k": 2, "size": 3})


@pytest.fixture
def small_gnp():
    return gen_graph("gnp", {"n": 300, "p": 0.03}, seed=5)


@pytest.fixture
def sparse_gnp():
    return gen_graph("gnp", {"n": 400, "p": 0.01}, seed=11)


@pytest.fixture
def tape_for():
    def make(graph: Graph, seed: int = 1) -> RandomTape:
        return RandomTape(seed, graph.n)
    return make
