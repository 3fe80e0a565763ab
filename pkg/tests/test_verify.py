import math

import networkx as nx
import pytest

from conftest import to_networkx
from mpclib.graph.generators import gen_graph
from mpclib.verify import component_report
from mpclib.verify import degree_bound
from mpclib.verify import verify_degree_bound
from mpclib.verify import verify_domination
from mpclib.verify import verify_independent


def test_independent(triangle):
    assert verify_independent(triangle, {0})
    verdict = verify_independent(triangle, {0, 1})
    assert not verdict
    assert verdict.witness == (0, 1)
    assert verdict.to_json()["witness"] == [0, 1]


def test_domination(triangle, path5):
    assert verify_domination(triangle, {0}, 1)
    assert verify_domination(path5, {2}, 2).measured == 2
    verdict = verify_domination(path5, {0}, 2)
    assert not verdict.passed
    assert verdict.witness == 4
    assert verdict.measured == 4


def test_domination_of_empty_set(path5):
    verdict = verify_domination(path5, set(), 3)
    assert not verdict.passed
    assert verdict.measured == math.inf


def test_unreachable_component(two_triangles):
    verdict = verify_domination(two_triangles, {0}, 5)
    assert not verdict.passed
    assert verdict.witness == 5


def test_domination_matches_networkx():
    graph = gen_graph("gnp", {"n": 300, "p": 0.01}, seed=4)
    nodes = set(range(0, 300, 7))
    lengths = nx.multi_source_dijkstra_path_length(to_networkx(graph), nodes)
    farthest = max(lengths.get(v, math.inf) for v in range(graph.n))
    for beta in (1, 2, 3):
        assert verify_domination(graph, nodes, beta).passed == (farthest <= beta)


def test_degree_bound():
    assert degree_bound(8, 3, 10 ** 4) == pytest.approx(442.1, abs=0.05)
    assert degree_bound(8, 3, 1) == 0.0


def test_degree_bound_verdict():
    clique = gen_graph("clique", {"n": 5})
    verdict = verify_degree_bound(clique, range(5), 1, 0.1, 5)
    assert not verdict.passed
    assert not verdict.hard
    assert verdict.measured == 4
    assert verdict.witness == 0
    assert verify_degree_bound(clique, [], 1, 0.1, 5).passed


def test_component_report(two_triangles):
    report = component_report(two_triangles, range(6))
    assert report.sizes == (3, 3)
    assert report.largest == 3
    assert report.largest_words == 9
    report = component_report(two_triangles, [0, 1, 3])
    assert report.sizes == (2, 1)
    assert component_report(two_triangles, []).total == 0
