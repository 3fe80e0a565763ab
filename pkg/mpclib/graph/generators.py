from __future__ import annotations

import itertools as it
import re
from typing import Any, Callable

import networkx as nx
import numpy as np

from mpclib.constants import GRAPH_MODELS
from mpclib.errors import GraphParameterError
from mpclib.graph.graph import Graph

__all__ = [
    "gen_graph",
    "parse_graph_descriptor",
]


def _require(condition: bool, constraint: str) -> None:
    if not condition:
        raise GraphParameterError(f"violated constraint: {constraint}")


def _int_param(params: dict, key: str) -> int:
    if key not in params:
        raise GraphParameterError(f"missing parameter {key!r}")
    value = params[key]
    if isinstance(value, float) and not value.is_integer():
        raise GraphParameterError(f"parameter {key!r} must be an integer, got {value}")
    return int(value)


def _gnp_pairs(n: int, p: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """
    Samples G(n, p) by geometric skipping over the pairs (w, v), w < v,
    enumerated as k = v(v-1)/2 + w.
    """
    total = n * (n - 1) // 2
    if total == 0 or p <= 0.0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    if p >= 1.0:
        k = np.arange(total, dtype=np.int64)
    else:
        batch = max(1024, int(1.1 * total * p) + 64)
        chunks = []
        position = np.int64(-1)
        while True:
            gaps = rng.geometric(p, size=batch).astype(np.int64)
            indices = position + np.cumsum(gaps)
            chunks.append(indices[indices < total])
            position = indices[-1]
            if position >= total:
                break
        k = np.concatenate(chunks)
    v = ((1.0 + np.sqrt(1.0 + 8.0 * k.astype(np.float64))) // 2).astype(np.int64)
    # float rounding can leave v off by one
    v -= (v * (v - 1) // 2 > k)
    v += ((v + 1) * v // 2 <= k)
    w = k - v * (v - 1) // 2
    return w, v


def _gnp(params: dict, seed: int) -> Graph:
    n = _int_param(params, "n")
    p = float(params.get("p", -1))
    _require(n >= 1, "gnp: n >= 1")
    _require(0.0 <= p <= 1.0, "gnp: 0 <= p <= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    w, v = _gnp_pairs(n, p, rng)
    return Graph.from_edges(n, zip(w.tolist(), v.tolist()))


def _random_regular(params: dict, seed: int) -> Graph:
    n = _int_param(params, "n")
    d = _int_param(params, "d")
    _require(n >= 1, "random_regular: n >= 1")
    _require(0 <= d < n, "random_regular: 0 <= d < n")
    _require((n * d) % 2 == 0, "random_regular: n*d even")
    nx_graph = nx.random_regular_graph(d, n, seed=seed)
    return Graph.from_edges(n, nx_graph.edges())


def _path(params: dict, seed: int) -> Graph:
    n = _int_param(params, "n")
    _require(n >= 1, "path: n >= 1")
    return Graph.from_edges(n, ((v, v + 1) for v in range(n - 1)))


def _cycle(params: dict, seed: int) -> Graph:
    n = _int_param(params, "n")
    _require(n >= 3, "cycle: n >= 3")
    return Graph.from_edges(n, ((v, (v + 1) % n) for v in range(n)))


def _clique(params: dict, seed: int) -> Graph:
    n = _int_param(params, "n")
    _require(n >= 1, "clique: n >= 1")
    return Graph.from_edges(n, it.combinations(range(n), 2))


def _star(params: dict, seed: int) -> Graph:
    # n counts the center, so K_{1,4} has n = 5
    n = _int_param(params, "n")
    _require(n >= 1, "star: n >= 1")
    return Graph.from_edges(n, ((0, leaf) for leaf in range(1, n)))


def _disjoint_cliques(params: dict, seed: int) -> Graph:
    k = _int_param(params, "k")
    size = _int_param(params, "size")
    _require(k >= 1, "disjoint_cliques: k >= 1")
    _require(size >= 1, "disjoint_cliques: size >= 1")
    edges = (
        (block * size + a, block * size + b)
        for block in range(k)
        for a, b in it.combinations(range(size), 2)
    )
    return Graph.from_edges(k * size, edges)


GENERATORS: dict[str, Callable[[dict, int], Graph]] = {
    "gnp": _gnp,
    "random_regular": _random_regular,
    "path": _path,
    "cycle": _cycle,
    "clique": _clique,
    "star": _star,
    "disjoint_cliques": _disjoint_cliques,
}


def gen_graph(model: str, params: dict[str, Any], seed: int = 0) -> Graph:
    """
    Generates a graph of the given model. Identical (model, params, seed)
    always yield an identical graph.
    """
    if model not in GENERATORS:
        raise GraphParameterError(
            f"unknown model {model!r}; choose one of {', '.join(GRAPH_MODELS)}"
        )
    return GENERATORS[model](dict(params), int(seed))


DESCRIPTOR_SHORTHAND = re.compile(r"^(path|cycle|clique|star)(\d+)$")


def _parse_value(text: str) -> Any:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_graph_descriptor(descriptor: str) -> tuple[str, dict, int]:
    """
    Parses "model:key=value,..." (e.g. "gnp:n=1000,p=0.01,seed=3") or the
    shorthand "path5", returning (model, params, seed).
    """
    shorthand = DESCRIPTOR_SHORTHAND.match(descriptor)
    if shorthand:
        return shorthand.group(1), {"n": int(shorthand.group(2))}, 0
    model, _, rest = descriptor.partition(":")
    if model not in GENERATORS:
        raise GraphParameterError(f"cannot parse graph descriptor {descriptor!r}")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise GraphParameterError(f"expected key=value in {descriptor!r}, got {item!r}")
        params[key.strip()] = _parse_value(value.strip())
    seed = int(params.pop("seed", 0))
    return model, params, seed
