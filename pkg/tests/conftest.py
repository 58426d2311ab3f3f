import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from torusflow import FlowFunction, FlowNetworkProblem, WeightedGraph


def ring_graph(n, weights=None):
    return WeightedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], weights)


def triangle():
    return WeightedGraph.from_edges(3, [(0, 1), (1, 2), (2, 0)])


def square_with_diagonal():
    return WeightedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)])


def complete_graph(n):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return WeightedGraph.from_edges(n, edges)


def grid_2x3():
    # two rows of three nodes: 0-1-2 over 3-4-5
    return WeightedGraph.from_edges(
        6, [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)]
    )


def random_connected_graph(rng, n, extra_edges=None):
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    existing = {(min(a, b), max(a, b)) for a, b in edges}
    if extra_edges is None:
        extra_edges = int(rng.integers(1, n))
    attempts = 0
    while len(edges) < n - 1 + extra_edges and attempts < 200:
        attempts += 1
        a, b = sorted(rng.integers(0, n, size=2).tolist())
        if a == b or (a, b) in existing:
            continue
        existing.add((a, b))
        edges.append((a, b))
    weights = rng.uniform(0.5, 2.0, size=len(edges))
    return WeightedGraph.from_edges(n, edges, weights)


def sin_problem(graph, p, gamma):
    return FlowNetworkProblem.single_family(graph, FlowFunction.sin_family(), p, gamma)


def balanced_vector(rng, n, scale=0.3):
    p = rng.normal(size=n)
    return scale * (p - p.mean())


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def splay_state(n):
    return np.array([2 * np.pi * k / n for k in range(n)])
