import itertools

import pytest
from hypothesis import HealthCheck, settings

from fracdp.covers import Cover
from fracdp.graphs import Graph, cycle

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def h1() -> Cover:
    """Two-fold cover of C_4 with identity matchings everywhere."""
    g = cycle(4)
    return Cover(g, 2, {e: (0, 1) for e in g.edges})


@pytest.fixture
def h2() -> Cover:
    """Two-fold cover of C_4 with one crossed edge."""
    g = cycle(4)
    maps = {e: (0, 1) for e in g.edges}
    maps[(0, 1)] = (1, 0)
    return Cover(g, 2, maps)


def all_graphs(n: int):
    pairs = list(itertools.combinations(range(n), 2))
    for r in range(len(pairs) + 1):
        for edges in itertools.combinations(pairs, r):
            yield Graph(n, edges)


def all_trees(n: int):
    """Every labelled tree on ``n`` vertices, via Pruefer sequences."""
    if n == 1:
        yield Graph(1)
        return
    if n == 2:
        yield Graph(2, [(0, 1)])
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        edges = []
        for x in seq:
            leaf = min(v for v in range(n) if degree[v] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = [w for w in range(n) if degree[w] == 1]
        edges.append((u, v))
        yield Graph(n, edges)
