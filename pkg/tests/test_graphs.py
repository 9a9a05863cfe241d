import itertools
import math
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdp.constructions import descartes, Hypergraph
from fracdp.errors import FormatError, InvalidParameterError, NotAcyclicError, SizeLimitError
from fracdp.graphs import (
    INF,
    Digraph,
    Graph,
    check_parity_condition,
    chromatic_number,
    complete_bipartite,
    count_directed_paths,
    cycle,
    degeneracy,
    degeneracy_orientation,
    dump_digraph,
    dump_graph,
    from_spec,
    girth,
    max_average_degree,
    parse_digraph,
    parse_graph,
    path,
    reachability,
    theta,
    tree_from_parents,
    unicyclic,
)

from conftest import all_graphs


def g2():
    return descartes([Hypergraph.from_graph(cycle(5))])


@st.composite
def graphs_st(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Graph(n, chosen)


@st.composite
def dags_st(draw, max_n=7):
    g = draw(graphs_st(max_n))
    perm = draw(st.permutations(range(g.n)))
    rank = {v: i for i, v in enumerate(perm)}
    return Digraph(g.n, [(u, v) if rank[u] < rank[v] else (v, u) for u, v in g.edges])


def to_nx(d: Digraph) -> nx.DiGraph:
    h = nx.DiGraph()
    h.add_nodes_from(range(d.n))
    h.add_edges_from(d.arcs)
    return h


# -- types and generators


def test_graph_rejects_loops_duplicates_and_range():
    with pytest.raises(InvalidParameterError):
        Graph(3, [(1, 1)])
    with pytest.raises(InvalidParameterError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(InvalidParameterError):
        Graph(3, [(0, 3)])


def test_digraph_rejects_both_directions():
    with pytest.raises(InvalidParameterError):
        Digraph(2, [(0, 1), (1, 0)])


def test_generator_sizes():
    assert (cycle(4).n, cycle(4).m) == (4, 4)
    assert (complete_bipartite(2, 3).n, complete_bipartite(2, 3).m) == (5, 6)
    t = theta(2, 2, 1)
    assert (t.n, t.m) == (4, 5)
    assert t.degree(0) == t.degree(1) == 3
    assert (path(5).n, path(5).m) == (5, 4)
    assert unicyclic(4, [0]).m == 5


@pytest.mark.parametrize("bad", [lambda: cycle(2), lambda: theta(1, 1, 2), lambda: theta(0, 2, 2), lambda: path(0)])
def test_generator_minima(bad):
    with pytest.raises(InvalidParameterError):
        bad()


def test_from_spec():
    assert from_spec("cycle:4") == cycle(4)
    assert from_spec("complete_bipartite:5,5") == complete_bipartite(5, 5)
    assert from_spec("tree:0,0,1") == tree_from_parents([0, 0, 1])
    with pytest.raises(InvalidParameterError):
        from_spec("wheel:5")


# -- girth


def girth_by_edge_removal(g: Graph) -> float:
    """Shortest cycle through an edge uv is 1 + dist(u, v) once uv is deleted."""
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    best = INF
    for u, v in g.edges:
        h.remove_edge(u, v)
        try:
            best = min(best, 1 + nx.shortest_path_length(h, u, v))
        except nx.NetworkXNoPath:
            pass
        h.add_edge(u, v)
    return best


def test_girth_examples():
    assert girth(cycle(4)) == 4
    assert girth(path(5)) == INF
    assert girth(g2()[0]) == 15


@given(graphs_st())
def test_girth_matches_edge_removal_oracle(g):
    assert girth(g) == girth_by_edge_removal(g)


# -- chromatic number


def chromatic_brute(g: Graph) -> int:
    for q in range(1, g.n + 1):
        for col in itertools.product(range(q), repeat=g.n):
            if all(col[u] != col[v] for u, v in g.edges):
                return q
    return 0


def test_chromatic_examples():
    assert chromatic_number(cycle(5)) == 3
    assert chromatic_number(complete_bipartite(3, 3)) == 2
    assert chromatic_number(g2()[0]) == 3


@given(graphs_st(max_n=7))
def test_chromatic_matches_brute_force(g):
    assert chromatic_number(g) == chromatic_brute(g)


def test_chromatic_limit():
    with pytest.raises(SizeLimitError):
        chromatic_number(path(10), limit=5)


# -- degeneracy


def test_degeneracy_examples():
    for g, d in [(cycle(6), 2), (complete_bipartite(3, 5), 3), (g2()[0], 2)]:
        o = degeneracy_orientation(g, d)
        assert o is not None and o.is_acyclic() and o.max_out_degree() <= d and o.is_orientation_of(g)
    assert degeneracy_orientation(cycle(6), 1) is None


@given(graphs_st())
def test_degeneracy_orientation_properties(g):
    core = max(nx.core_number(nx.Graph(list(g.edges)) if g.m else nx.empty_graph(1)).values())
    assert degeneracy(g) == core
    for d in range(0, 4):
        o = degeneracy_orientation(g, d)
        assert (o is None) == (d < core)
        if o is not None:
            assert o.is_acyclic() and o.max_out_degree() <= d and o.is_orientation_of(g)


# -- parity condition and path counts


def has_even_path_oracle(d: Digraph, u: int, v: int) -> bool:
    return any((len(p) - 1) % 2 == 0 for p in nx.all_simple_paths(to_nx(d), u, v))


def test_parity_examples():
    tri = Digraph(3, [(0, 1), (1, 2), (0, 2)])
    res = check_parity_condition(tri)
    assert not res and res.witness == (0, 2, (0, 1, 2))
    assert check_parity_condition(Digraph(6, [(i, 3 + j) for i in range(3) for j in range(3)]))
    assert check_parity_condition(g2()[1])
    with pytest.raises(NotAcyclicError):
        check_parity_condition(Digraph(3, [(0, 1), (1, 2), (2, 0)]))


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_parity_passes_on_bipartite_orientations(a, b, data):
    pairs = [(i, a + j) for i in range(a) for j in range(b)]
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True))
    flips = data.draw(st.lists(st.booleans(), min_size=len(edges), max_size=len(edges)))
    d = Digraph(a + b, [(v, u) if f else (u, v) for (u, v), f in zip(edges, flips)])
    if d.is_acyclic():
        assert check_parity_condition(d).passed


@given(dags_st())
def test_parity_matches_path_enumeration(d):
    res = check_parity_condition(d)
    bad = [(u, v) for u, v in d.arcs if has_even_path_oracle(d, u, v)]
    assert res.passed == (not bad)
    if not res.passed:
        u, v, walk = res.witness
        assert walk[0] == u and walk[-1] == v and (len(walk) - 1) % 2 == 0 and len(walk) >= 3
        assert all(d.has_arc(x, y) for x, y in zip(walk, walk[1:]))


def test_count_paths_examples():
    diamond = Digraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    assert count_directed_paths(diamond, 0, 3) == 2
    assert count_directed_paths(Digraph(2, [(0, 1)]), 0, 1) == 1
    _, d = g2()
    assert all(count_directed_paths(d, u, v) == 1 for u, v in d.arcs)


@given(dags_st())
def test_count_paths_matches_networkx(d):
    h = to_nx(d)
    for u in range(d.n):
        for v in range(d.n):
            if u != v:
                assert count_directed_paths(d, u, v) == len(list(nx.all_simple_paths(h, u, v)))


# -- maximum average degree


def mad_brute(g: Graph) -> Fraction:
    best = Fraction(0)
    for r in range(1, g.n + 1):
        for sub in itertools.combinations(range(g.n), r):
            s = set(sub)
            e = sum(1 for u, v in g.edges if u in s and v in s)
            best = max(best, Fraction(2 * e, r))
    return best


def test_mad_examples():
    assert max_average_degree(cycle(6)) == 2
    assert max_average_degree(complete_bipartite(5, 5)) == 5
    assert max_average_degree(theta(2, 2, 1)) == Fraction(5, 2)


@given(graphs_st(max_n=7))
def test_mad_properties(g):
    mad = max_average_degree(g)
    assert mad == mad_brute(g)
    assert mad >= Fraction(2 * g.m, g.n)


@pytest.mark.parametrize("g", [cycle(5), cycle(8), complete_bipartite(3, 3), complete_bipartite(4, 4)])
def test_mad_equals_average_on_transitive_graphs(g):
    assert max_average_degree(g) == Fraction(2 * g.m, g.n)


# -- reachability


def test_reachability_examples():
    assert reachability(Digraph(1), 0, "forward", closed=True) == {0}
    chain = Digraph(3, [(0, 1), (1, 2)])
    assert reachability(chain, 0, "forward") == {1, 2}
    assert reachability(chain, 2, "backward", closed=True) == {0, 1, 2}


@given(dags_st())
def test_reachability_matches_networkx(d):
    h = to_nx(d)
    for u in range(d.n):
        assert reachability(d, u, "forward") == nx.descendants(h, u)
        assert reachability(d, u, "backward", closed=True) == nx.ancestors(h, u) | {u}


# -- text formats


def test_graph_text_round_trip():
    g = theta(2, 3, 1)
    assert parse_graph(dump_graph(g)) == g
    d = g2()[1]
    assert parse_digraph(dump_digraph(d)) == d
    assert parse_graph("# comment\n3 2\n0 1\n1 2\n") == path(3)


@pytest.mark.parametrize("text", ["", "3 1\n1 1\n", "3 2\n0 1\n0 1\n", "3 2\n0 1\n", "x y\n", "3 1\n0 1 2\n"])
def test_graph_parser_rejects(text):
    with pytest.raises(FormatError):
        parse_graph(text)


def test_topological_order_sources_first():
    d = Digraph(4, [(3, 2), (2, 1), (1, 0)])
    assert d.topological_order() == (3, 2, 1, 0)
    with pytest.raises(NotAcyclicError):
        Digraph(3, [(0, 1), (1, 2), (2, 0)]).topological_order()
