"""Uniform hypergraphs and the Descartes-style step that trades them for girth and chromatic number.

Numbering used by :func:`descartes_step`: the hypergraph vertices come first
(``0..N-1``); copy ``j`` of the old graph, attached to the ``j``-th edge in
sorted order, occupies ``N + j*n .. N + j*n + n-1``.  Copy vertex ``x`` is
matched to the ``x``-th smallest vertex of its edge.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import FormatError, InvalidParameterError, SizeLimitError
from .graphs import (
    INF,
    Digraph,
    Graph,
    check_parity_condition,
    chromatic_number,
    count_directed_paths,
    degeneracy_orientation,
    girth,
)

COLOR_BUDGET = 1_000_000


@dataclass(frozen=True)
class Hypergraph:
    n: int
    t: int
    edges: tuple[tuple[int, ...], ...]

    def __init__(self, n: int, t: int, edges: Iterable[Iterable[int]] = ()):
        seen = set()
        for e in edges:
            key = tuple(sorted(int(x) for x in e))
            if len(key) != t or len(set(key)) != t:
                raise InvalidParameterError(f"edge {key} does not have {t} distinct vertices")
            if key and not (0 <= key[0] and key[-1] < n):
                raise InvalidParameterError(f"edge {key} has a vertex outside 0..{n - 1}")
            if key in seen:
                raise InvalidParameterError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "t", int(t))
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @classmethod
    def from_graph(cls, g: Graph) -> "Hypergraph":
        return cls(g.n, 2, g.edges)


def fano_plane() -> Hypergraph:
    return Hypergraph(7, 3, [(0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)])


def hypergraph_colorable(h: Hypergraph, colors: int, budget: int = COLOR_BUDGET) -> tuple[bool, list[int] | None]:
    """Decide whether some coloring leaves no edge monochromatic; returns a witness when one exists.

    Backtracks vertex by vertex; an edge whose other vertices all share one
    color forbids that color on its last vertex.
    """
    if colors < 1:
        return h.n == 0, ([] if h.n == 0 else None)
    if h.t == 1 and h.edges:
        return False, None
    incident: list[list[tuple[int, ...]]] = [[] for _ in range(h.n)]
    for e in h.edges:
        for v in e:
            incident[v].append(e)
    order = sorted(range(h.n), key=lambda v: -len(incident[v]))
    color = [-1] * h.n
    nodes = 0

    def forbidden(v: int) -> set[int]:
        out = set()
        for e in incident[v]:
            others = {color[w] for w in e if w != v}
            if len(others) == 1 and -1 not in others:
                out |= others
        return out

    def solve(pos: int, used: int) -> bool:
        nonlocal nodes
        if pos == len(order):
            return True
        v = order[pos]
        bad = forbidden(v)
        for c in range(min(colors, used + 1)):
            if c in bad:
                continue
            nodes += 1
            if nodes > budget:
                raise SizeLimitError(f"hypergraph coloring exceeded its budget of {budget} nodes")
            color[v] = c
            if solve(pos + 1, max(used, c + 1)):
                return True
        color[v] = -1
        return False

    if solve(0, 0):
        return True, list(color)
    return False, None


def incidence_graph(h: Hypergraph) -> Graph:
    """Bipartite vertex/edge incidence graph: hypergraph vertices first, then one vertex per edge."""
    return Graph(h.n + len(h.edges), [(v, h.n + j) for j, e in enumerate(h.edges) for v in e])


def hypergraph_girth(h: Hypergraph, limit: int = 5000) -> float:
    """Length of a shortest Berge cycle (``inf`` if none).

    A Berge cycle of length ``g`` is exactly a cycle of length ``2g`` in the
    incidence graph.
    """
    if h.n + len(h.edges) > limit:
        raise SizeLimitError(f"girth search limited to {limit} incidence vertices")
    g = girth(incidence_graph(h))
    return g if g == INF else g // 2


def _random_edge(rng: random.Random, n: int, t: int) -> tuple[int, ...]:
    return tuple(sorted(rng.sample(range(n), t)))


def find_eh_instance(
    t: int,
    colors: int,
    girth_min: int,
    budget: int,
    seed: int,
    max_vertices: int = 40,
) -> Hypergraph | None:
    """Randomized search for a non-``colors``-colorable ``t``-uniform hypergraph of girth >= ``girth_min``.

    Each attempt picks a vertex count and adds random edges that keep the
    girth high until the hypergraph stops being colorable or no edge fits.
    ``budget`` caps the total number of candidate edges examined.  None only
    means the budget ran out.
    """
    if t < 2 or colors < 1 or girth_min < 2:
        raise InvalidParameterError("need t >= 2, colors >= 1, girth_min >= 2")
    rng = random.Random(seed)
    spent = 0
    attempt = 0
    while spent < budget:
        n = rng.randint(t, max(t, min(max_vertices, t + 3 + attempt)))
        attempt += 1
        edges: list[tuple[int, ...]] = []
        pool = list(itertools.combinations(range(n), t)) if n <= 12 else None
        misses = 0
        while spent < budget and misses < 50:
            spent += 1
            e = rng.choice(pool) if pool else _random_edge(rng, n, t)
            if e in edges:
                misses += 1
                continue
            cand = Hypergraph(n, t, edges + [e])
            if hypergraph_girth(cand) < girth_min:
                misses += 1
                continue
            edges.append(e)
            misses = 0
            try:
                ok, _ = hypergraph_colorable(cand, colors)
            except SizeLimitError:
                break
            if not ok:
                return cand
    return None


def descartes_step(g_i: Graph, d_i: Digraph, h_i: Hypergraph) -> tuple[Graph, Digraph]:
    """One level of the construction: hypergraph vertices, one copy of ``g_i`` per edge, matchings between."""
    if h_i.t != g_i.n:
        raise InvalidParameterError(f"hypergraph must be {g_i.n}-uniform, got {h_i.t}-uniform")
    if not d_i.is_orientation_of(g_i):
        raise InvalidParameterError("d_i is not an orientation of g_i")
    N, n = h_i.n, g_i.n
    edges = []
    arcs = []
    for j, e in enumerate(h_i.edges):
        off = N + j * n
        edges.extend((off + u, off + v) for u, v in g_i.edges)
        arcs.extend((off + u, off + v) for u, v in d_i.arcs)
        for x, hv in enumerate(e):
            edges.append((off + x, hv))
            arcs.append((off + x, hv))
    total = N + len(h_i.edges) * n
    return Graph(total, edges), Digraph(total, arcs)


def descartes_base() -> tuple[Graph, Digraph]:
    return Graph(2, [(0, 1)]), Digraph(2, [(0, 1)])


def descartes(hypergraphs: Sequence[Hypergraph]) -> tuple[Graph, Digraph]:
    """``G_{len+1}`` and its orientation, starting from a single arc ``0 -> 1``."""
    g, d = descartes_base()
    for h in hypergraphs:
        g, d = descartes_step(g, d, h)
    return g, d


@dataclass
class CheckItem:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class Checklist:
    items: list[CheckItem]

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    def __getitem__(self, name: str) -> CheckItem:
        for item in self.items:
            if item.name == name:
                return item
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "items": [i.to_dict() for i in self.items]}


def verify_descartes(g: Graph, d: Digraph, level: int, girth_min: int) -> Checklist:
    """Check the properties promised for level ``level`` (size limits propagate)."""
    items = []
    orient = d.is_orientation_of(g)
    items.append(CheckItem("orientation", orient, "d orients g" if orient else "d is not an orientation of g"))
    acyclic = d.is_acyclic()
    items.append(CheckItem("acyclic", acyclic, ""))
    out = d.max_out_degree()
    items.append(CheckItem("out_degree", out <= level, f"max out-degree {out}, level {level}"))
    degen = degeneracy_orientation(g, level) is not None
    items.append(CheckItem("degenerate", degen, f"{level}-degenerate" if degen else f"not {level}-degenerate"))
    chi = chromatic_number(g)
    items.append(CheckItem("chromatic", chi == level + 1, f"chromatic number {chi}, expected {level + 1}"))
    gi = girth(g)
    need = 3 * girth_min if level >= 2 else 0
    items.append(CheckItem("girth", gi >= need, f"girth {gi}, need >= {need}"))
    if acyclic:
        parity = check_parity_condition(d)
        items.append(CheckItem("parity", parity.passed, "" if parity.passed else f"even path {parity.witness}"))
        counts = {a: count_directed_paths(d, *a) for a in d.arcs}
        bad = [a for a, cnt in counts.items() if cnt != 1]
        items.append(CheckItem("unique_arc_paths", not bad, f"arcs with several paths: {bad[:5]}" if bad else ""))
    else:
        items.append(CheckItem("parity", False, "digraph has a directed cycle"))
        items.append(CheckItem("unique_arc_paths", False, "digraph has a directed cycle"))
    return Checklist(items)


def parse_hypergraph(text: str) -> Hypergraph:
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows or len(rows[0]) != 3:
        raise FormatError("hypergraph: first line must be 'n t m'")
    try:
        n, t, m = (int(x) for x in rows[0])
        edges = [[int(x) for x in r] for r in rows[1:]]
    except ValueError as exc:
        raise FormatError("hypergraph: non-integer entry") from exc
    if len(edges) != m:
        raise FormatError(f"hypergraph: header announces {m} edges, found {len(edges)}")
    try:
        return Hypergraph(n, t, edges)
    except InvalidParameterError as exc:
        raise FormatError(f"hypergraph: {exc}") from exc


def dump_hypergraph(h: Hypergraph) -> str:
    lines = [f"{h.n} {h.t} {len(h.edges)}"] + [" ".join(map(str, e)) for e in h.edges]
    return "\n".join(lines) + "\n"
