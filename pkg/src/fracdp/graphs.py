"""Graphs, orientations, generators and structural predicates.

Vertices are dense integers ``0..n-1``.  Generators use these numberings:

* ``cycle(n)``: edges ``i -- i+1`` and ``n-1 -- 0``.
* ``path(n)``: ``n`` vertices, edges ``i -- i+1``.
* ``complete_bipartite(a, b)``: parts ``0..a-1`` and ``a..a+b-1``.
* ``theta(p1, p2, p3)``: hubs ``0`` and ``1``; the internal vertices of the
  three hub-to-hub paths follow in order, path by path.
* ``unicyclic(c, parents)``: ``cycle(c)`` on ``0..c-1``; vertex ``c+i`` hangs
  off ``parents[i]`` (which must be an earlier vertex).
* ``tree_from_parents(parents)``: vertex ``i+1`` hangs off ``parents[i]``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError, InvalidParameterError, NotAcyclicError, SizeLimitError

INF = float("inf")

CHROMATIC_LIMIT = 64
MAD_LIMIT = 20


@dataclass(frozen=True)
class Graph:
    """A simple undirected graph. ``edges`` is stored sorted, each as ``(u, v)`` with ``u < v``."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise InvalidParameterError(f"vertex count must be nonnegative, got {n}")
        seen = set()
        for e in edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise InvalidParameterError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameterError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidParameterError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", tuple(sorted(seen)))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adj(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(a)) for a in nbrs)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_index

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def components(self) -> list[list[int]]:
        """Connected components, each listed in BFS order from its lowest vertex."""
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if not seen[s]:
                seen[s] = True
                order = [s]
                queue = deque([s])
                while queue:
                    x = queue.popleft()
                    for y in self.adj[x]:
                        if not seen[y]:
                            seen[y] = True
                            order.append(y)
                            queue.append(y)
                comps.append(order)
        return comps

    def bfs_forest(self) -> tuple[list[int], dict[int, int]]:
        """BFS order over all components and the parent of every non-root vertex."""
        order: list[int] = []
        parent: dict[int, int] = {}
        seen = [False] * self.n
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            order.append(s)
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in self.adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        parent[y] = x
                        order.append(y)
                        queue.append(y)
        return order, parent

    def cycle_rank(self) -> int:
        return self.m - self.n + len(self.components())

    def is_bipartite(self) -> bool:
        side = [-1] * self.n
        for comp in self.components():
            side[comp[0]] = 0
            for x in comp:
                for y in self.adj[x]:
                    if side[y] == -1:
                        side[y] = 1 - side[x]
                    elif side[y] == side[x]:
                        return False
        return True

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", dict[int, int]]:
        """Induced subgraph, relabelled in increasing vertex order, with the old->new map."""
        keep = sorted(set(vertices))
        relabel = {v: i for i, v in enumerate(keep)}
        edges = [(relabel[u], relabel[v]) for u, v in self.edges if u in relabel and v in relabel]
        return Graph(len(keep), edges), relabel

    def without_edge(self, u: int, v: int) -> "Graph":
        e = (min(u, v), max(u, v))
        return Graph(self.n, [f for f in self.edges if f != e])


@dataclass(frozen=True)
class Digraph:
    """An orientation: arcs ``(u, v)`` with at most one direction per vertex pair."""

    n: int
    arcs: tuple[tuple[int, int], ...]

    def __init__(self, n: int, arcs: Iterable[Sequence[int]] = ()):
        seen = set()
        pairs = set()
        for a in arcs:
            u, v = (int(x) for x in a)
            if u == v:
                raise InvalidParameterError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameterError(f"arc ({u}, {v}) has an endpoint outside 0..{n - 1}")
            pair = (min(u, v), max(u, v))
            if pair in pairs:
                raise InvalidParameterError(f"pair {pair} oriented twice")
            pairs.add(pair)
            seen.add((u, v))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "arcs", tuple(sorted(seen)))

    @cached_property
    def out_nbrs(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.arcs:
            out[u].append(v)
        return tuple(tuple(o) for o in out)

    @cached_property
    def in_nbrs(self) -> tuple[tuple[int, ...], ...]:
        inn: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.arcs:
            inn[v].append(u)
        return tuple(tuple(i) for i in inn)

    @cached_property
    def arc_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.arcs)

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.arc_set

    def max_out_degree(self) -> int:
        return max((len(o) for o in self.out_nbrs), default=0)

    def underlying(self) -> Graph:
        return Graph(self.n, self.arcs)

    def reversed(self) -> "Digraph":
        return Digraph(self.n, [(v, u) for u, v in self.arcs])

    def is_orientation_of(self, g: Graph) -> bool:
        return self.n == g.n and self.underlying().edges == g.edges

    @cached_property
    def _topo(self) -> tuple[int, ...] | None:
        indeg = [len(i) for i in self.in_nbrs]
        queue = deque(v for v in range(self.n) if indeg[v] == 0)
        order = []
        while queue:
            x = queue.popleft()
            order.append(x)
            for y in self.out_nbrs[x]:
                indeg[y] -= 1
                if indeg[y] == 0:
                    queue.append(y)
        return tuple(order) if len(order) == self.n else None

    def is_acyclic(self) -> bool:
        return self._topo is not None

    def topological_order(self) -> tuple[int, ...]:
        """Sources first. Raises NotAcyclicError on a directed cycle."""
        if self._topo is None:
            raise NotAcyclicError("digraph has a directed cycle")
        return self._topo


# -- generators ---------------------------------------------------------------


def cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidParameterError(f"cycle needs n >= 3, got {n}")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    if n < 1:
        raise InvalidParameterError(f"path needs n >= 1, got {n}")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    if a < 1 or b < 1:
        raise InvalidParameterError(f"complete_bipartite needs a, b >= 1, got {a}, {b}")
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def complete(n: int) -> Graph:
    if n < 1:
        raise InvalidParameterError(f"complete graph needs n >= 1, got {n}")
    return Graph(n, itertools.combinations(range(n), 2))


def empty(n: int) -> Graph:
    return Graph(n, [])


def star(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def theta(p1: int, p2: int, p3: int) -> Graph:
    lengths = (p1, p2, p3)
    if min(lengths) < 1:
        raise InvalidParameterError(f"theta path lengths must be >= 1, got {lengths}")
    if sum(1 for p in lengths if p == 1) > 1:
        raise InvalidParameterError("theta graph with two length-1 paths is not simple")
    edges = []
    nxt = 2
    for p in lengths:
        prev = 0
        for _ in range(p - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, 1))
    return Graph(nxt, edges)


def tree_from_parents(parents: Sequence[int]) -> Graph:
    edges = []
    for i, p in enumerate(parents):
        if not 0 <= p <= i:
            raise InvalidParameterError(f"parent of vertex {i + 1} must be in 0..{i}, got {p}")
        edges.append((p, i + 1))
    return Graph(len(parents) + 1, edges)


def unicyclic(cycle_n: int, pendant_spec: Sequence[int] = ()) -> Graph:
    base = cycle(cycle_n)
    edges = list(base.edges)
    for i, p in enumerate(pendant_spec):
        v = cycle_n + i
        if not 0 <= p < v:
            raise InvalidParameterError(f"pendant vertex {v} must attach to 0..{v - 1}, got {p}")
        edges.append((p, v))
    return Graph(cycle_n + len(pendant_spec), edges)


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.replace(";", ",").split(",") if x.strip()]


def from_spec(spec: str) -> Graph:
    """Parse a generator spec such as ``cycle:4``, ``complete_bipartite:5,5`` or ``unicyclic:4,0``."""
    kind, _, args = spec.partition(":")
    kind = kind.strip().lower()
    try:
        nums = _ints(args)
    except ValueError as exc:
        raise InvalidParameterError(f"bad generator arguments in {spec!r}") from exc
    builders = {
        "cycle": lambda: cycle(*nums),
        "path": lambda: path(*nums),
        "complete_bipartite": lambda: complete_bipartite(*nums),
        "k": lambda: complete(*nums),
        "complete": lambda: complete(*nums),
        "empty": lambda: empty(*nums),
        "star": lambda: star(*nums),
        "theta": lambda: theta(*nums),
        "unicyclic": lambda: unicyclic(nums[0], nums[1:]),
        "tree": lambda: tree_from_parents(nums),
    }
    if kind not in builders:
        raise InvalidParameterError(f"unknown graph generator {kind!r}")
    try:
        return builders[kind]()
    except (TypeError, IndexError) as exc:
        raise InvalidParameterError(f"wrong number of arguments in {spec!r}") from exc


# -- structural predicates ----------------------------------------------------


def girth(g: Graph) -> float:
    """Length of a shortest cycle, ``inf`` for forests."""
    best = INF
    for s in range(g.n):
        dist = {s: 0}
        parent = {s: -1}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in g.adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best if best == INF else int(best)


def _max_clique(g: Graph) -> int:
    adj = [0] * g.n
    for u, v in g.edges:
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    best = 0

    def expand(size: int, cand: int) -> None:
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        if size + bin(cand).count("1") <= best:
            return
        while cand:
            if size + bin(cand).count("1") <= best:
                return
            v = cand.bit_length() - 1
            cand &= ~(1 << v)
            expand(size + 1, cand & adj[v])

    expand(0, (1 << g.n) - 1)
    return best


def _greedy_colors(g: Graph) -> int:
    order = sorted(range(g.n), key=lambda v: -g.degree(v))
    color: dict[int, int] = {}
    for v in order:
        used = {color[w] for w in g.adj[v] if w in color}
        c = 0
        while c in used:
            c += 1
        color[v] = c
    return max(color.values(), default=-1) + 1


def _colorable(g: Graph, q: int) -> bool:
    color = [-1] * g.n

    def pick() -> int:
        best, best_key = -1, None
        for v in range(g.n):
            if color[v] == -1:
                sat = len({color[w] for w in g.adj[v] if color[w] != -1})
                key = (sat, g.degree(v))
                if best_key is None or key > best_key:
                    best, best_key = v, key
        return best

    def solve(done: int, used: int) -> bool:
        if done == g.n:
            return True
        v = pick()
        forbidden = {color[w] for w in g.adj[v]}
        # colors beyond the first unused one are symmetric
        for c in range(min(q, used + 1)):
            if c not in forbidden:
                color[v] = c
                if solve(done + 1, max(used, c + 1)):
                    return True
        color[v] = -1
        return False

    return solve(0, 0)


def chromatic_number(g: Graph, limit: int = CHROMATIC_LIMIT) -> int:
    """Exact chromatic number by DSATUR backtracking between clique and greedy bounds."""
    if g.n > limit:
        raise SizeLimitError(f"chromatic_number limited to {limit} vertices, got {g.n}")
    if g.n == 0:
        return 0
    lo, hi = max(1, _max_clique(g)), _greedy_colors(g)
    for q in range(lo, hi):
        if _colorable(g, q):
            return q
    return hi


def degeneracy_orientation(g: Graph, d: int) -> Digraph | None:
    """Acyclic orientation with out-degrees at most ``d``, or None if ``g`` is not d-degenerate."""
    if d < 0:
        raise InvalidParameterError(f"d must be nonnegative, got {d}")
    deg = [g.degree(v) for v in range(g.n)]
    removed = [False] * g.n
    arcs = []
    for _ in range(g.n):
        v = min((x for x in range(g.n) if not removed[x]), key=lambda x: (deg[x], x))
        if deg[v] > d:
            return None
        removed[v] = True
        for w in g.adj[v]:
            if not removed[w]:
                arcs.append((v, w))
                deg[w] -= 1
    return Digraph(g.n, arcs)


def degeneracy(g: Graph) -> int:
    d = 0
    while degeneracy_orientation(g, d) is None:
        d += 1
    return d


@dataclass(frozen=True)
class ParityCheck:
    """Outcome of the even-path check; ``witness`` is ``(u, v, path)`` on failure."""

    passed: bool
    witness: tuple[int, int, tuple[int, ...]] | None = None

    def __bool__(self) -> bool:
        return self.passed


def _parity_reach(d: Digraph) -> tuple[list[int], list[int]]:
    """Bitsets of targets reachable by odd / even (length >= 2) directed paths."""
    order = d.topological_order()
    odd = [0] * d.n
    even = [0] * d.n
    for v in reversed(order):
        o = e = 0
        for w in d.out_nbrs[v]:
            o |= (1 << w) | even[w]
            e |= odd[w]
        odd[v], even[v] = o, e
    return odd, even


def _even_walk(d: Digraph, odd: list[int], even: list[int], u: int, v: int) -> tuple[int, ...]:
    walk = [u]
    x, remaining_odd = u, False
    while True:
        for w in d.out_nbrs[x]:
            if remaining_odd and w == v:
                return tuple(walk + [v])
            table = even if remaining_odd else odd
            if table[w] >> v & 1:
                break
        walk.append(w)
        x, remaining_odd = w, not remaining_odd


def check_parity_condition(d: Digraph) -> ParityCheck:
    """Pass iff no arc ``(u, v)`` is shadowed by a directed even-length u->v path."""
    odd, even = _parity_reach(d)
    for u, v in d.arcs:
        if even[u] >> v & 1:
            return ParityCheck(False, (u, v, _even_walk(d, odd, even, u, v)))
    return ParityCheck(True)


def count_directed_paths(d: Digraph, u: int, v: int) -> int:
    """Number of directed u->v paths (1 when ``u == v``)."""
    return path_counts_from(d, u)[v]


def path_counts_from(d: Digraph, u: int) -> list[int]:
    order = d.topological_order()
    count = [0] * d.n
    count[u] = 1
    for x in order:
        if count[x]:
            for y in d.out_nbrs[x]:
                count[y] += count[x]
    return count


def max_average_degree(g: Graph, limit: int = MAD_LIMIT) -> Fraction:
    """Exact maximum of ``2|E(G[U])| / |U|`` over nonempty vertex subsets."""
    if g.n > limit:
        raise SizeLimitError(f"max_average_degree limited to {limit} vertices, got {g.n}")
    if g.n == 0:
        raise InvalidParameterError("maximum average degree of the empty graph is undefined")
    masks = np.arange(1 << g.n, dtype=np.int64)
    bits = [(masks >> v) & 1 for v in range(g.n)]
    size = np.sum(bits, axis=0)
    ecount = np.zeros_like(masks)
    for u, v in g.edges:
        ecount += bits[u] & bits[v]
    best = Fraction(0)
    for s in range(1, g.n + 1):
        e = int(ecount[size == s].max())
        best = max(best, Fraction(2 * e, s))
    return best


def reachability(d: Digraph, u: int, direction: str = "forward", closed: bool = False) -> frozenset[int]:
    """``R+(u)``, ``R-(u)`` or their closed versions ``R+[u]``, ``R-[u]``."""
    if direction not in ("forward", "backward"):
        raise InvalidParameterError(f"direction must be 'forward' or 'backward', got {direction!r}")
    nbrs = d.out_nbrs if direction == "forward" else d.in_nbrs
    seen = set()
    stack = list(nbrs[u])
    while stack:
        x = stack.pop()
        if x not in seen:
            seen.add(x)
            stack.extend(nbrs[x])
    if closed:
        seen.add(u)
    return frozenset(seen)


def reach_set(d: Digraph, vertices: Iterable[int], direction: str = "forward") -> frozenset[int]:
    """Closed reachability from a set of vertices."""
    out: set[int] = set()
    for v in vertices:
        out |= reachability(d, v, direction, closed=True)
    return frozenset(out)


# -- text formats -------------------------------------------------------------


def _parse_pairs(text: str, what: str) -> tuple[int, list[tuple[int, int]]]:
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or len(lines[0]) != 2:
        raise FormatError(f"{what}: first line must be 'n m'")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        pairs = [(int(a), int(b)) for a, b in (ln for ln in lines[1:])]
    except ValueError as exc:
        raise FormatError(f"{what}: non-integer or malformed line") from exc
    if len(pairs) != m:
        raise FormatError(f"{what}: header announces {m} lines, found {len(pairs)}")
    return n, pairs


def parse_graph(text: str) -> Graph:
    n, pairs = _parse_pairs(text, "graph")
    try:
        return Graph(n, pairs)
    except InvalidParameterError as exc:
        raise FormatError(f"graph: {exc}") from exc


def dump_graph(g: Graph) -> str:
    return "".join([f"{g.n} {g.m}\n"] + [f"{u} {v}\n" for u, v in g.edges])


def parse_digraph(text: str) -> Digraph:
    n, pairs = _parse_pairs(text, "digraph")
    try:
        return Digraph(n, pairs)
    except InvalidParameterError as exc:
        raise FormatError(f"digraph: {exc}") from exc


def dump_digraph(d: Digraph) -> str:
    return "".join([f"{d.n} {len(d.arcs)}\n"] + [f"{u} {v}\n" for u, v in d.arcs])
