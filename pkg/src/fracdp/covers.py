"""k-fold covers of a graph, stored as one partial injection per edge.

Vertex ``(u, i)`` of the cover graph is index ``i`` of list ``L(u)``.  For an
edge ``u < v`` the stored map sends ``i`` to the index of its partner in
``L(v)``, or to ``UNMATCHED``.  Lists are implicit cliques, so nothing about
intra-list edges is stored.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    FormatError,
    InvalidParameterError,
    NormalizeRequiresPerfectError,
    SizeLimitError,
    UnsupportedError,
)
from .graphs import Graph, cycle

UNMATCHED = -1
ENUMERATION_BUDGET = 200_000

Selection = tuple[frozenset, ...]


def selection(sets: Iterable[Iterable[int]]) -> Selection:
    return tuple(frozenset(s) for s in sets)


def derive_seed(*keys: int) -> int:
    """64-bit seed derived from a tuple of nonnegative integers (BLAKE2b of their encoding)."""
    h = hashlib.blake2b(digest_size=8)
    for key in keys:
        if key < 0:
            raise InvalidParameterError(f"seed components must be nonnegative, got {key}")
        raw = key.to_bytes((key.bit_length() + 7) // 8 or 1, "little")
        h.update(len(raw).to_bytes(4, "little"))
        h.update(raw)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class Cover:
    base: Graph
    k: int
    maps: tuple[tuple[tuple[int, int], tuple[int, ...]], ...] = field(default=())

    def __init__(self, base: Graph, k: int, maps: Mapping[tuple[int, int], Sequence[int]] | None = None):
        """Build a cover; edges missing from ``maps`` carry the empty matching.

        No validity checking happens here so that :func:`validate` can report
        what is wrong with hand-built data.
        """
        raw: dict[tuple[int, int], tuple[int, ...]] = {}
        for (u, v), mp in (maps or {}).items():
            if u > v:
                raise InvalidParameterError(f"matching keys must be (u, v) with u < v, got {(u, v)}")
            raw[(int(u), int(v))] = tuple(int(x) for x in mp)
        for e in base.edges:
            raw.setdefault(e, (UNMATCHED,) * k)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "maps", tuple(sorted(raw.items())))

    @cached_property
    def matching(self) -> dict[tuple[int, int], tuple[int, ...]]:
        return dict(self.maps)

    @cached_property
    def _directed(self) -> dict[tuple[int, int], tuple[int, ...]]:
        out = {}
        for (u, v), mp in self.maps:
            inv = [UNMATCHED] * self.k
            for i, j in enumerate(mp):
                if 0 <= j < self.k:
                    inv[j] = i
            out[(u, v)] = mp
            out[(v, u)] = tuple(inv)
        return out

    def map(self, u: int, v: int) -> tuple[int, ...]:
        """The matching read from ``L(u)`` into ``L(v)``, for either orientation of the edge."""
        return self._directed[(u, v)]

    def is_perfect(self) -> bool:
        return all(sorted(mp) == list(range(self.k)) for _, mp in self.maps)

    def cross_edges(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        return [((u, i), (v, j)) for (u, v), mp in self.maps for i, j in enumerate(mp) if j != UNMATCHED]

    def to_dict(self) -> dict:
        return {
            "n": self.base.n,
            "k": self.k,
            "edges": [{"u": u, "v": v, "map": list(mp)} for (u, v), mp in self.maps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Cover":
        try:
            n, k = int(data["n"]), int(data["k"])
            items = {(int(e["u"]), int(e["v"])): list(e["map"]) for e in data["edges"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"cover JSON: {exc}") from exc
        maps = {}
        for (u, v), mp in items.items():
            if u > v:
                if sorted(x for x in mp if x != UNMATCHED) != sorted(set(x for x in mp if x != UNMATCHED)):
                    raise FormatError(f"cover JSON: edge ({u}, {v}) is reversed and not injective")
                inv = [UNMATCHED] * k
                for i, j in enumerate(mp):
                    if 0 <= j < k:
                        inv[j] = i
                u, v, mp = v, u, inv
            maps[(u, v)] = mp
        try:
            base = Graph(n, maps.keys())
        except InvalidParameterError as exc:
            raise FormatError(f"cover JSON: {exc}") from exc
        return cls(base, k, maps)

    @classmethod
    def from_json(cls, text: str) -> "Cover":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FormatError(f"cover JSON: {exc}") from exc


@dataclass(frozen=True)
class Violation:
    condition: str
    edge: tuple[int, int] | None
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed


def validate(c: Cover) -> ValidationReport:
    """Check the cover conditions; each violation names its condition and edge.

    C1: every matched index lies in some list.  C3: matchings only on base
    edges.  C4: each matching is injective.  C2 holds by construction.
    """
    out = []
    if c.k < 1:
        out.append(Violation("C1", None, f"fold must be positive, got {c.k}"))
    for (u, v), mp in c.maps:
        if not c.base.has_edge(u, v):
            out.append(Violation("C3", (u, v), f"cross-edges between L({u}) and L({v}) but {u}{v} is not an edge"))
        if len(mp) != c.k:
            out.append(Violation("C1", (u, v), f"matching has {len(mp)} entries for a {c.k}-fold cover"))
        bad = [j for j in mp if j != UNMATCHED and not 0 <= j < c.k]
        if bad:
            out.append(Violation("C1", (u, v), f"targets {bad} lie outside L({v})"))
        hit = [j for j in mp if j != UNMATCHED]
        if len(hit) != len(set(hit)):
            out.append(Violation("C4", (u, v), f"E(L({u}), L({v})) is not a matching: {list(mp)}"))
    return ValidationReport(tuple(out))


def from_list_assignment(g: Graph, lists: Sequence[Iterable]) -> tuple[Cover, tuple[tuple, ...]]:
    """Cover whose colorings correspond to proper list colorings.

    Index ``i`` of ``L(u)`` stands for the ``i``-th smallest color of
    ``lists[u]``; the returned tables translate indices back to colors.
    """
    if len(lists) != g.n:
        raise InvalidParameterError(f"need one list per vertex, got {len(lists)} for {g.n} vertices")
    tables = tuple(tuple(sorted(set(lst))) for lst in lists)
    if any(not t for t in tables):
        raise InvalidParameterError("every list must be nonempty")
    sizes = {len(t) for t in tables}
    if len(sizes) > 1:
        raise UnsupportedError(f"lists of unequal sizes {sorted(sizes)} are not supported")
    k = sizes.pop() if sizes else 1
    maps = {}
    for u, v in g.edges:
        where = {color: j for j, color in enumerate(tables[v])}
        maps[(u, v)] = [where.get(color, UNMATCHED) for color in tables[u]]
    return Cover(g, k, maps), tables


def selection_to_colors(sel: Selection, tables: Sequence[Sequence]) -> list[set]:
    return [{tables[u][i] for i in s} for u, s in enumerate(sel)]


def relabel(c: Cover, perms: Sequence[Sequence[int]]) -> Cover:
    """Isomorphic cover in which index ``i`` of ``L(u)`` becomes ``perms[u][i]``."""
    maps = {}
    for (u, v), mp in c.maps:
        new = [UNMATCHED] * c.k
        for i, j in enumerate(mp):
            if j != UNMATCHED:
                new[perms[u][i]] = perms[v][j]
        maps[(u, v)] = new
    return Cover(c.base, c.k, maps)


def _inverse(p: Sequence[int]) -> list[int]:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return inv


def forest_relabelling(c: Cover) -> list[list[int]]:
    """Per-list relabellings that turn every BFS-forest edge into the identity."""
    order, parent = c.base.bfs_forest()
    perms: list[list[int]] = [list(range(c.k)) for _ in range(c.base.n)]
    for x in order:
        if x in parent:
            p = parent[x]
            mp = c.map(p, x)
            # perms[x](mp(i)) = perms[p](i)
            new = [0] * c.k
            for i in range(c.k):
                new[mp[i]] = perms[p][i]
            perms[x] = new
    return perms


def normalize(c: Cover) -> Cover:
    """Isomorphic cover with identity matchings on the BFS forest from each component's lowest vertex."""
    if not c.is_perfect():
        raise NormalizeRequiresPerfectError("normalize needs every matching to be a perfect matching")
    return relabel(c, forest_relabelling(c))


def forest_edges(g: Graph) -> set[tuple[int, int]]:
    _, parent = g.bfs_forest()
    return {(min(x, p), max(x, p)) for x, p in parent.items()}


def cover_count(g: Graph, k: int) -> int:
    return math.factorial(k) ** g.cycle_rank()


def enumerate_covers(g: Graph, k: int, budget: int = ENUMERATION_BUDGET) -> Iterator[Cover]:
    """All normalized perfect covers: identity on forest edges, any permutation elsewhere."""
    if k < 1:
        raise InvalidParameterError(f"fold must be positive, got {k}")
    total = cover_count(g, k)
    if total > budget:
        raise SizeLimitError(f"{total} normalized covers exceed the enumeration budget {budget}")
    tree = forest_edges(g)
    free = [e for e in g.edges if e not in tree]
    ident = tuple(range(k))
    base = {e: ident for e in tree}
    for choice in itertools.product(itertools.permutations(range(k)), repeat=len(free)):
        maps = dict(base)
        maps.update(zip(free, choice))
        yield Cover(g, k, maps)


def edge_rng(seed: int, u: int, v: int) -> random.Random:
    """Independent stream for the edge ``uv``, keyed by ``(seed, u, v)`` and not by iteration order."""
    return random.Random(derive_seed(seed, u, v))


def random_cover(g: Graph, k: int, seed: int) -> Cover:
    """Each edge gets an independent uniformly random perfect matching."""
    maps = {}
    for u, v in g.edges:
        perm = list(range(k))
        edge_rng(seed, u, v).shuffle(perm)
        maps[(u, v)] = perm
    return Cover(g, k, maps)


def h_sigma(n: int, k: int, sigma: Sequence[int]) -> Cover:
    """Cover of ``cycle(n)``: identity on ``i -- i+1`` and ``sigma`` from ``L(0)`` into ``L(n-1)``."""
    if n < 4 or n % 2:
        raise InvalidParameterError(f"h_sigma needs an even cycle length >= 4, got {n}")
    if sorted(sigma) != list(range(k)):
        raise InvalidParameterError(f"sigma must be a permutation of 0..{k - 1}")
    g = cycle(n)
    ident = tuple(range(k))
    maps = {e: ident for e in g.edges}
    maps[(0, n - 1)] = tuple(sigma)
    return Cover(g, k, maps)


def induced_cover(c: Cover, vertices: Iterable[int]) -> tuple[Cover, dict[int, int]]:
    sub, relabel_map = c.base.induced(vertices)
    maps = {}
    for (u, v), mp in c.maps:
        if u in relabel_map and v in relabel_map:
            maps[(relabel_map[u], relabel_map[v])] = mp
    return Cover(sub, c.k, maps), relabel_map
