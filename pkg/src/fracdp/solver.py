"""Exact search over quasi-independent selections.

All searches work with a uniform size ``t`` per list and report ``t/k`` as a
Fraction.  A selection with at least ``t`` indices everywhere can always be
shrunk to exactly ``t`` without creating conflicts, so nothing is lost.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .covers import (
    ENUMERATION_BUDGET,
    UNMATCHED,
    Cover,
    Selection,
    enumerate_covers,
    h_sigma,
    induced_cover,
)
from .errors import InvalidOrderError, InvalidParameterError, SizeLimitError
from .graphs import Graph

SEARCH_BUDGET = 2_000_000


def is_quasi_independent(c: Cover, sel: Sequence[Iterable[int]]) -> bool:
    """True iff no cross-edge joins two selected list vertices."""
    sets = [set(s) for s in sel]
    for (u, v), mp in c.maps:
        for i in sets[u]:
            j = mp[i]
            if j != UNMATCHED and j in sets[v]:
                return False
    return True


def _mask_to_set(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def _image(mask: int, mp: Sequence[int]) -> int:
    out = 0
    i = 0
    while mask:
        if mask & 1 and mp[i] != UNMATCHED:
            out |= 1 << mp[i]
        mask >>= 1
        i += 1
    return out


def _masks_of_size(k: int, t: int) -> list[int]:
    # ascending integer order of bitmasks is colex order of the subsets
    out = []
    if t == 0:
        return [0]
    mask = (1 << t) - 1
    while mask < 1 << k:
        out.append(mask)
        low = mask & -mask
        ripple = mask + low
        mask = ripple | (((mask ^ ripple) >> 2) // low)
    return out


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise SizeLimitError(f"search exceeded its budget of {self.limit} nodes")


def search_uniform(c: Cover, t: int, budget: int = SEARCH_BUDGET) -> Selection | None:
    """A quasi-independent selection with exactly ``t`` indices per list, or None.

    Vertices are fixed in BFS order; candidates run through the ``t``-subsets
    in colex order; after each choice every unfixed neighbour must keep at
    least ``t`` unblocked indices.
    """
    g, k = c.base, c.k
    if not 0 <= t <= k:
        return None
    order, _ = g.bfs_forest()
    cands = _masks_of_size(k, t)
    full = (1 << k) - 1
    counter = _Budget(budget)
    chosen = [0] * g.n
    fixed = [False] * g.n
    blocked = [0] * g.n

    def place(pos: int) -> bool:
        if pos == len(order):
            return True
        u = order[pos]
        free_later = [y for y in g.adj[u] if not fixed[y]]
        for mask in cands:
            if mask & blocked[u]:
                continue
            counter.tick()
            saved = [(y, blocked[y]) for y in free_later]
            ok = True
            for y in free_later:
                blocked[y] |= _image(mask, c.map(u, y))
                if bin(full & ~blocked[y]).count("1") < t:
                    ok = False
                    break
            if ok:
                chosen[u] = mask
                fixed[u] = True
                if place(pos + 1):
                    return True
                fixed[u] = False
            for y, b in saved:
                blocked[y] = b
        return False

    if not place(0):
        return None
    sel = tuple(_mask_to_set(m) for m in chosen)
    assert is_quasi_independent(c, sel)
    return sel


def find_h_coloring(c: Cover, budget: int = SEARCH_BUDGET) -> Selection | None:
    """A one-index-per-list quasi-independent selection, or None."""
    return search_uniform(c, 1, budget)


def uniform_upper_bound(c: Cover) -> int:
    """Largest ``t`` not excluded by a single edge: a matching of size ``s`` forces ``2t <= 2k - s``."""
    best = c.k
    for _, mp in c.maps:
        s = sum(1 for j in mp if j != UNMATCHED)
        best = min(best, (2 * c.k - s) // 2)
    return best


def max_uniform_fraction(c: Cover, budget: int = SEARCH_BUDGET, start: int | None = None) -> tuple[Fraction, Selection]:
    """Largest ``t/k`` admitting a ``t``-per-list quasi-independent selection, with a witness."""
    top = uniform_upper_bound(c) if start is None else min(start, uniform_upper_bound(c))
    for t in range(top, 0, -1):
        sel = search_uniform(c, t, budget)
        if sel is not None:
            return Fraction(t, c.k), sel
    return Fraction(0), tuple(frozenset() for _ in range(c.base.n))


@dataclass(frozen=True)
class ThetaResult:
    value: Fraction
    t: int
    k: int
    cover: Cover
    witness: Selection

    def to_dict(self) -> dict:
        return {
            "theta": f"{self.t}/{self.k}",
            "theta_reduced": str(self.value),
            "t": self.t,
            "k": self.k,
            "worst_cover": self.cover.to_dict(),
            "witness": witness_to_dict(self.witness),
        }


def witness_to_dict(sel: Selection) -> dict[str, list[int]]:
    return {str(u): sorted(s) for u, s in enumerate(sel)}


def _min_over_covers(covers: Iterable[Cover], k: int, budget: int, value_of) -> ThetaResult:
    best: ThetaResult | None = None
    for cov in covers:
        if best is not None:
            # only a strictly smaller value can replace the current minimum
            if best.t == 0:
                break
            if search_uniform(cov, best.t, budget) is not None:
                continue
        t, sel = value_of(cov, None if best is None else best.t - 1)
        if best is None or t < best.t:
            best = ThetaResult(Fraction(t, k), t, k, cov, sel)
    assert best is not None
    return best


def theta_dp(g: Graph, k: int, budget: int = SEARCH_BUDGET, cover_budget: int = ENUMERATION_BUDGET) -> ThetaResult:
    """Exact θ_DP(G, k): the minimum over normalized perfect covers of the best uniform fraction.

    Ties go to the first minimizing cover in enumeration order.
    """
    if k < 1:
        raise InvalidParameterError(f"fold must be positive, got {k}")

    def value_of(cov: Cover, start: int | None) -> tuple[int, Selection]:
        frac, sel = max_uniform_fraction(cov, budget, start)
        return frac.numerator * k // frac.denominator, sel

    return _min_over_covers(enumerate_covers(g, k, cover_budget), k, budget, value_of)


def conjugacy_representatives(k: int) -> list[tuple[int, ...]]:
    """One permutation per cycle type, built from consecutive-block cycles ``l -> l+1 -> ... -> r -> l``."""
    reps = []
    for parts in integer_partitions(k):
        sigma = []
        lo = 0
        for size in parts:
            block = list(range(lo, lo + size))
            sigma.extend(block[1:] + block[:1])
            lo += size
        reps.append(tuple(sigma))
    return reps


def integer_partitions(k: int, largest: int | None = None) -> list[tuple[int, ...]]:
    """Partitions of ``k`` into nonincreasing parts."""
    if largest is None:
        largest = k
    if k == 0:
        return [()]
    out = []
    for first in range(min(k, largest), 0, -1):
        for rest in integer_partitions(k - first, first):
            out.append((first,) + rest)
    return out


def theta_dp_cycle(n: int, k: int, budget: int = SEARCH_BUDGET) -> Fraction:
    """θ_DP of an even cycle from one closing permutation per conjugacy class."""
    if n < 4 or n % 2:
        raise InvalidParameterError(f"theta_dp_cycle needs an even n >= 4, got {n}")
    return min(max_uniform_fraction(h_sigma(n, k, s), budget)[0] for s in conjugacy_representatives(k))


def pendant_extension(
    c: Cover,
    partial: Mapping[int, Iterable[int]],
    order: Sequence[int],
    t: int | None = None,
) -> Selection | None:
    """Extend ``partial`` to every vertex, one vertex of ``order`` at a time.

    At its turn each vertex may see at most one already-coloured neighbour,
    whose ``t`` indices block at most ``t`` of its own; it takes the ``t``
    smallest free ones.  This always succeeds when ``2t <= k``.
    """
    sets = {u: frozenset(s) for u, s in partial.items()}
    sizes = {len(s) for s in sets.values()}
    if len(sizes) > 1:
        raise InvalidOrderError(f"partial selection is not uniform: sizes {sorted(sizes)}")
    if t is None:
        if not sizes:
            raise InvalidOrderError("t must be given when the partial selection is empty")
        t = sizes.pop()
    elif sizes and sizes != {t}:
        raise InvalidOrderError(f"partial selection has size {sizes.pop()}, expected {t}")
    g = c.base
    missing = set(range(g.n)) - set(sets)
    if sorted(order) != sorted(missing) or len(set(order)) != len(order):
        raise InvalidOrderError("order must list every uncoloured vertex exactly once")
    for u in order:
        seen = [w for w in g.adj[u] if w in sets]
        if len(seen) > 1:
            raise InvalidOrderError(f"vertex {u} has {len(seen)} coloured neighbours at its turn")
        blocked: set[int] = set()
        if seen:
            w = seen[0]
            mp = c.map(w, u)
            blocked = {mp[i] for i in sets[w] if mp[i] != UNMATCHED}
        free = [i for i in range(c.k) if i not in blocked]
        if len(free) < t:
            return None
        sets[u] = frozenset(free[:t])
    sel = tuple(sets[u] for u in range(g.n))
    assert is_quasi_independent(c, sel)
    return sel


def peel_order(g: Graph) -> tuple[list[int], list[int]]:
    """Repeatedly strip vertices of degree at most one; returns (removal order, remaining core)."""
    alive = set(range(g.n))
    deg = {v: g.degree(v) for v in alive}
    removed = []
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            if deg[v] <= 1:
                alive.remove(v)
                removed.append(v)
                for w in g.adj[v]:
                    if w in alive:
                        deg[w] -= 1
                changed = True
    return removed, sorted(alive)


def theta_dp_peeled(g: Graph, k: int, budget: int = SEARCH_BUDGET, cover_budget: int = ENUMERATION_BUDGET) -> ThetaResult:
    """θ_DP(G, k) by solving the 2-core exactly and extending over the stripped vertices.

    With an empty core (forests) the extension starts from nothing at
    ``t = floor(k/2)``, or ``t = k`` for edgeless graphs.
    """
    removed, core = peel_order(g)
    extension = list(reversed(removed))

    def value_of(cov: Cover, start: int | None) -> tuple[int, Selection]:
        if core:
            sub, relabel_map = induced_cover(cov, core)
            frac, sub_sel = max_uniform_fraction(sub, budget, start)
            t = frac.numerator * k // frac.denominator
            partial = {v: sub_sel[relabel_map[v]] for v in core}
        else:
            t = k if g.m == 0 else k // 2
            partial = {}
        sel = pendant_extension(cov, partial, extension, t)
        assert sel is not None
        return t, sel

    return _min_over_covers(enumerate_covers(g, k, cover_budget), k, budget, value_of)
