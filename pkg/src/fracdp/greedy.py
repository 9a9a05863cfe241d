"""Random greedy fractional coloring along an acyclic orientation.

Vertices are handled sinks first.  Every list element ``x`` of ``L(u)``
gets an independent coin ``xi(x)`` with bias ``p(u)``; ``x`` survives into
``L'(u)`` if none of its cross-edge partners towards out-neighbours was
selected, and is selected if it survives and its coin came up 1.

Coins for one run are the ``(n, k)`` uniform array drawn from
``numpy.random.default_rng([seed, trial])``: entry ``(v, i)`` decides
``xi`` for index ``i`` of ``L(v)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .covers import UNMATCHED, Cover, Selection
from .errors import (
    InvalidParameterError,
    OrientationMismatchError,
    ParityConflictError,
    SizeLimitError,
)
from .graphs import Digraph, path_counts_from, reach_set, reachability
from .solver import is_quasi_independent

EXACT_LIMIT = 20
Y_SUBSET_LIMIT = 2**8


def _check_orientation(c: Cover, d: Digraph) -> None:
    if not d.is_orientation_of(c.base):
        raise OrientationMismatchError("digraph is not an orientation of the cover's base graph")


def cross_orientation(c: Cover, d: Digraph) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Every cross-edge as a pair ``((u, i), (v, j))`` directed like the arc between ``u`` and ``v``."""
    _check_orientation(c, d)
    out = []
    for (a, b), mp in c.maps:
        for i, j in enumerate(mp):
            if j == UNMATCHED:
                continue
            out.append(((a, i), (b, j)) if d.has_arc(a, b) else ((b, j), (a, i)))
    return out


def cross_digraph(c: Cover, d: Digraph) -> Digraph:
    """The oriented cross-edges as a digraph on ``n*k`` vertices, ``(u, i)`` numbered ``u*k + i``."""
    k = c.k
    return Digraph(c.base.n * k, [(x[0] * k + x[1], y[0] * k + y[1]) for x, y in cross_orientation(c, d)])


@dataclass(frozen=True)
class BlockingSets:
    A: frozenset[int]
    B: frozenset[int]
    U1: frozenset[int]
    U2: frozenset[int]


def _parity_paths(d: Digraph, u: int, allowed: frozenset[int]):
    """BFS over (vertex, parity of path length from u); returns parent pointers."""
    parent = {(u, 0): None}
    queue = [(u, 0)]
    for state in queue:
        x, par = state
        for y in d.out_nbrs[x]:
            if y in allowed and (y, 1 - par) not in parent:
                parent[(y, 1 - par)] = state
                queue.append((y, 1 - par))
    return parent


def _walk(parent, state) -> tuple[int, ...]:
    out = []
    while state is not None:
        out.append(state[0])
        state = parent[state]
    return tuple(reversed(out))


def blocking_sets(d: Digraph, u: int) -> BlockingSets:
    """Split ``R+[u]`` into the part that cannot influence ``N+[u]`` and the rest, 2-coloured by path parity."""
    reach = reachability(d, u, "forward", closed=True)
    back = reach_set(d, (u,) + d.out_nbrs[u], "backward")
    A = reach - back
    B = reach & back
    parent = _parity_paths(d, u, B)
    U1, U2 = set(), set()
    for v in sorted(B):
        even, odd = (v, 0) in parent, (v, 1) in parent
        if even and odd:
            raise ParityConflictError(
                f"vertex {v} is reached from {u} by paths of both parities",
                (u, v, _walk(parent, (v, 1)), _walk(parent, (v, 0))),
            )
        (U1 if even else U2).add(v)
    return BlockingSets(frozenset(A), frozenset(B), frozenset(U1), frozenset(U2))


def _beta_gap(lam: float, alpha: float) -> float:
    return 1 - lam - math.exp(-(1 + alpha) * lam)


def beta_for_alpha(alpha: float, grid: int = 1000) -> float:
    """Largest β with ``1 - λ >= exp(-(1+α)λ)`` on all of ``(0, β]``.

    The gap is concave, zero at 0 with slope α, so the answer is its unique
    positive root; the lower bisection end is returned so the condition holds
    at β itself.
    """
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = (lo + hi) / 2
        if _beta_gap(mid, alpha) >= 0:
            lo = mid
        else:
            hi = mid
    lams = np.linspace(lo / grid, lo, grid)
    assert np.all(1 - lams >= np.exp(-(1 + alpha) * lams) - 1e-15)
    return lo


def default_alpha(epsilon: float) -> float:
    return 1 / math.sqrt(1 - epsilon) - 1 - 1e-6


@dataclass(frozen=True)
class GreedyConfig:
    k: int
    d: float | None = None
    epsilon: float = 0.5
    alpha: float | None = None
    beta: float | None = None
    eta: float | None = None
    calibration_trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidParameterError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        alpha = default_alpha(self.epsilon) if self.alpha is None else self.alpha
        if alpha <= 0 or (1 + alpha) ** 2 * (1 - self.epsilon) >= 1:
            raise InvalidParameterError(f"alpha={alpha} violates (1+alpha)^2 (1-epsilon) < 1")
        limit = beta_for_alpha(alpha)
        beta = limit if self.beta is None else self.beta
        if not 0 < beta < 1 or beta > limit:
            raise InvalidParameterError(f"beta={beta} must lie in (0, {limit}] for alpha={alpha}")
        if self.eta is None:
            if self.d is None or self.d <= 1:
                raise InvalidParameterError("give eta directly or a degree bound d > 1")
            eta = (1 - self.epsilon) * math.log(self.d) / self.d
        else:
            eta = self.eta
        if self.k < 1 or self.calibration_trials < 1:
            raise InvalidParameterError("k and calibration_trials must be positive")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "eta", eta)

    @property
    def target(self) -> float:
        """The calibrated expected selection size ``(1+α)ηk``."""
        return (1 + self.alpha) * self.eta * self.k


@dataclass(frozen=True)
class ProbabilityProfile:
    p: tuple
    estimates: tuple = ()
    stderr: tuple = ()
    clamped: frozenset[int] = frozenset()
    exact: bool = False

    def __post_init__(self):
        if any(not 0 <= x <= 1 for x in self.p):
            raise InvalidParameterError("probabilities must lie in [0, 1]")

    @classmethod
    def uniform(cls, n: int, value) -> "ProbabilityProfile":
        return cls(tuple([value] * n))

    def as_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.p])

    def to_dict(self) -> dict:
        return {
            "p": [float(x) for x in self.p],
            "estimates": [float(x) for x in self.estimates],
            "stderr": [float(x) for x in self.stderr],
            "clamped": sorted(self.clamped),
            "exact": self.exact,
        }


@dataclass
class GreedyOutcome:
    S: Selection
    lprime_sizes: tuple[int, ...]
    flags: tuple[int, ...] = ()
    xi: np.ndarray | None = None

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.S)

    def to_dict(self) -> dict:
        return {
            "S": {str(u): sorted(s) for u, s in enumerate(self.S)},
            "sizes": {str(u): len(s) for u, s in enumerate(self.S)},
            "lprime_sizes": {str(u): n for u, n in enumerate(self.lprime_sizes)},
            "flags": list(self.flags),
        }


@lru_cache(maxsize=256)
def _map_arrays(c: Cover, d: Digraph) -> tuple[tuple[tuple[int, np.ndarray, np.ndarray], ...], ...]:
    """Per vertex: (out-neighbour, matched source indices, their targets)."""
    out = []
    for u in range(c.base.n):
        row = []
        for v in d.out_nbrs[u]:
            mp = np.array(c.map(u, v))
            src = np.nonzero(mp != UNMATCHED)[0]
            row.append((v, src, mp[src]))
        out.append(tuple(row))
    return tuple(out)


def _simulate(c: Cover, d: Digraph, xi: np.ndarray, vertices: Sequence[int] | None = None):
    """Run the process on a batch of coin arrays ``xi`` of shape ``(T, n, k)``.

    ``vertices`` restricts the run to a successor-closed set.
    """
    T, n, k = xi.shape
    arrays = _map_arrays(c, d)
    order = [u for u in reversed(d.topological_order()) if vertices is None or u in vertices]
    S = np.zeros((T, n, k), dtype=bool)
    lp = np.zeros((T, n), dtype=np.int64)
    for u in order:
        blocked = np.zeros((T, k), dtype=bool)
        for v, src, dst in arrays[u]:
            blocked[:, src] |= S[:, v, dst]
        free = ~blocked
        lp[:, u] = free.sum(axis=1)
        S[:, u] = free & xi[:, u]
    return S, lp


def draw_uniforms(n: int, k: int, seed: int, trial: int = 0) -> np.ndarray:
    return np.random.default_rng([seed, trial]).random((n, k))


def coins(p: ProbabilityProfile, uniforms: np.ndarray) -> np.ndarray:
    return uniforms < p.as_array()[:, None]


def run(
    c: Cover,
    d: Digraph,
    p: ProbabilityProfile,
    seed: int = 0,
    trial: int = 0,
    xi: np.ndarray | None = None,
    record: bool = False,
) -> GreedyOutcome:
    """One sample of the process; pass ``xi`` (shape ``(n, k)``, bool) to fix the coins."""
    _check_orientation(c, d)
    n, k = c.base.n, c.k
    if xi is None:
        xi = coins(p, draw_uniforms(n, k, seed, trial))
    xi = np.asarray(xi, dtype=bool)
    S, lp = _simulate(c, d, xi[None])
    sel = tuple(frozenset(np.nonzero(S[0, u])[0].tolist()) for u in range(n))
    assert is_quasi_independent(c, sel)
    return GreedyOutcome(sel, tuple(lp[0].tolist()), tuple(sorted(p.clamped)), xi if record else None)


def batch_quasi_independent(c: Cover, S: np.ndarray) -> np.ndarray:
    ok = np.ones(S.shape[0], dtype=bool)
    for (u, v), mp in c.maps:
        mp = np.array(mp)
        src = np.nonzero(mp != UNMATCHED)[0]
        ok &= ~np.any(S[:, u, src] & S[:, v, mp[src]], axis=1)
    return ok


def sample_sets(c: Cover, d: Digraph, p: ProbabilityProfile, trials: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``trials`` independent runs as boolean membership arrays ``S[t, u, i]`` plus ``#L'(u)`` counts.

    Raises AssertionError if any run is not quasi-independent.
    """
    _check_orientation(c, d)
    n, k = c.base.n, c.k
    xi = np.stack([coins(p, draw_uniforms(n, k, seed, t)) for t in range(trials)])
    S, lp = _simulate(c, d, xi)
    assert batch_quasi_independent(c, S).all()
    return S, lp


def sample(c: Cover, d: Digraph, p: ProbabilityProfile, trials: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``(#S(u), #L'(u))`` arrays of shape ``(trials, n)``; run ``t`` is the one :func:`run` gives for ``trial=t``."""
    S, lp = sample_sets(c, d, p, trials, seed)
    return S.sum(axis=2), lp


class ExactDistribution(dict):
    """Maps each outcome (a tuple of per-vertex frozensets) to its probability."""

    def expected_size(self, u: int):
        return sum(prob * len(out[u]) for out, prob in self.items())

    def prob_selected(self, u: int, i: int):
        return sum(prob for out, prob in self.items() if i in out[u])


def _exact(c: Cover, d: Digraph, probs: Sequence, vertices: Sequence[int] | None = None) -> ExactDistribution:
    n, k = c.base.n, c.k
    order = [u for u in reversed(d.topological_order()) if vertices is None or u in vertices]
    states: dict[tuple, object] = {tuple(frozenset() for _ in range(n)): 1}
    for u in order:
        q = probs[u]
        nxt: dict[tuple, object] = {}
        for state, weight in states.items():
            blocked = set()
            for v in d.out_nbrs[u]:
                mp = c.map(u, v)
                blocked |= {i for i in range(k) if mp[i] != UNMATCHED and mp[i] in state[v]}
            free = [i for i in range(k) if i not in blocked]
            # coins on blocked indices are summed out: their weights total 1
            for r in range(len(free) + 1):
                w = q**r * (1 - q) ** (len(free) - r)
                if w == 0:
                    continue
                for chosen in itertools.combinations(free, r):
                    new = state[:u] + (frozenset(chosen),) + state[u + 1 :]
                    nxt[new] = nxt.get(new, 0) + weight * w
        states = nxt
    return ExactDistribution(states)


def exact_distribution(c: Cover, d: Digraph, p: ProbabilityProfile, limit: int = EXACT_LIMIT) -> ExactDistribution:
    """Exact law of ``(S(u))_u`` by summing Bernoulli weights over every coin assignment.

    Probabilities are Fractions when ``p`` holds Fractions.
    """
    _check_orientation(c, d)
    if c.k * c.base.n > limit:
        raise SizeLimitError(f"exact distribution needs k*n <= {limit}, got {c.k * c.base.n}")
    return _exact(c, d, p.p)


def _as_fraction(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def calibrate(c: Cover, d: Digraph, cfg: GreedyConfig, exact: bool = False) -> ProbabilityProfile:
    """Choose ``p(u) = (1+α)ηk / E[#L'(u)]`` sinks first, clamping at β.

    ``E[#L'(u)]`` is estimated from ``cfg.calibration_trials`` runs restricted
    to ``R+(u)``, or computed exactly (as a Fraction) when ``exact``.  Vertices
    whose estimate falls below ``(1+α)ηk/β`` are clamped to β and flagged.
    """
    _check_orientation(c, d)
    if cfg.d is not None and d.max_out_degree() > cfg.d:
        raise InvalidParameterError(f"orientation has out-degree {d.max_out_degree()} > d={cfg.d}")
    n, k = c.base.n, c.k
    if k != cfg.k:
        raise InvalidParameterError(f"cover is {k}-fold but config says k={cfg.k}")
    if exact and k * n > EXACT_LIMIT:
        raise SizeLimitError(f"exact calibration needs k*n <= {EXACT_LIMIT}, got {k * n}")
    p: list = [Fraction(0) if exact else 0.0] * n
    est: list = [0] * n
    err: list = [0.0] * n
    clamped = set()
    target = Fraction(cfg.target) if exact else cfg.target
    beta = Fraction(cfg.beta) if exact else cfg.beta
    for u in reversed(d.topological_order()):
        succ = reachability(d, u, "forward", closed=False)
        if exact:
            dist = _exact(c, d, p, succ)
            mean = 0
            for out, prob in dist.items():
                blocked = set()
                for v in d.out_nbrs[u]:
                    mp = c.map(u, v)
                    blocked |= {i for i in range(k) if mp[i] != UNMATCHED and mp[i] in out[v]}
                mean += prob * (k - len(blocked))
            est[u] = mean
        else:
            T = cfg.calibration_trials
            uni = np.random.default_rng([cfg.seed, u]).random((T, n, k))
            xi = uni < np.array([float(x) for x in p])[None, :, None]
            xi[:, u] = False
            _, lp = _simulate(c, d, xi, succ | {u})
            est[u] = float(lp[:, u].mean())
            err[u] = float(lp[:, u].std(ddof=1) / math.sqrt(T)) if T > 1 else 0.0
        if est[u] <= 0 or target > beta * est[u]:
            p[u] = beta
            clamped.add(u)
        else:
            p[u] = target / est[u]
    return ProbabilityProfile(tuple(p), tuple(est), tuple(err), frozenset(clamped), exact)


@dataclass
class CorrelationReport:
    vertex: int
    passed: bool
    worst_margin: Fraction | float | None
    counterexample: dict | None
    checks: int
    exhaustive: bool

    def to_dict(self) -> dict:
        return {
            "vertex": self.vertex,
            "passed": self.passed,
            "worst_margin": None if self.worst_margin is None else float(self.worst_margin),
            "counterexample": self.counterexample,
            "checks": self.checks,
            "exhaustive": self.exhaustive,
        }


def check_correlation(
    c: Cover,
    d: Digraph,
    p: ProbabilityProfile,
    u: int,
    seed: int = 0,
    limit: int = EXACT_LIMIT,
) -> CorrelationReport:
    """Verify ``Pr[Y ∩ S = ∅ | S(A) = Q] >= ∏ Pr[y ∉ S | S(A) = Q]`` from the exact law.

    Runs over every ``Q`` of positive probability and every ``Y`` inside
    ``L(N+(u))``; with more than ``2**8`` candidate sets, 256 of them are
    sampled and the report says so.  Arithmetic is exact (Fractions).
    """
    sets = blocking_sets(d, u)
    frac_p = ProbabilityProfile(tuple(_as_fraction(x) for x in p.p))
    dist = exact_distribution(c, d, frac_p, limit)
    A = sorted(sets.A)
    ys = [(v, i) for v in d.out_nbrs[u] for i in range(c.k)]
    groups: dict[tuple, list] = {}
    for out, prob in dist.items():
        q = tuple(out[v] for v in A)
        mask = sum(1 << j for j, (v, i) in enumerate(ys) if i in out[v])
        groups.setdefault(q, []).append((mask, prob))
    if 2 ** len(ys) <= Y_SUBSET_LIMIT:
        y_masks = range(2 ** len(ys))
        exhaustive = True
    else:
        rng = np.random.default_rng([seed, u])
        y_masks = [int(sum(1 << j for j in np.nonzero(rng.random(len(ys)) < 0.5)[0])) for _ in range(Y_SUBSET_LIMIT)]
        exhaustive = False
    worst = None
    counter = None
    checks = 0
    for q, rows in groups.items():
        total = sum(prob for _, prob in rows)
        if total == 0:
            continue
        miss = [sum(prob for mask, prob in rows if not mask >> j & 1) / total for j in range(len(ys))]
        for ym in y_masks:
            lhs = sum(prob for mask, prob in rows if not mask & ym) / total
            rhs = Fraction(1)
            for j in range(len(ys)):
                if ym >> j & 1:
                    rhs *= miss[j]
            checks += 1
            margin = lhs - rhs
            if worst is None or margin < worst:
                worst = margin
                if margin < 0:
                    counter = {
                        "Q": {str(v): sorted(s) for v, s in zip(A, q)},
                        "Y": [list(ys[j]) for j in range(len(ys)) if ym >> j & 1],
                        "lhs": float(lhs),
                        "rhs": float(rhs),
                    }
    return CorrelationReport(u, worst is None or worst >= 0, worst, counter, checks, exhaustive)


def lipschitz_constants(d: Digraph) -> list[int]:
    """``c(u)``: the largest number of directed u->v paths over all ``v`` (at least 1)."""
    return [max(path_counts_from(d, u)) for u in range(d.n)]


def tail_constants(d: Digraph) -> list[float]:
    """Bounded-differences constant for ``#S(u)`` as a function of ``k`` times the coins.

    A coin in ``L(v)`` moves ``#S(u)`` by at most the number of u->v paths
    and coins outside ``L(R+[u])`` do not move it, so McDiarmid gives
    ``Pr[|#S(u) - E| > αk] <= 2 exp(-C(u) α² k)`` with
    ``C(u) = 2 / sum_v paths(u, v)^2``.
    """
    return [2 / sum(x * x for x in path_counts_from(d, u)) for u in range(d.n)]


@dataclass
class ConcentrationReport:
    k: int
    trials: int
    seed: int
    alphas: tuple[float, ...]
    mean: list[float]
    var: list[float]
    tails: dict[float, list[float]]
    lipschitz: list[int]
    azuma_C: list[float]
    fitted_C: list[float]

    def azuma_tail_bound(self, u: int, alpha: float) -> float:
        return 2 * math.exp(-self.azuma_C[u] * alpha**2 * self.k)

    def within_bound(self) -> bool:
        """Every observed tail sits below the bounded-differences curve."""
        return all(
            self.tails[a][u] <= self.azuma_tail_bound(u, a) for a in self.alphas for u in range(len(self.mean))
        )

    def relative_deviation(self) -> list[float]:
        return [math.sqrt(v) / m if m > 0 else 0.0 for v, m in zip(self.var, self.mean)]

    def rows(self) -> list[dict]:
        out = []
        for u in range(len(self.mean)):
            base = {"k": self.k, "vertex": u}
            out.append(base | {"statistic": "mean", "value": self.mean[u]})
            out.append(base | {"statistic": "var", "value": self.var[u]})
            out.append(base | {"statistic": "lipschitz", "value": self.lipschitz[u]})
            out.append(base | {"statistic": "azuma_C", "value": self.azuma_C[u]})
            out.append(base | {"statistic": "fitted_C", "value": self.fitted_C[u]})
            for a in self.alphas:
                out.append(base | {"statistic": f"tail@{a}", "value": self.tails[a][u]})
        return out


def _fit(tail: float, alpha: float, k: int) -> float:
    return -math.log(tail / 2) / (alpha**2 * k) if tail > 0 else math.inf


def concentration_experiment(
    c: Cover,
    d: Digraph,
    p: ProbabilityProfile,
    trials: int,
    seed: int,
    alphas: Sequence[float] = (0.02, 0.05, 0.1),
) -> ConcentrationReport:
    """Empirical spread of ``#S(u)`` against the bounded-differences bound.

    Tails are the frequencies of ``|#S(u) - mean| > αk`` around the
    empirical mean.  ``azuma_C`` comes from :func:`tail_constants`;
    ``fitted_C[u]`` is the largest constant the observed tails allow
    (``inf`` when all of them are zero).
    """
    sizes, _ = sample(c, d, p, trials, seed)
    n, k = c.base.n, c.k
    mean = sizes.mean(axis=0)
    var = sizes.var(axis=0, ddof=1) if trials > 1 else np.zeros(n)
    tails = {a: [float(np.mean(np.abs(sizes[:, u] - mean[u]) > a * k)) for u in range(n)] for a in alphas}
    fitted = [min(_fit(tails[a][u], a, k) for a in alphas) for u in range(n)]
    return ConcentrationReport(
        k, trials, seed, tuple(alphas), mean.tolist(), var.tolist(), tails, lipschitz_constants(d), tail_constants(d), fitted
    )


def fit_tail_constant(reports: Sequence[ConcentrationReport]) -> list[float]:
    """One ``Ĉ`` per vertex valid for every report at once: the minimum of their fitted constants."""
    n = len(reports[0].mean)
    return [min(r.fitted_C[u] for r in reports) for u in range(n)]
