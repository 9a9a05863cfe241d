"""Closed-form probabilities, union bounds and inequality chains for random covers.

A random cover puts an independent uniform perfect matching on every edge.
For a fixed selection with ``t`` indices per list, one edge is conflict-free
with probability ``C(k-t, t) / C(k, t)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .covers import derive_seed, random_cover
from .errors import InvalidParameterError, OutOfScopeError
from .graphs import Graph
from .solver import SEARCH_BUDGET, search_uniform

EXACT_THRESHOLD = 1000


def log_comb(a: int, b: int) -> float:
    if b < 0 or b > a:
        return -math.inf
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def quasi_independence_probability(k: int, t: int, m: int) -> Fraction:
    """Exact probability that a fixed ``t``-per-list selection spans no cross-edge over ``m`` random edges."""
    if not 0 <= t <= k or m < 0:
        raise InvalidParameterError(f"need 0 <= t <= k and m >= 0, got k={k}, t={t}, m={m}")
    return Fraction(math.comb(k - t, t), math.comb(k, t)) ** m


def union_bound_log(n: int, m: int, k: int, t: int) -> float:
    """Natural log of ``C(k-t,t)^m C(k,t)^(n-m)``; ``-inf`` when the bound is zero."""
    if not 0 <= t <= k:
        raise InvalidParameterError(f"need 0 <= t <= k, got k={k}, t={t}")
    good = log_comb(k - t, t)
    if good == -math.inf:
        return -math.inf if m > 0 else n * log_comb(k, t)
    return m * good + (n - m) * log_comb(k, t)


def union_bound_exact(n: int, m: int, k: int, t: int) -> Fraction:
    if not 0 <= t <= k:
        raise InvalidParameterError(f"need 0 <= t <= k, got k={k}, t={t}")
    return quasi_independence_probability(k, t, m) * math.comb(k, t) ** n


def union_bound_value(n: int, m: int, k: int, t: int, exact_threshold: int = EXACT_THRESHOLD) -> float:
    """Upper bound on the probability that some ``t``-per-list selection is quasi-independent.

    Uses big-integer arithmetic when every argument is at most
    ``exact_threshold`` and log-space floats otherwise.
    """
    if max(n, m, k) <= exact_threshold:
        val = union_bound_exact(n, m, k, t)
        try:
            return float(val)
        except OverflowError:
            return math.inf
    lg = union_bound_log(n, m, k, t)
    return 0.0 if lg == -math.inf else (math.inf if lg > 709 else math.exp(lg))


@dataclass
class ChainStep:
    name: str
    lhs: float
    rhs: float
    relation: str
    passed: bool


@dataclass
class BoundReport:
    d: float
    k: int
    eta0: float
    eta: Fraction
    steps: list[ChainStep] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["eta"] = str(self.eta)
        out["passed"] = self.passed
        return out

    def csv_row(self) -> dict:
        row = {"d": self.d, "k": self.k, "eta0": self.eta0, "eta": str(self.eta), "passed": self.passed}
        for s in self.steps:
            row[f"{s.name}_lhs"] = s.lhs
            row[f"{s.name}_rhs"] = s.rhs
            row[f"{s.name}_ok"] = s.passed
        return row


def _root(log_value: float, power: int) -> float:
    return 0.0 if log_value == -math.inf else math.exp(log_value / power)


def _step(name: str, lhs: float, rhs: float, relation: str, rel_tol: float = 1e-9) -> ChainStep:
    if relation == "<":
        ok = lhs < rhs
    else:
        ok = lhs <= rhs * (1 + rel_tol) + 1e-300
    return ChainStep(name, lhs, rhs, relation, ok)


def verify_theorem12_chain(d: float, k: int) -> BoundReport:
    """Evaluate every inequality of the random-cover lower-bound argument at ``(d, k)``.

    The binomial steps are compared after taking ``(eta*k)``-th roots so that
    every reported value stays finite.
    """
    if d < 4:
        raise OutOfScopeError(f"the chain is only claimed for d >= 4, got d={d}")
    if k < 1:
        raise InvalidParameterError(f"k must be positive, got {k}")
    eta0 = 2 * math.log(d) / d
    s = math.ceil(eta0 * k)
    eta = Fraction(s, k)
    e = float(eta)
    rep = BoundReport(float(d), k, eta0, eta)
    lc_good = log_comb(k - s, s)
    lc_all = log_comb(k, s)
    ratio_root = _root(lc_good - lc_all if lc_good != -math.inf else -math.inf, s)
    rep.steps.append(_step("ratio", ratio_root, 1 - e, "<="))
    rep.steps.append(_step("binomial", _root(lc_all, s), math.e / e, "<="))
    combined = -math.inf if lc_good == -math.inf else (d / 2) * lc_good - (d / 2 - 1) * lc_all
    rep.steps.append(_step("combined", _root(combined, s), math.e * (1 - e) ** (d / 2) / e, "<="))
    rep.steps.append(_step("one_minus_eta", math.e * (1 - e) ** (d / 2), math.e * math.exp(-e * d / 2), "<="))
    rep.steps.append(_step("exp_to_inverse_d", math.e * math.exp(-e * d / 2), math.e / d, "<="))
    rep.steps.append(_step("inverse_d_below_eta", math.e / d, e, "<"))
    return rep


def _lemma31_gap(n: int, eta: np.ndarray | float) -> np.ndarray | float:
    """``log LHS - log RHS`` of the n+1-edge inequality; negative means it holds."""
    x = 1 - 2 * np.asarray(eta, dtype=float)
    lhs = (n + 1) * x * (1 + np.log1p(-np.asarray(eta, dtype=float)) - np.log(x))
    rhs = -np.asarray(eta, dtype=float) * np.log(eta)
    return lhs - rhs


def lemma31_grid_check(n: int, eta0: float, points: int = 10_000) -> bool:
    grid = np.linspace(eta0, 0.5, points, endpoint=False)
    return bool(np.all(_lemma31_gap(n, grid) < 0))


def lemma31_eta0(n: int, scan: int = 100_000, points: int = 10_000) -> float:
    """A threshold ``eta0 < 1/2`` above which the n+1-edge inequality holds, verified on a grid.

    Locates the last violating point of a fine scan, bisects the crossing,
    then nudges upward until the verification grid passes.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be positive, got {n}")
    grid = np.linspace(0, 0.5, scan + 1)[1:-1]
    gap = _lemma31_gap(n, grid)
    bad = np.nonzero(gap >= 0)[0]
    if len(bad) == 0:
        lo, hi = 0.0, float(grid[0])
    else:
        i = int(bad[-1])
        lo, hi = float(grid[i]), float(grid[i + 1])
    for _ in range(200):
        mid = (lo + hi) / 2
        if _lemma31_gap(n, mid) >= 0:
            lo = mid
        else:
            hi = mid
    eta0 = hi
    step = (0.5 - eta0) * 1e-6
    while not lemma31_grid_check(n, eta0, points):
        eta0 += step
        step *= 2
    assert eta0 < 0.5
    return eta0


def lemma31_half_case(k: int) -> Fraction:
    if k < 2 or k % 2:
        raise InvalidParameterError(f"k must be even and >= 2, got {k}")
    val = Fraction(1, math.comb(k, k // 2))
    assert val < 1
    return val


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class MonteCarloReport:
    graph_n: int
    graph_m: int
    k: int
    t: int
    trials: int
    seed: int
    failures: int
    rate: float
    ci_low: float
    ci_high: float

    def to_dict(self) -> dict:
        return asdict(self)


def trial_fails(g: Graph, k: int, t: int, seed: int, trial: int, budget: int = SEARCH_BUDGET) -> bool:
    cov = random_cover(g, k, derive_seed(seed, trial))
    return search_uniform(cov, t, budget) is None


def monte_carlo_failure_rate(
    g: Graph,
    k: int,
    t: int,
    trials: int,
    seed: int,
    threads: int = 1,
    budget: int = SEARCH_BUDGET,
) -> MonteCarloReport:
    """Fraction of random covers with no ``t``-per-list quasi-independent selection.

    Trial ``i`` uses the cover seeded by ``(seed, i)``, so the result does not
    depend on ``threads``.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be positive, got {trials}")
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            fails = sum(pool.map(lambda i: trial_fails(g, k, t, seed, i, budget), range(trials)))
    else:
        fails = sum(trial_fails(g, k, t, seed, i, budget) for i in range(trials))
    lo, hi = wilson_interval(fails, trials)
    return MonteCarloReport(g.n, g.m, k, t, trials, seed, fails, fails / trials, lo, hi)
