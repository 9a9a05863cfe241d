"""The twelve acceptance criteria, each printing one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import itertools
import math
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from fracdp import bounds, constructions, greedy
from fracdp.covers import Cover, enumerate_covers, from_list_assignment, random_cover
from fracdp.graphs import (
    Digraph,
    Graph,
    check_parity_condition,
    chromatic_number,
    complete_bipartite,
    count_directed_paths,
    cycle,
    girth,
    path,
    star,
    theta,
    tree_from_parents,
    unicyclic,
)
from fracdp.solver import (
    find_h_coloring,
    is_quasi_independent,
    max_uniform_fraction,
    pendant_extension,
    theta_dp,
    theta_dp_cycle,
)

sys.path.insert(0, __file__.rsplit("/", 1)[0])
from conftest import all_graphs, all_trees  # noqa: E402


_reporter = None


@pytest.fixture(autouse=True)
def _terminal(request):
    global _reporter
    _reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    yield


def emit(line: str) -> None:
    if _reporter is not None:
        _reporter.ensure_newline()
        _reporter.write_line(line)
    else:
        print(line, flush=True)


@contextmanager
def criterion(number: int, title: str, limit: float | None = None):
    """Time the body, print one verdict line, and fail on an exception or a blown runtime limit."""
    start = time.perf_counter()
    notes: list[str] = []
    try:
        yield notes
    except BaseException as exc:
        emit(f"FAIL criterion {number:2d} {title}: {type(exc).__name__}: {exc}")
        raise
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed >= limit:
        emit(f"FAIL criterion {number:2d} {title}: took {elapsed:.1f}s, limit {limit:.0f}s")
        pytest.fail(f"criterion {number} exceeded {limit}s")
    extra = f" ({'; '.join(notes)})" if notes else ""
    emit(f"PASS criterion {number:2d} {title} [{elapsed:.2f}s]{extra}")


def test_01_fig1_fixtures():
    with criterion(1, "H_1 colorable, H_2 not", limit=1):
        g = cycle(4)
        h1 = Cover(g, 2, {e: (0, 1) for e in g.edges})
        h2 = Cover(g, 2, {e: ((1, 0) if e == (0, 1) else (0, 1)) for e in g.edges})
        sel = find_h_coloring(h1)
        assert sel is not None and all(len(s) == 1 for s in sel) and is_quasi_independent(h1, sel)
        assert find_h_coloring(h2) is None


def test_02_exact_theta():
    with criterion(2, "exact theta_DP on even cycles", limit=300) as notes:
        assert theta_dp(cycle(4), 2).value == 0
        assert theta_dp(cycle(4), 3).value == Fraction(1, 3)
        for n in (4, 6):
            for k in (2, 3, 4):
                v = theta_dp(cycle(n), k).value
                assert v < Fraction(1, 2), (n, k, v)
                notes.append(f"C{n},k={k}: {v}")
        for k in (3, 5):
            v = theta_dp(cycle(4), k).value
            assert v >= Fraction(k - 1, 2 * k), (k, v)


def test_03_cycle_specialisation():
    with criterion(3, "theta_dp_cycle == theta_dp for even n <= 6, k <= 3"):
        for n in (4, 6):
            for k in (1, 2, 3):
                assert theta_dp_cycle(n, k) == theta_dp(cycle(n), k).value, (n, k)


def test_04_trees_and_pendant():
    with criterion(4, "tree values and pendant extension") as notes:
        count = 0
        for n in range(1, 6):
            for t in all_trees(n):
                for k in range(1, 5):
                    expect = Fraction(1) if n == 1 else Fraction(k // 2, k)
                    assert theta_dp(t, k).value == expect
                    count += 1
        notes.append(f"{count} (tree, k) pairs")
        g = unicyclic(4, [0])
        core = cycle(4)
        worst = None
        for c in enumerate_covers(g, 3):
            sub = Cover(core, 3, {e: c.matching[e] for e in core.edges})
            frac, part = max_uniform_fraction(sub)
            sel = pendant_extension(c, dict(enumerate(part)), [4])
            assert sel is not None and is_quasi_independent(c, sel)
            worst = frac if worst is None else min(worst, frac)
        assert worst == Fraction(1, 3) == theta_dp(g, 3).value


def test_05_monte_carlo_adversary():
    with criterion(5, "C_4 k=2 t=1 failure rate 0.50 +- 0.02", limit=30) as notes:
        rep = bounds.monte_carlo_failure_rate(cycle(4), 2, 1, 10_000, seed=20240607)
        notes.append(f"rate {rep.rate:.4f}, 95% CI [{rep.ci_low:.4f}, {rep.ci_high:.4f}]")
        assert abs(rep.rate - 0.5) <= 0.02


def test_06_inequality_chain():
    with criterion(6, "random-cover chain on d 4..200, k 1..100; union bound < 1", limit=10) as notes:
        for d in range(4, 201):
            for k in range(1, 101):
                rep = bounds.verify_theorem12_chain(d, k)
                assert rep.passed, (d, k, [st for st in rep.steps if not st.passed])
        t = math.ceil(2 * math.log(5) / 5 * 100)
        value = bounds.union_bound_value(10, 25, 100, t)
        notes.append(f"union bound {value} at t={t}")
        assert value < 1


def test_07_lemma31():
    with criterion(7, "eta0 < 1/2 with grid check for n <= 20; half case exact"):
        for n in range(1, 21):
            e = bounds.lemma31_eta0(n)
            assert e < 0.5 and bounds.lemma31_grid_check(n, e, 10_000)
        for k in range(2, 21, 2):
            v = bounds.lemma31_half_case(k)
            assert v == Fraction(1, math.comb(k, k // 2)) and v < 1
        assert bounds.lemma31_half_case(2) == Fraction(1, 2) and bounds.lemma31_half_case(4) == Fraction(1, 6)


def test_08_fkg_sweep():
    from fracdp.cli import small_correlation_instances

    with criterion(8, "correlation inequality on every small (D2) instance", limit=300) as notes:
        instances = checks = 0
        for tag, c, d, p in small_correlation_instances():
            instances += 1
            for u in range(c.base.n):
                rep = greedy.check_correlation(c, d, p, u)
                assert rep.passed, (tag, u, rep.counterexample)
                assert rep.exhaustive
                checks += rep.checks
        notes.append(f"{instances} instances, {checks} inequalities, 0 counterexamples")


def test_09_calibration_identity():
    with criterion(9, "calibration identity exact on an arc, 5 SE on K_{5,5}") as notes:
        c = Cover(path(2), 3, {(0, 1): (1, 2, 0)})
        d = Digraph(2, [(0, 1)])
        cfg = greedy.GreedyConfig(k=3, eta=0.2)
        prof = greedy.calibrate(c, d, cfg, exact=True)
        dist = greedy.exact_distribution(c, d, prof)
        assert all(dist.expected_size(u) == Fraction(cfg.target) for u in range(2))

        g = complete_bipartite(5, 5)
        d = Digraph(10, list(g.edges))
        c = random_cover(g, 200, 12)
        cfg = greedy.GreedyConfig(k=200, d=5, epsilon=0.5, seed=3)
        prof = greedy.calibrate(c, d, cfg)
        S, _ = greedy.sample_sets(c, d, prof, 500, seed=77)
        assert greedy.batch_quasi_independent(c, S).all()
        sizes = S.sum(axis=2)
        mean = sizes.mean(axis=0)
        se = sizes.std(axis=0, ddof=1) / math.sqrt(500)
        free = [u for u in range(10) if u not in prof.clamped]
        assert free
        for u in free:
            assert abs(mean[u] - cfg.target) <= 5 * se[u], (u, mean[u], cfg.target, se[u])
        notes.append(f"target {cfg.target:.3f}, unclamped {free}, clamped {sorted(prof.clamped)}")


def test_10_concentration():
    with criterion(10, "tails shrink with k and sit under the fitted curve; c(u) = 1") as notes:
        g = complete_bipartite(5, 5)
        d = Digraph(10, list(g.edges))
        reports = []
        for k in (50, 100, 200):
            c = random_cover(g, k, 1)
            prof = greedy.calibrate(c, d, greedy.GreedyConfig(k=k, d=5, seed=1))
            reports.append(greedy.concentration_experiment(c, d, prof, 2000, seed=5))
        for a, b in zip(reports, reports[1:]):
            for alpha in a.alphas:
                assert all(x >= y for x, y in zip(a.tails[alpha], b.tails[alpha]))
                assert sum(a.tails[alpha]) > sum(b.tails[alpha])
        fitted = greedy.fit_tail_constant(reports)
        for r in reports:
            assert r.within_bound()
            for alpha in r.alphas:
                for u in range(10):
                    assert r.tails[alpha][u] <= 2 * math.exp(-fitted[u] * alpha**2 * r.k) * (1 + 1e-9)
        notes.append(f"fitted C in [{min(fitted):.2f}, {max(fitted):.2f}]")
        for t in [tree_from_parents([0, 0, 1, 1, 2]), star(4), path(6)]:
            assert greedy.lipschitz_constants(Digraph(t.n, list(t.edges))) == [1] * t.n
        _, d2 = constructions.descartes([constructions.Hypergraph.from_graph(cycle(5))])
        assert greedy.lipschitz_constants(d2) == [1] * d2.n


def test_11_descartes_g2():
    with criterion(11, "Descartes G_2 from C_5", limit=10):
        g, d = constructions.descartes([constructions.Hypergraph.from_graph(cycle(5))])
        assert (g.n, g.m) == (15, 15)
        assert chromatic_number(g) == 3 and girth(g) == 15
        assert d.is_acyclic() and d.max_out_degree() <= 2
        assert check_parity_condition(d).passed
        assert all(count_directed_paths(d, u, v) == 1 for u, v in d.arcs)
        assert constructions.verify_descartes(g, d, 2, 5).passed


def list_colorable(g: Graph, lists) -> bool:
    col: dict[int, int] = {}

    def go(v: int) -> bool:
        if v == g.n:
            return True
        for x in sorted(lists[v]):
            if all(col.get(w) != x for w in g.adj[v] if w < v):
                col[v] = x
                if go(v + 1):
                    return True
        col.pop(v, None)
        return False

    return go(0)


def reduction_fixtures():
    for n in range(1, 5):
        yield from all_graphs(n)
    yield from [cycle(5), path(5), star(4), theta(2, 2, 1), complete_bipartite(2, 3),
                Graph(5, list(itertools.combinations(range(5), 2))), unicyclic(3, [0, 1]), unicyclic(4, [2])]


def test_12_list_reduction():
    with criterion(12, "list-coloring reduction matches a direct backtracker") as notes:
        two = [set(s) for s in itertools.combinations(range(3), 2)]
        count = 0
        for g in reduction_fixtures():
            for lists in itertools.chain(itertools.product(two, repeat=g.n), [[{0, 1, 2}] * g.n]):
                c, _ = from_list_assignment(g, lists)
                assert (find_h_coloring(c) is not None) == list_colorable(g, lists), (g, lists)
                count += 1
        notes.append(f"{count} assignments")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
