"""Command-line driver: ``fracdp <subcommand> ...``.

Every JSON document carries a ``config`` block with the resolved arguments
(seed included, thread count excluded); ``fracdp replay FILE`` re-runs that
block and prints byte-identical output.  CSV output carries the same block
on a leading ``# config:`` line.

Exit codes: 0 success, 1 usage or I/O error, 2 budget exceeded,
3 a property check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import secrets
import sys
from fractions import Fraction
from typing import Callable

from . import bounds, constructions, covers, graphs, greedy, solver
from .errors import FracDPError, SizeLimitError

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_CHECK = 0, 1, 2, 3
RANDOMIZED = {"adversary", "greedy"}
NOT_PERSISTED = {"threads", "output", "auto_seed"}


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """``"5"``, ``"2..5"`` or ``"2,3,7"`` to a list of integers."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer range {text!r}") from exc


def parse_reals(text: str) -> list[float]:
    text = str(text).strip()
    if ".." in text:
        return [float(x) for x in parse_range(text)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def load_graph(source: str) -> graphs.Graph:
    if os.path.exists(source):
        return graphs.parse_graph(_read(source))
    if ":" not in source:
        raise UsageError(f"{source!r} is neither a file nor a generator spec like cycle:4")
    return graphs.from_spec(source)


def load_orientation(source: str | None, g: graphs.Graph) -> graphs.Digraph:
    """A digraph file, ``bipartite`` (lower side -> upper side) or ``degeneracy`` (the default)."""
    if source in (None, "degeneracy"):
        d = graphs.degeneracy_orientation(g, graphs.degeneracy(g))
        assert d is not None
        return d
    if source == "bipartite":
        side = _two_colouring(g)
        if side is None:
            raise UsageError("graph is not bipartite")
        return graphs.Digraph(g.n, [(u, v) if side[u] == 0 else (v, u) for u, v in g.edges])
    d = graphs.parse_digraph(_read(source))
    d.topological_order()
    return d


def _two_colouring(g: graphs.Graph) -> list[int] | None:
    side = [-1] * g.n
    for comp in g.components():
        side[comp[0]] = 0
        stack = [comp[0]]
        while stack:
            x = stack.pop()
            for y in g.adj[x]:
                if side[y] < 0:
                    side[y] = 1 - side[x]
                    stack.append(y)
                elif side[y] == side[x]:
                    return None
    return side


def load_cover(source: str, g: graphs.Graph, k: int, seed: int | None) -> covers.Cover:
    if source == "identity":
        return covers.Cover(g, k, {e: tuple(range(k)) for e in g.edges})
    if source == "random":
        return covers.random_cover(g, k, covers.derive_seed(seed, 0))
    c = covers.Cover.from_json(_read(source))
    if c.base != g or c.k != k:
        raise UsageError("cover file does not match --graph and --k")
    return c


# -- subcommands ---------------------------------------------------------------


def cmd_theta(args) -> tuple[dict, list[dict], int]:
    g = load_graph(args.graph)
    ks = parse_range(args.k)
    rows = []
    for k in ks:
        if args.method == "cycle":
            if g != graphs.cycle(g.n):
                raise UsageError("--method cycle needs --graph cycle:n")
            value = solver.theta_dp_cycle(g.n, k, args.budget)
            row = {"k": k, "theta": str(value), "theta_reduced": str(value)}
        else:
            solve = solver.theta_dp_peeled if args.method == "peeled" else solver.theta_dp
            res = solve(g, k, args.budget, args.cover_budget)
            row = res.to_dict()
            value = res.value
            row["k"] = k
        row["below_half"] = value < Fraction(1, 2)
        rows.append(row)
    table = [{"k": r["k"], "theta": r["theta"], "theta_reduced": r["theta_reduced"], "below_half": r["below_half"]}
             for r in rows]
    return {"rows": rows}, table, EXIT_OK


def cmd_adversary(args) -> tuple[dict, list[dict], int]:
    g = load_graph(args.graph)
    k = int(args.k)
    if args.t is not None:
        t = args.t
    elif args.eta is not None:
        t = math.ceil(args.eta * k)
    else:
        raise UsageError("adversary needs --t or --eta")
    rep = bounds.monte_carlo_failure_rate(g, k, t, args.trials, args.seed, args.threads, args.budget)
    out = rep.to_dict()
    out["union_bound"] = bounds.union_bound_value(g.n, g.m, k, t)
    if args.verbose:
        out["trials_failed"] = [i for i in range(args.trials) if bounds.trial_fails(g, k, t, args.seed, i, args.budget)]
    return out, [{k: v for k, v in out.items() if k != "trials_failed"}], EXIT_OK


def cmd_bounds(args) -> tuple[dict, list[dict], int]:
    reports = [bounds.verify_theorem12_chain(d, k) for d in parse_reals(args.d) for k in parse_range(args.k)]
    ok = all(r.passed for r in reports)
    out = {"count": len(reports), "passed": ok, "failures": [r.to_dict() for r in reports if not r.passed]}
    if args.union:
        n, m, k, t = parse_range(args.union)
        out["union_bound"] = {"n": n, "m": m, "k": k, "t": t, "value": bounds.union_bound_value(n, m, k, t)}
    if args.verbose:
        out["reports"] = [r.to_dict() for r in reports]
    return out, [r.csv_row() for r in reports], EXIT_OK if ok else EXIT_CHECK


def cmd_eta0(args) -> tuple[dict, list[dict], int]:
    rows = []
    for n in parse_range(args.n):
        e = bounds.lemma31_eta0(n)
        rows.append({"n": n, "eta0": e, "below_half": e < 0.5, "grid_ok": bounds.lemma31_grid_check(n, e)})
    ok = all(r["below_half"] and r["grid_ok"] for r in rows)
    return {"rows": rows, "passed": ok}, rows, EXIT_OK if ok else EXIT_CHECK


def cmd_greedy(args) -> tuple[dict, list[dict], int]:
    g = load_graph(args.graph)
    k = int(args.k)
    d = load_orientation(args.orientation, g)
    c = load_cover(args.cover, g, k, args.seed)
    degree = args.d if args.d is not None else max(2, d.max_out_degree())
    cfg = greedy.GreedyConfig(
        k=k,
        d=degree,
        epsilon=args.epsilon,
        alpha=args.alpha,
        eta=args.eta,
        calibration_trials=args.calibration_trials,
        seed=args.seed,
    )
    prof = greedy.calibrate(c, d, cfg, exact=args.exact)
    sizes, _ = greedy.sample(c, d, prof, args.trials, covers.derive_seed(args.seed, 1))
    mean = sizes.mean(axis=0)
    se = sizes.std(axis=0, ddof=1) / math.sqrt(args.trials) if args.trials > 1 else mean * 0
    rows = []
    ok = True
    for u in range(g.n):
        z = (mean[u] - cfg.target) / se[u] if se[u] > 0 else (0.0 if mean[u] == cfg.target else math.inf)
        within = bool(abs(z) <= 5)
        if u not in prof.clamped:
            ok &= within
        rows.append({
            "vertex": u,
            "p": float(prof.p[u]),
            "estimate_lprime": float(prof.estimates[u]),
            "mean_size": float(mean[u]),
            "stderr": float(se[u]),
            "z": float(z),
            "clamped": u in prof.clamped,
            "within_5se": within,
        })
    out = {
        "target": cfg.target,
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "eta": cfg.eta,
        "d": degree,
        "profile": prof.to_dict(),
        "vertices": rows,
        "flags": sorted(prof.clamped),
        "all_quasi_independent": True,
        "passed": ok,
    }
    return out, rows, EXIT_OK if ok else EXIT_CHECK


def fkg_fixtures(name: str, p_value: float) -> list[tuple[str, covers.Cover, graphs.Digraph, greedy.ProbabilityProfile]]:
    if name == "path3-k2":
        g = graphs.path(3)
        d = graphs.Digraph(3, [(0, 1), (1, 2)])
        c = covers.Cover(g, 2, {e: (0, 1) for e in g.edges})
        return [("path3-k2", c, d, greedy.ProbabilityProfile.uniform(3, Fraction(p_value)))]
    if name == "exhaustive-small":
        return list(small_correlation_instances())
    raise UsageError(f"unknown fixture {name!r}; known: path3-k2, exhaustive-small")


def small_correlation_instances(grid=(Fraction(1, 5), Fraction(1, 2), Fraction(4, 5)), k: int = 2):
    """Every acyclic (D2) orientation of every graph on at most 3 vertices with
    identity or swap matchings, crossed with every ``p`` in ``grid^V``."""
    perms = [tuple(range(k)), tuple(reversed(range(k)))]
    for n in (1, 2, 3):
        pairs = list(itertools.combinations(range(n), 2))
        for r in range(len(pairs) + 1):
            for edges in itertools.combinations(pairs, r):
                g = graphs.Graph(n, edges)
                for flips in itertools.product((False, True), repeat=len(edges)):
                    d = graphs.Digraph(n, [(v, u) if f else (u, v) for (u, v), f in zip(edges, flips)])
                    if not d.is_acyclic() or not graphs.check_parity_condition(d).passed:
                        continue
                    for maps in itertools.product(perms, repeat=len(edges)):
                        c = covers.Cover(g, k, dict(zip(edges, maps)))
                        for ps in itertools.product(grid, repeat=n):
                            tag = f"n={n} arcs={list(d.arcs)} maps={list(maps)} p={[str(x) for x in ps]}"
                            yield tag, c, d, greedy.ProbabilityProfile(tuple(ps))


def cmd_fkg(args) -> tuple[dict, list[dict], int]:
    rows = []
    ok = True
    checks = 0
    for tag, c, d, p in fkg_fixtures(args.fixture, args.p):
        for u in range(c.base.n):
            rep = greedy.check_correlation(c, d, p, u)
            checks += rep.checks
            ok &= rep.passed
            if args.verbose or not rep.passed or args.fixture != "exhaustive-small":
                rows.append({"instance": tag} | rep.to_dict())
    out = {"fixture": args.fixture, "passed": ok, "checks": checks, "reports": rows}
    table = [{"instance": r["instance"], "vertex": r["vertex"], "passed": r["passed"],
              "worst_margin": r["worst_margin"], "checks": r["checks"]} for r in rows]
    return out, table, EXIT_OK if ok else EXIT_CHECK


def cmd_descartes(args) -> tuple[dict, list[dict], int]:
    files = args.hypergraph or []
    if len(files) != args.level - 1:
        raise UsageError(f"level {args.level} needs {args.level - 1} hypergraph file(s), got {len(files)}")
    hs = [constructions.parse_hypergraph(_read(f)) for f in files]
    g, d = constructions.descartes(hs)
    if args.orientation:
        d = graphs.parse_digraph(_read(args.orientation))
    girth_min = args.girth_min
    if girth_min is None:
        girth_min = min((int(constructions.hypergraph_girth(h)) if constructions.hypergraph_girth(h) != graphs.INF
                         else 0 for h in hs), default=0)
    checklist = constructions.verify_descartes(g, d, args.level, girth_min)
    if args.write_graph:
        _write(args.write_graph, graphs.dump_graph(g))
    if args.write_digraph:
        _write(args.write_digraph, graphs.dump_digraph(d))
    out = {"n": g.n, "m": g.m, "girth_min": girth_min} | checklist.to_dict()
    if args.verbose:
        out["graph"] = graphs.dump_graph(g)
        out["digraph"] = graphs.dump_digraph(d)
    return out, [i.to_dict() for i in checklist.items], EXIT_OK if checklist.passed else EXIT_CHECK


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


COMMANDS: dict[str, Callable] = {
    "theta": cmd_theta,
    "adversary": cmd_adversary,
    "bounds": cmd_bounds,
    "eta0": cmd_eta0,
    "greedy": cmd_greedy,
    "fkg": cmd_fkg,
    "descartes": cmd_descartes,
}


# -- argument handling -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracdp", description="Fractional DP-coloring experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, randomized=False):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", help="write to this file instead of stdout")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--verbose", action="store_true")
        if randomized:
            p.add_argument("--seed", type=int)
            p.add_argument("--auto-seed", action="store_true", help="draw a seed and report it on stderr")
        return p

    p = common(sub.add_parser("theta", help="exact theta_DP(G, k) over a k-range"))
    p.add_argument("--graph", required=True, help="generator spec (cycle:4) or graph file")
    p.add_argument("--k", "--k-range", dest="k", required=True, help="k, a..b or a,b,c")
    p.add_argument("--method", choices=("enumerate", "peeled", "cycle"), default="enumerate")
    p.add_argument("--budget", type=int, default=solver.SEARCH_BUDGET)
    p.add_argument("--cover-budget", type=int, default=covers.ENUMERATION_BUDGET)

    p = common(sub.add_parser("adversary", help="Monte Carlo failure rate of random covers"), randomized=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--budget", type=int, default=solver.SEARCH_BUDGET)

    p = common(sub.add_parser("bounds", help="evaluate the random-cover inequality chain"))
    p.add_argument("--d", required=True, help="d, a..b or a,b,c (d >= 4)")
    p.add_argument("--k", "--k-range", dest="k", default="1..100")
    p.add_argument("--union", help="also evaluate the union bound at n,m,k,t")

    p = common(sub.add_parser("eta0", help="verified eta0 threshold for |E| = |V| + 1 graphs"))
    p.add_argument("--n", required=True)

    p = common(sub.add_parser("greedy", help="calibrate and run the random greedy fractional coloring"), randomized=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--orientation", help="digraph file, 'degeneracy' or 'bipartite'")
    p.add_argument("--cover", default="random", help="'random', 'identity' or a cover JSON file")
    p.add_argument("--d", type=float, help="degree parameter (default: max out-degree)")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--alpha", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--calibration-trials", type=int, default=1000)
    p.add_argument("--exact", action="store_true", help="exact calibration (tiny instances only)")

    p = common(sub.add_parser("fkg", help="exhaustive correlation-inequality check"))
    p.add_argument("--fixture", default="path3-k2", help="path3-k2 or exhaustive-small")
    p.add_argument("--p", type=float, default=0.5, help="activation probability for path3-k2")

    p = common(sub.add_parser("descartes", help="build and verify G_level from hypergraph files"))
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--hypergraph", action="append", help="one file per level above 1, in order")
    p.add_argument("--orientation", help="replace the constructed orientation by this digraph file")
    p.add_argument("--girth-min", type=int)
    p.add_argument("--write-graph")
    p.add_argument("--write-digraph")

    p = sub.add_parser("replay", help="re-run the config embedded in an earlier output")
    p.add_argument("file")
    p.add_argument("--output")
    return ap


def config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_PERSISTED}


def render(args, result: dict, table: list[dict]) -> str:
    config = config_of(args)
    if args.format == "json":
        return json.dumps({"config": config, "result": result}, sort_keys=True, indent=2, default=str) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True, default=str) + "\n")
    if table:
        fields = list(dict.fromkeys(key for row in table for key in row))
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in table:
            w.writerow({k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in row.items()})
    return buf.getvalue()


def load_replay(path: str) -> dict:
    text = _read(path)
    try:
        if text.startswith("# config: "):
            return json.loads(text.splitlines()[0][len("# config: "):])
        return json.loads(text)["config"]
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path} holds no embedded config") from exc


def execute(args) -> tuple[str, int]:
    if args.command in RANDOMIZED:
        if args.seed is None:
            if not getattr(args, "auto_seed", False):
                raise UsageError(f"{args.command} is randomized: pass --seed N or --auto-seed")
            args.seed = secrets.randbits(63)
            print(f"seed: {args.seed}", file=sys.stderr)
    result, table, code = COMMANDS[args.command](args)
    return render(args, result, table), code


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    output = args.output
    try:
        if args.command == "replay":
            config = load_replay(args.file)
            args = argparse.Namespace(**{"threads": 1, "output": None, "auto_seed": False} | config)
            if args.command not in COMMANDS:
                raise UsageError(f"cannot replay command {args.command!r}")
        text, code = execute(args)
    except SizeLimitError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, FracDPError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if output:
        try:
            _write(output, text)
        except UsageError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. `| head`); silence the flush at exit
            sys.stdout = open(os.devnull, "w")
    return code


if __name__ == "__main__":
    sys.exit(main())
