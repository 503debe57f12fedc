"""Command-line front end.

Every command validates its inputs, writes a ``manifest.json`` (command,
settings, input digests, declared outputs) into the output directory
before any result file, then emits plain CSV/JSON reports.  Exit codes:
0 success, 2 invalid input, 3 runtime budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .centrality import default_zeta_grid, ranking_sweep, sweep
from .epidemics import (SIParams, si_exact, si_lee, si_lee_general,
                        si_linearized, si_meanfield)
from .experiments import RATIOS, ratio_study, read_config, spearman_table
from .finance import (build_market_window, delta_rank, lda_fit, load_returns,
                      load_svc, rolling_windows, svc_trend,
                      window_rank_report)
from .graph import (GraphError, load_edge_list, load_json, load_memberships,
                    project_bipartite, save_json, walk_counts)
from .interlacement import (InterlacementError, detect, heuristic_linear,
                            heuristic_poly)
from .spectral import decompose

_MEASURES = ("R", "C", "T")
_SOLVERS = ("exact", "lee", "lee-general", "linearized", "mean-field")


class _BudgetExceeded(RuntimeError):
    pass


class _Budget:
    """Coarse wall-clock guard checked between pipeline phases."""

    def __init__(self, seconds):
        self.seconds = seconds
        self.start = time.monotonic()

    def check(self, phase):
        if self.seconds is None:
            return
        used = time.monotonic() - self.start
        if used >= self.seconds:
            raise _BudgetExceeded(
                "runtime budget of %gs exceeded at %s (%.1fs used)"
                % (self.seconds, phase, used))


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _load_graph(path, weighted=False):
    if not os.path.isfile(path):
        raise ValueError("no such graph file: %s" % path)
    if path.endswith(".json"):
        return load_json(path)
    return load_edge_list(path, weighted=weighted)


def _parse_grid(spec):
    """Grid spec: 'lo:hi:count' for linspace or a comma list of values."""
    if spec is None:
        return default_zeta_grid()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError("grid spec %r is not 'lo:hi:count'" % spec)
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1 or hi < lo:
            raise ValueError("grid spec %r has an empty range" % spec)
        grid = np.linspace(lo, hi, count)
    else:
        grid = np.array([float(tok) for tok in spec.split(",") if tok.strip()])
    if grid.size == 0 or (grid <= 0).any() or (np.diff(grid) <= 0).any():
        raise ValueError("zeta grid must be positive and strictly increasing")
    return grid


def _write_manifest(out_dir, command, settings, inputs, outputs, seed=None):
    os.makedirs(out_dir, exist_ok=True)
    doc = {
        "command": command,
        "version": __version__,
        "settings": settings,
        "seed": seed,
        "inputs": {path: _sha256(path) for path in inputs},
        "outputs": sorted(outputs),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


# -- centrality --------------------------------------------------------------


def cmd_centrality(args):
    g = _load_graph(args.graph, weighted=args.weighted)
    grid = _parse_grid(args.zeta_grid)
    if args.measure not in _MEASURES:
        raise ValueError("measure must be one of %s" % (_MEASURES,))
    outputs = ["values_R.csv", "values_C.csv", "values_T.csv",
               "ranks.csv", "rankstd.csv"]
    _write_manifest(args.out, "centrality",
                    {"graph": args.graph, "weighted": args.weighted,
                     "measure": args.measure, "zeta_grid": grid.tolist()},
                    [args.graph], outputs)
    profile = sweep(g, grid)
    for m in _MEASURES:
        profile.to_csv(os.path.join(args.out, "values_%s.csv" % m), m)
    report = ranking_sweep(profile, measure=args.measure)
    report.to_csv(os.path.join(args.out, "ranks.csv"))
    report.std_to_csv(os.path.join(args.out, "rankstd.csv"))
    return 0


# -- epidemics ---------------------------------------------------------------


def cmd_epidemics(args):
    g = _load_graph(args.graph, weighted=args.weighted)
    if args.tmax < 0:
        raise ValueError("tmax must be nonnegative")
    if args.steps < 2:
        raise ValueError("need at least 2 time steps")
    t_grid = (np.array([0.0]) if args.tmax == 0
              else np.linspace(0.0, args.tmax, args.steps))
    params = SIParams(gamma=args.gamma, beta=args.beta, t_grid=t_grid)
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    for s in solvers:
        if s not in _SOLVERS:
            raise ValueError("unknown solver %r; options: %s"
                             % (s, ", ".join(_SOLVERS)))
    outputs = (["trajectory_%s.csv" % s for s in solvers]
               + ["mean_curves.csv"])
    _write_manifest(args.out, "epidemics",
                    {"graph": args.graph, "weighted": args.weighted,
                     "beta": args.beta, "gamma": args.gamma,
                     "tmax": args.tmax, "steps": args.steps,
                     "solvers": solvers},
                    [args.graph], outputs)
    dec = decompose(g)
    trajectories = {}
    for s in solvers:
        if s == "exact":
            traj = si_exact(g, params)
        elif s == "lee":
            traj = si_lee(g, params, dec=dec)
        elif s == "lee-general":
            traj = si_lee_general(g, params, np.full(g.n, params.beta))
        elif s == "linearized":
            traj = si_linearized(g, params, dec=dec)
        else:
            traj = si_meanfield(g.mean_degree(), params)
        trajectories[s] = traj
        traj.to_csv(os.path.join(args.out, "trajectory_%s.csv" % s))
    with open(os.path.join(args.out, "mean_curves.csv"), "w",
              newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + solvers)
        means = [trajectories[s].mean_curve() for s in solvers]
        for k, t in enumerate(t_grid):
            w.writerow([repr(float(t))] + [repr(float(m[k])) for m in means])
    return 0


# -- interlacement -----------------------------------------------------------


def _parse_pairs(spec, n):
    pairs = []
    for tok in spec.split(";"):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.split(",")
        if len(parts) != 2:
            raise ValueError("pair %r is not 'i,j'" % tok)
        i, j = int(parts[0]), int(parts[1])
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValueError("pair (%d, %d) is not two distinct nodes "
                             "in 0..%d" % (i, j, n - 1))
        pairs.append((i, j))
    if not pairs:
        raise ValueError("no pairs given")
    return pairs


def cmd_interlace(args):
    g = _load_graph(args.graph, weighted=args.weighted)
    if args.measure not in _MEASURES:
        raise ValueError("measure must be one of %s" % (_MEASURES,))
    grid = _parse_grid(args.zeta_grid)
    if grid.size < 2:
        raise ValueError("interlacement detection needs a grid of >= 2 "
                         "points")
    if args.all_pairs:
        pairs = [(i, j) for i in range(g.n) for j in range(i + 1, g.n)]
    else:
        if not args.pairs:
            raise ValueError("give --pairs 'i,j;k,l' or --all-pairs")
        pairs = _parse_pairs(args.pairs, g.n)
    _write_manifest(args.out, "interlace",
                    {"graph": args.graph, "weighted": args.weighted,
                     "measure": args.measure, "zeta_grid": grid.tolist(),
                     "pairs": [list(p) for p in pairs]},
                    [args.graph], ["events.csv"])
    dec = decompose(g)
    walks = walk_counts(g, 60)
    rows = []
    for i, j in pairs:
        linear = heuristic_linear(g, i, j, measure=args.measure, walks=walks)
        try:
            poly = heuristic_poly(g, i, j, measure=args.measure, walks=walks)
            poly_root = float(poly.roots[0]) if poly.roots.size else None
        except InterlacementError:
            poly_root = None
        result = detect(g, i, j, measure=args.measure, zeta_grid=grid,
                        dec=dec)
        for event in result.events:
            rows.append([i, j, args.measure, "crossing",
                         repr(event.zeta_star), repr(event.bracket[0]),
                         repr(event.bracket[1]),
                         "" if linear is None else repr(linear),
                         "" if poly_root is None else repr(poly_root)])
        for event in result.tangencies:
            rows.append([i, j, args.measure, "tangency",
                         repr(event.zeta_star), repr(event.bracket[0]),
                         repr(event.bracket[1]),
                         "" if linear is None else repr(linear),
                         "" if poly_root is None else repr(poly_root)])
    with open(os.path.join(args.out, "events.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "measure", "kind", "zeta_star", "bracket_lo",
                    "bracket_hi", "heuristic_linear", "heuristic_poly"])
        w.writerows(rows)
    return 0


# -- experiments -------------------------------------------------------------


def cmd_experiments(args):
    budget = _Budget(args.budget)
    config = read_config(args.config)
    outputs = ["table_value.csv", "table_rank.csv"]
    if args.ratios:
        outputs.append("ratios.csv")
    _write_manifest(args.out, "experiments",
                    {"config": args.config, "jobs": args.jobs,
                     "n": config.n, "densities": list(config.densities),
                     "zetas": list(config.zetas),
                     "replications": config.replications,
                     "ratios": bool(args.ratios)},
                    [args.config], outputs, seed=config.seed)
    budget.check("start")
    table = spearman_table(config, jobs=args.jobs)
    budget.check("correlation table")
    table.to_csv(os.path.join(args.out, "table_value.csv"), "value")
    table.to_csv(os.path.join(args.out, "table_rank.csv"), "rank")
    if args.ratios:
        study = ratio_study(config, ratios=RATIOS, jobs=args.jobs)
        budget.check("ratio study")
        with open(os.path.join(args.out, "ratios.csv"), "w",
                  newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["ratio", "density", "zeta", "mean", "std",
                        "q1", "q25", "q50", "q75", "q99"])
            for ratio in RATIOS:
                for (density, zeta), s in study[ratio].items():
                    w.writerow([ratio, repr(density), repr(zeta),
                                repr(s.mean), repr(s.std)]
                               + [repr(s.quantiles[q])
                                  for q in (1, 25, 50, 75, 99)])
    return 0


# -- market ------------------------------------------------------------------


def cmd_market(args):
    budget = _Budget(args.budget)
    if not os.path.isfile(args.returns):
        raise ValueError("no such returns file: %s" % args.returns)
    panel = load_returns(args.returns)
    grid = _parse_grid(args.zeta_grid)
    windows = rolling_windows(panel, width_months=args.width_months,
                              step_months=args.step_months,
                              min_obs=args.min_obs)
    outputs = ["summary.csv"]
    for w in windows:
        outputs += ["windows/%s/ranks.csv" % w.window_id,
                    "windows/%s/rankstd.csv" % w.window_id,
                    "windows/%s/mst.json" % w.window_id]
    _write_manifest(args.out, "market",
                    {"returns": args.returns,
                     "width_months": args.width_months,
                     "step_months": args.step_months,
                     "min_obs": args.min_obs, "measure": args.measure,
                     "weight_mode": args.weight_mode,
                     "zeta_grid": grid.tolist(), "jobs": args.jobs},
                    [args.returns], outputs)
    budget.check("start")

    def one(window):
        market = build_market_window(window)
        report = window_rank_report(market, zeta_grid=grid,
                                    measure=args.measure,
                                    weight_mode=args.weight_mode)
        return market, report

    if args.jobs and args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(one, windows))
    else:
        results = [one(w) for w in windows]
    budget.check("window reports")
    summary = []
    for market, report in results:
        wdir = os.path.join(args.out, "windows", market.window_id)
        os.makedirs(wdir, exist_ok=True)
        report.to_csv(os.path.join(wdir, "ranks.csv"))
        report.std_to_csv(os.path.join(wdir, "rankstd.csv"))
        save_json(market.tree, os.path.join(wdir, "mst.json"))
        summary.append([market.window_id, len(market.assets),
                        repr(float(report.per_node_std.mean()))])
    with open(os.path.join(args.out, "summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["window", "assets", "mean_rank_std"])
        w.writerows(summary)
    return 0


# -- corporate ---------------------------------------------------------------


def cmd_corporate(args):
    budget = _Budget(args.budget)
    for path in (args.memberships, args.svc):
        if not os.path.isfile(path):
            raise ValueError("no such input file: %s" % path)
    if not 0.0 < args.zeta_lo < args.zeta_hi:
        raise ValueError("need 0 < zeta-lo < zeta-hi")
    memberships = load_memberships(args.memberships)
    g = project_bipartite(memberships, binary=args.binary)
    trends = svc_trend(load_svc(args.svc), threshold=args.threshold)
    _write_manifest(args.out, "corporate",
                    {"memberships": args.memberships, "svc": args.svc,
                     "binary": args.binary, "measure": args.measure,
                     "zeta_lo": args.zeta_lo, "zeta_hi": args.zeta_hi,
                     "threshold": args.threshold},
                    [args.memberships, args.svc],
                    ["delta_rank.csv", "lda.json"])
    budget.check("start")
    profile = sweep(g, np.array([args.zeta_lo, args.zeta_hi]))
    shifts = delta_rank(profile, zeta_hi=args.zeta_hi, zeta_lo=args.zeta_lo,
                        measure=args.measure)
    with open(os.path.join(args.out, "delta_rank.csv"), "w",
              newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["company", "delta_rank", "svc_rho", "trend"])
        for name, shift in zip(g.labels, shifts):
            t = trends.get(name)
            w.writerow([name, int(shift),
                        "" if t is None else repr(t.rho),
                        "" if t is None else t.label])
    used = [(k, name) for k, name in enumerate(g.labels) if name in trends]
    if not used:
        raise ValueError("no company has both a network position and a "
                         "trend label")
    x = np.array([shifts[k] for k, _ in used], dtype=float)
    y = np.array([trends[name].label for _, name in used])
    model = lda_fit(x, y)
    doc = model.to_json_dict()
    doc["n"] = len(used)
    doc["companies"] = [name for _, name in used]
    with open(os.path.join(args.out, "lda.json"), "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="riskcent",
        description="Risk-dependent centrality toolkit: measure sweeps, "
                    "SI bounds, interlacement detection, and the market / "
                    "corporate pipelines.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, budget=False):
        p.add_argument("--out", required=True, help="output directory")
        if budget:
            p.add_argument("--jobs", type=int, default=os.cpu_count(),
                           help="worker threads (results are identical for "
                                "any value)")
            p.add_argument("--budget", type=float, default=None,
                           help="wall-clock budget in seconds, checked "
                                "between phases; exceeding it exits 3")

    p = sub.add_parser("centrality", help="measure values and rankings "
                                          "over a zeta grid")
    p.add_argument("graph", help="edge-list or .json graph file")
    p.add_argument("--weighted", action="store_true",
                   help="edge list has a third weight column")
    p.add_argument("--zeta-grid", default=None,
                   help="'lo:hi:count' or comma list (default 0.01..1)")
    p.add_argument("--measure", default="R", help="R, C, or T")
    add_common(p)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("epidemics", help="SI trajectories and bound curves")
    p.add_argument("graph")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--beta", type=float, required=True,
                   help="uniform seed probability in (0, 1)")
    p.add_argument("--gamma", type=float, required=True,
                   help="infection rate >= 0")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=51)
    p.add_argument("--solvers", default="exact,lee,mean-field",
                   help="comma list from: %s" % ", ".join(_SOLVERS))
    add_common(p)
    p.set_defaults(func=cmd_epidemics)

    p = sub.add_parser("interlace", help="crossing detection and "
                                         "heuristics for node pairs")
    p.add_argument("graph")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--measure", default="C")
    p.add_argument("--pairs", default=None, help="semicolon list 'i,j;k,l'")
    p.add_argument("--all-pairs", action="store_true")
    p.add_argument("--zeta-grid", default=None)
    add_common(p)
    p.set_defaults(func=cmd_interlace)

    p = sub.add_parser("experiments", help="random-graph correlation table "
                                           "and ratio distributions")
    p.add_argument("config", help="key = value experiment config")
    p.add_argument("--ratios", action="store_true",
                   help="also emit pooled ratio distributions")
    add_common(p, budget=True)
    p.set_defaults(func=cmd_experiments)

    p = sub.add_parser("market", help="rolling correlation windows, MSTs, "
                                      "and rank reports")
    p.add_argument("returns", help="returns CSV (dates x assets)")
    p.add_argument("--width-months", type=int, default=6)
    p.add_argument("--step-months", type=int, default=1)
    p.add_argument("--min-obs", type=float, default=0.9)
    p.add_argument("--measure", default="R")
    p.add_argument("--weight-mode", default="distance",
                   choices=("distance", "inverse"))
    p.add_argument("--zeta-grid", default=None)
    add_common(p, budget=True)
    p.set_defaults(func=cmd_market)

    p = sub.add_parser("corporate", help="board projection, rank shifts, "
                                         "and trend classification")
    p.add_argument("memberships", help="company,director CSV")
    p.add_argument("svc", help="company,year,value CSV")
    p.add_argument("--binary", action="store_true",
                   help="ignore shared-director counts")
    p.add_argument("--measure", default="R")
    p.add_argument("--zeta-lo", type=float, default=0.01)
    p.add_argument("--zeta-hi", type=float, default=1.0)
    p.add_argument("--threshold", type=float, default=0.05,
                   help="drop companies with |trend correlation| below this")
    add_common(p, budget=True)
    p.set_defaults(func=cmd_corporate)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _BudgetExceeded as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except (GraphError, InterlacementError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
