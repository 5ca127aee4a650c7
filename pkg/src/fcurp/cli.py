"""Command-line interface.

Exit codes: 0 success, 1 infeasible (or no valid plan), 2 usage or input
error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path

from . import bench as benchmod
from .errors import BackendFailure, Infeasible, InvalidInstance, PlanningError, TooLarge
from .instancegen import GenConfig, instance_name, write_suite
from .model import Instance, discretize_road
from .sites import SiteSelection, select_sites
from .solution import Problem, RouteSolution, verify_solution

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("fcurp")


class UsageError(Exception):
    pass


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _problem(args) -> Problem:
    inst = Instance.load(args.instance)
    road = discretize_road(inst)
    if getattr(args, "sites", None):
        sel = SiteSelection.load(args.sites, road)
    else:
        sel = select_sites(road, len(inst.targets))
    return Problem(inst, road, sel)


def _finish_solution(sol: RouteSolution, problem: Problem, args) -> int:
    _emit(sol.to_dict(problem), args.out)
    if not sol.walk:
        print(f"no plan found (status {sol.status})", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"{sol.producer}: status {sol.status}, cost {sol.cost:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = GenConfig(env_side=args.env_side, grid_n=args.grid, U=args.U, R=args.R,
                    delta=args.delta, network_kind=args.network, instances_per_config=args.count,
                    seed=args.seed, targets=args.targets, strict=not args.no_strict)
    paths = write_suite(cfg, args.out_dir)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_sites(args) -> int:
    inst = Instance.load(args.instance)
    road = discretize_road(inst)
    sel = select_sites(road, len(inst.targets))
    _emit(sel.to_dict(road), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    from .heuristic import heuristic_solve
    from .milp import milp_solve

    problem = _problem(args)
    warm = heuristic_solve(problem, seed=args.seed) if args.warm else None
    sol = milp_solve(problem, args.formulation, backend=args.backend, time_limit=args.time_limit,
                     gap_target=args.gap, warm=warm)
    return _finish_solution(sol, problem, args)


def cmd_heuristic(args) -> int:
    from .heuristic import heuristic_solve

    problem = _problem(args)
    return _finish_solution(heuristic_solve(problem, seed=args.seed, restarts=args.restarts),
                            problem, args)


def cmd_oracle(args) -> int:
    from .oracle import OracleConfig, brute_force_opt

    problem = _problem(args)
    cfg = OracleConfig(max_targets=args.max_targets, max_sites=args.max_sites,
                       max_site_visits=args.max_site_visits)
    return _finish_solution(brute_force_opt(problem, cfg), problem, args)


def _collect(paths) -> list[tuple[str, Instance]]:
    files = []
    for p in map(Path, paths):
        files.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    if not files:
        raise UsageError("no instance files found")
    return [(f.stem, Instance.load(f)) for f in files]


def cmd_bench(args) -> int:
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    bad = [s for s in strategies if s not in benchmod.STRATEGIES]
    if bad or not strategies:
        raise UsageError(f"unknown strategies {bad}; choose from {', '.join(benchmod.STRATEGIES)}")
    records = benchmod.run_suite(_collect(args.instances), strategies, time_limit=args.time_limit,
                                 gap_target=args.gap, workers=args.workers, backend=args.backend,
                                 externals=args.externals, seed=args.seed)
    benchmod.write_records(args.out or sys.stdout, records)
    if args.summary:
        benchmod.write_summary(args.summary, benchmod.aggregate(records))
    return EXIT_OK


def cmd_verify(args) -> int:
    problem = _problem(args)
    sol = RouteSolution.load(args.solution)
    if not sol.walk:
        print(f"solution holds no walk (status {sol.status})", file=sys.stderr)
        return EXIT_INFEASIBLE
    issues = verify_solution(problem, sol)
    for msg in issues:
        print(msg)
    if issues:
        return EXIT_INFEASIBLE
    print(f"OK: cost {sol.cost:.6f}, {len(sol.walk) - 1} legs, {len(sol.rv_route)} site stops")
    return EXIT_OK


def cmd_render(args) -> int:
    from .render import RenderStyle, write_svg

    inst = Instance.load(args.instance)
    road = discretize_road(inst)
    sel = None
    if args.sites:
        sel = SiteSelection.load(args.sites, road)
    elif not args.no_sites:
        try:
            sel = select_sites(road, len(inst.targets))
        except Infeasible as exc:
            log.warning("drawing without sites: %s", exc)
    sol = RouteSolution.load(args.solution) if args.solution else None
    write_svg(args.out, inst, sel, sol, RenderStyle(scale=args.scale), road=road)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for every random choice (default 0)")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="fcurp", parents=[common],
                                description="Plan UAV routes with a road-bound refueling vehicle.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("gen", parents=[common], help="generate a seeded instance suite")
    g.add_argument("--network", choices=("dense", "sparse"), default="dense")
    g.add_argument("--grid", type=int, default=3, help="targets form a GRID x GRID layout")
    g.add_argument("--U", type=float, default=20.0, help="UAV range per sortie, km")
    g.add_argument("--R", type=float, default=10.0, help="vehicle road range per sortie, km")
    g.add_argument("--delta", type=float, default=1.0, help="road sampling step, km")
    g.add_argument("--env-side", type=float, default=20.0)
    g.add_argument("--count", type=int, default=20)
    g.add_argument("--targets", choices=("uniform", "centers"), default="uniform")
    g.add_argument("--no-strict", action="store_true", help="allow values outside the usual menus")
    g.add_argument("--out-dir", default="instances")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sites", parents=[common], help="select refueling sites")
    s.add_argument("instance")
    s.add_argument("--out", help="output JSON (default stdout)")
    s.set_defaults(func=cmd_sites)

    def plan_args(q):
        q.add_argument("instance")
        q.add_argument("--sites", help="site selection JSON (default: select now)")
        q.add_argument("--out", help="output solution JSON (default stdout)")

    sv = sub.add_parser("solve", parents=[common], help="solve with the MILP and subtour cuts")
    plan_args(sv)
    sv.add_argument("--formulation", choices=("node", "edge"), default="edge")
    sv.add_argument("--warm", action="store_true", help="warm start from the heuristic")
    sv.add_argument("--time-limit", type=float, default=7200.0, help="seconds")
    sv.add_argument("--gap", type=float, default=0.01, help="relative gap target")
    sv.add_argument("--backend", choices=("scip", "highs"), default=None)
    sv.set_defaults(func=cmd_solve)

    h = sub.add_parser("heuristic", parents=[common], help="TSP tour plus refueling repair")
    plan_args(h)
    h.add_argument("--restarts", type=int, default=0)
    h.set_defaults(func=cmd_heuristic)

    o = sub.add_parser("oracle", parents=[common], help="exhaustive search on tiny instances")
    plan_args(o)
    o.add_argument("--max-targets", type=int, default=5)
    o.add_argument("--max-sites", type=int, default=4)
    o.add_argument("--max-site-visits", type=int, default=None)
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", parents=[common], help="run strategies over instance files")
    b.add_argument("instances", nargs="+", help="instance files or directories")
    b.add_argument("--strategies", default="milp-edge,tsp-repair",
                   help="comma list from: " + ", ".join(benchmod.STRATEGIES))
    b.add_argument("--time-limit", type=float, default=7200.0)
    b.add_argument("--gap", type=float, default=0.01)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--backend", choices=("scip", "highs"), default=None)
    b.add_argument("--externals", help="directory of <instance_id>.json external solutions")
    b.add_argument("--out", help="records CSV (default stdout)")
    b.add_argument("--summary", help="summary CSV")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", parents=[common], help="check a solution against an instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.add_argument("--sites", help="site selection JSON (default: select now)")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("render", parents=[common], help="draw an instance and plan as SVG")
    r.add_argument("instance")
    r.add_argument("--sites")
    r.add_argument("--no-sites", action="store_true")
    r.add_argument("--solution")
    r.add_argument("--scale", type=float, default=30.0, help="pixels per km")
    r.add_argument("--out", required=True, help="output .svg file")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    args.seed = getattr(args, "seed", 0)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, InvalidInstance, TooLarge, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BackendFailure, PlanningError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
