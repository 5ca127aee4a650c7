"""Run strategies over instance suites and tabulate cost, bound, gap and time."""
from __future__ import annotations

import csv
import logging
import math
import re
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import Infeasible, InvalidInstance, PlanningError
from .heuristic import heuristic_solve
from .model import Instance
from .oracle import OracleConfig, brute_force_opt
from .solution import FEASIBLE, INFEASIBLE, OPTIMAL, Problem, RouteSolution, relative_gap, verify_solution

log = logging.getLogger(__name__)

STRATEGIES = ("milp-node", "milp-edge", "milp-node-warm", "milp-edge-warm", "tsp-repair",
              "oracle", "external")
MILP_STRATEGIES = STRATEGIES[:4]
ERROR = "Error"  # per-record failure; the suite keeps going

CSV_COLUMNS = ("instance_id", "strategy", "grid_n", "network", "U", "R", "cost", "lower_bound",
               "gap_percent", "wall_time_s", "status", "cuts_added")
SUMMARY_COLUMNS = ("grid_n", "network", "strategy", "n_records", "pct_optimal", "pct_infeasible",
                   "mean_gap_percent", "median_gap_percent", "mean_time_s", "median_time_s")

_NAME = re.compile(r"^(?P<net>dense|sparse)-n(?P<n>\d+)-")


@dataclass
class BenchRecord:
    instance_id: str
    strategy: str
    grid_n: int | None = None
    network: str = ""
    U: float = math.nan
    R: float = math.nan
    cost: float = math.nan
    lower_bound: float = math.nan
    gap_percent: float = math.nan
    wall_time_s: float = math.nan
    status: str = ERROR
    cuts_added: int = 0
    note: str = ""

    def csv_row(self) -> dict:
        d = asdict(self)
        return {k: _cell(d[k]) for k in CSV_COLUMNS}


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if not math.isfinite(v) else format(v, ".10g")
    return str(v)


def describe(instance_id: str, instance: Instance) -> tuple[int | None, str]:
    """Grid size and network kind, from the generator's file name when possible."""
    mt = _NAME.match(instance_id)
    if mt:
        return int(mt["n"]), mt["net"]
    m = len(instance.targets)
    k = math.isqrt(m)
    return (k if k * k == m else None), ""


def _finish(rec: BenchRecord, problem: Problem, sol: RouteSolution) -> BenchRecord:
    issues = verify_solution(problem, sol) if sol.walk else []
    if issues:
        rec.status = ERROR
        rec.note = "verification failed: " + "; ".join(issues[:3])
        return rec
    rec.status = sol.status
    rec.cost = sol.cost
    rec.lower_bound = sol.bound if sol.bound is not None else math.nan
    rec.wall_time_s = sol.wall_time_s
    rec.cuts_added = sol.cuts_added
    return rec


def run_instance(instance_id: str, instance: Instance, strategies: Sequence[str], *,
                 time_limit: float = 7200.0, gap_target: float = 0.01, backend: str | None = None,
                 external: RouteSolution | None = None, seed: int = 0,
                 oracle_cfg: OracleConfig | None = None) -> list[BenchRecord]:
    """All requested strategies on one instance; failures land in ``status``."""
    grid_n, network = describe(instance_id, instance)

    def blank(strategy):
        return BenchRecord(instance_id, strategy, grid_n, network, instance.U, instance.R)

    try:
        problem = Problem.build(instance)
    except Infeasible as exc:
        return [BenchRecord(instance_id, s, grid_n, network, instance.U, instance.R,
                            status=INFEASIBLE, wall_time_s=0.0, note=str(exc)) for s in strategies]
    except InvalidInstance as exc:
        return [BenchRecord(instance_id, s, grid_n, network, instance.U, instance.R,
                            status=ERROR, note=str(exc)) for s in strategies]

    out: dict[str, BenchRecord] = {}
    heur = None
    if "tsp-repair" in strategies or any(s.endswith("-warm") for s in strategies):
        rec = blank("tsp-repair")
        try:
            heur = heuristic_solve(problem, seed=seed)
            _finish(rec, problem, heur)
        except PlanningError as exc:
            rec.note = f"{type(exc).__name__}: {exc}"
        out["tsp-repair"] = rec

    for s in strategies:
        if s in out:
            continue
        rec = blank(s)
        t0 = time.perf_counter()
        try:
            if s in MILP_STRATEGIES:
                from .milp import milp_solve

                form = s.split("-")[1]
                warm = heur if s.endswith("-warm") else None
                if s.endswith("-warm") and heur is None:
                    raise PlanningError("no heuristic solution to warm start from")
                sol = milp_solve(problem, form, backend=backend, time_limit=time_limit,
                                 gap_target=gap_target, warm=warm)
                _finish(rec, problem, sol)
            elif s == "oracle":
                _finish(rec, problem, brute_force_opt(problem, oracle_cfg))
            elif s == "external":
                if external is None:
                    raise PlanningError("no external solution supplied")
                ext = external.with_(status=FEASIBLE, bound=math.nan,
                                     wall_time_s=external.wall_time_s)
                _finish(rec, problem, ext)
            else:
                raise ValueError(f"unknown strategy {s!r}")
        except (PlanningError, ValueError) as exc:
            rec.status = ERROR
            rec.note = f"{type(exc).__name__}: {exc}"
            rec.wall_time_s = time.perf_counter() - t0
        out[s] = rec

    # heuristic and external rows are scored against the best MILP bound
    milp_bounds = [r.lower_bound for k, r in out.items()
                   if k in MILP_STRATEGIES and r.status != ERROR and math.isfinite(r.lower_bound)]
    best = max(milp_bounds) if milp_bounds else math.nan
    for k in ("tsp-repair", "external"):
        if k in out and out[k].status != ERROR:
            out[k].lower_bound = best
    for r in out.values():
        if r.status in (OPTIMAL, FEASIBLE) and math.isfinite(r.cost) and math.isfinite(r.lower_bound) \
                and r.cost > 0:
            r.gap_percent = relative_gap(r.cost, r.lower_bound)
    return [out[s] for s in strategies]


def _job(args):
    index, iid, inst, strategies, kw = args
    return index, run_instance(iid, inst, strategies, **kw)


def load_externals(source) -> dict[str, RouteSolution]:
    """External solutions from a directory of ``<instance_id>.json`` files."""
    if source is None:
        return {}
    if isinstance(source, Mapping):
        return dict(source)
    return {p.stem: RouteSolution.load(p) for p in sorted(Path(source).glob("*.json"))}


def run_suite(instances: Iterable[tuple[str, Instance]], strategies: Sequence[str], *,
              time_limit: float = 7200.0, gap_target: float = 0.01, workers: int = 1,
              backend: str | None = None, externals=None, seed: int = 0,
              oracle_cfg: OracleConfig | None = None) -> list[BenchRecord]:
    """One record per (instance, strategy), ordered by input order then strategy."""
    for s in strategies:
        if s not in STRATEGIES:
            raise ValueError(f"unknown strategy {s!r}; choose from {', '.join(STRATEGIES)}")
    ext = load_externals(externals)
    items = list(instances)
    jobs = [(k, iid, inst, tuple(strategies),
             dict(time_limit=time_limit, gap_target=gap_target, backend=backend,
                  external=ext.get(iid), seed=seed, oracle_cfg=oracle_cfg))
            for k, (iid, inst) in enumerate(items)]
    results: dict[int, list[BenchRecord]] = {}
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for k, recs in pool.map(_job, jobs):
                results[k] = recs
    else:
        for job in jobs:
            k, recs = _job(job)
            results[k] = recs
    return [r for k in range(len(items)) for r in results[k]]


def _fmt_stat(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    return round(statistics.fmean(values), 6), round(statistics.median(values), 6)


def aggregate(records: Sequence[BenchRecord]) -> list[dict]:
    """Per (grid_n, network, strategy): % Optimal, % Infeasible, gap and time stats.

    Gap statistics use only feasible rows with a bound; with none the fields
    are None (written as empty cells), never zero.
    """
    if not records:
        raise ValueError("aggregate needs at least one record")
    groups: dict[tuple, list[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.grid_n if r.grid_n is not None else -1, r.network, r.strategy), []).append(r)
    out = []
    for key in sorted(groups):
        rows = groups[key]
        n = len(rows)
        gaps = sorted(r.gap_percent for r in rows
                      if r.status in (OPTIMAL, FEASIBLE) and math.isfinite(r.gap_percent))
        times = sorted(r.wall_time_s for r in rows
                       if r.status != INFEASIBLE and math.isfinite(r.wall_time_s))
        mg, dg = _fmt_stat(gaps)
        mt, dt = _fmt_stat(times)
        out.append({
            "grid_n": key[0] if key[0] >= 0 else None,
            "network": key[1],
            "strategy": key[2],
            "n_records": n,
            "pct_optimal": round(100.0 * sum(r.status == OPTIMAL for r in rows) / n, 2),
            "pct_infeasible": round(100.0 * sum(r.status == INFEASIBLE for r in rows) / n, 2),
            "mean_gap_percent": mg,
            "median_gap_percent": dg,
            "mean_time_s": mt,
            "median_time_s": dt,
        })
    return out


def write_records(path, records: Sequence[BenchRecord]) -> None:
    """Write records as CSV to ``path``, or to an open text stream."""
    if hasattr(path, "write"):
        _dump_records(path, records)
        return
    with open(path, "w", newline="") as fh:
        _dump_records(fh, records)


def _dump_records(fh, records):
    w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
    w.writeheader()
    for r in records:
        w.writerow(r.csv_row())


def write_summary(path, summary: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        w.writeheader()
        for row in summary:
            w.writerow({k: _cell(row[k]) for k in SUMMARY_COLUMNS})


def read_records(path) -> list[BenchRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for k, v in row.items():
                if k in ("instance_id", "strategy", "network", "status"):
                    kw[k] = v
                elif k == "grid_n":
                    kw[k] = int(v) if v else None
                elif k == "cuts_added":
                    kw[k] = int(v) if v else 0
                else:
                    kw[k] = float(v) if v else math.nan
            out.append(BenchRecord(**kw))
    return out


__all__ = [
    "BenchRecord",
    "CSV_COLUMNS",
    "STRATEGIES",
    "SUMMARY_COLUMNS",
    "aggregate",
    "load_externals",
    "read_records",
    "run_instance",
    "run_suite",
    "write_records",
    "write_summary",
]
