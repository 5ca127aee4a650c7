"""Branch-and-cut driver, route extraction and warm-start encoding."""
from __future__ import annotations

import logging
import math
import time

from ..errors import ExtractionError, InvalidWarmStart, UnencodableWalk
from ..solution import (
    FEASIBLE,
    INFEASIBLE,
    OPTIMAL,
    TIMED_OUT,
    Problem,
    RouteSolution,
    is_site,
    make_solution,
    verify_solution,
)
from . import backends as B
from .formulation import MilpModel, build_model
from .graph import RoutingGraph
from .separation import separate_subtours

log = logging.getLogger(__name__)

INT_TOL = 1e-6


def _x_support(model: MilpModel, values) -> list[tuple[int, int]]:
    return [arc for arc, col in model.x.items() if values[col] > 0.5]


def extract_routes(x_values, y_values, g: RoutingGraph, problem: Problem | None = None,
                   producer: str = "milp") -> RouteSolution:
    """Turn selected arcs into a closed UAV walk from s0 and the RV site sequence.

    ``x_values`` maps arcs to 0/1 (or is an iterable of selected arcs). The
    walk is an Euler circuit of the selected arcs reachable from s0; site-only
    cycles detached from s0 carry no targets and are dropped.
    """
    if hasattr(x_values, "items"):
        arcs = sorted(a for a, v in x_values.items() if v > 0.5)
    else:
        arcs = sorted(x_values)
    n = g.n
    out_deg = [0] * n
    in_deg = [0] * n
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in arcs:
        out_deg[i] += 1
        in_deg[j] += 1
        adj[i].append(j)
    bad = [v for v in range(n) if in_deg[v] != out_deg[v]]
    if bad:
        raise ExtractionError(f"support digraph unbalanced at vertices {bad}")

    seen = {g.s0}
    stack = [g.s0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    lost = [t for t in g.targets if t not in seen]
    if lost:
        raise ExtractionError(f"targets {lost} unreachable from s0 in the selected arcs")
    dropped = [(i, j) for i, j in arcs if i not in seen]
    if dropped:
        log.info("dropping %d arcs in site-only cycles detached from s0", len(dropped))

    # Hierholzer, consuming successors in ascending order
    succ = {v: list(reversed(adj[v])) for v in seen}
    circuit = []
    stack = [g.s0]
    while stack:
        v = stack[-1]
        if succ[v]:
            stack.append(succ[v].pop())
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    if len(circuit) == 1:
        raise ExtractionError("no arcs leave s0")
    walk = [g.vertices[v] for v in circuit]
    if problem is None:
        return _bare_solution(walk, g, producer)
    return make_solution(problem, walk, producer=producer)


def _bare_solution(walk, g: RoutingGraph, producer) -> RouteSolution:
    idx = [g.index(v) for v in walk]
    cost = float(sum(g.f[a, b] for a, b in zip(idx, idx[1:])))
    fuel = [g.U]
    level = g.U
    for a, b in zip(idx, idx[1:]):
        level -= g.f[a, b]
        fuel.append(float(level))
        if not g.is_target(b):
            level = g.U
    return RouteSolution(
        walk=tuple(walk),
        rv_route=tuple(v[1] for v in walk if is_site(v)),
        fuel_profile=tuple(fuel),
        cost=cost,
        producer=producer,
        status=FEASIBLE,
    )


def warm_start_from(sol: RouteSolution, model: MilpModel) -> dict[int, float]:
    """Encode a verified walk as a full variable assignment of ``model``."""
    g = model.graph
    try:
        idx = [g.index(v) for v in sol.walk]
    except KeyError as exc:
        raise UnencodableWalk(f"walk uses vertex {exc.args[0]} outside the routing graph") from None
    assign = {j: 0.0 for j in range(model.n_vars)}
    used = set()
    for a, b in zip(idx, idx[1:]):
        if (a, b) in used:
            raise UnencodableWalk(f"walk repeats directed arc {g.vertices[a]} -> {g.vertices[b]}")
        if (a, b) not in model.x:
            raise UnencodableWalk(f"walk uses self-loop at {g.vertices[a]}")
        used.add((a, b))
        assign[model.x[a, b]] = 1.0

    U = g.U
    fuel = U
    last = idx[0]
    for a, b in zip(idx, idx[1:]):
        fuel -= g.f[a, b]
        if model.kind == "edge":
            assign[model.z[a, b]] = min(max(U - fuel, 0.0), U)
        if g.is_target(b):
            assign[model.y[b, last]] = 1.0
            if model.kind == "node":
                assign[model.u[b]] = min(max(fuel, 0.0), U)
        else:
            fuel = U
            last = b
    return assign


def _separation_hook(model: MilpModel, stats: dict):
    g = model.graph

    def hook(values, record=True):
        support = _x_support(model, values)
        cuts = separate_subtours(support, g)
        if not record:
            return bool(cuts), []
        rows = []
        for cut in cuts:
            if model.add_cut(cut):
                row = model.cut_row(cut)
                rows.append((row.coeffs, row.sense, row.rhs))
        stats["cuts"] += len(rows)
        if cuts:
            stats["rounds"] += 1
        return bool(cuts), rows

    return hook


def _load(model: MilpModel, backend: B.MipBackend) -> None:
    for j in range(model.n_vars):
        if model.binary[j]:
            col = backend.add_binary_var(model.obj[j], model.names[j], model.lb[j], model.ub[j])
        else:
            col = backend.add_continuous_var(model.lb[j], model.ub[j], model.obj[j], model.names[j])
        if col != j:
            raise B.BackendFailure("backend column numbering diverged from the model")
    for k, row in enumerate(model.rows):
        backend.add_linear_constraint(row.coeffs, row.sense, row.rhs, f"{row.family}_{k}")


def solve_with_cuts(model: MilpModel, backend: B.MipBackend, problem: Problem, *,
                    time_limit: float = 7200.0, warm: RouteSolution | None = None,
                    gap_target: float = 0.01, producer: str | None = None,
                    lazy: bool | None = None) -> RouteSolution:
    """Solve with subtour cuts enforced lazily.

    Callback-capable backends separate inside the search (unless ``lazy`` is
    False); others are re-solved after each round of cuts. The returned
    solution carries the best dual bound in ``bound`` and the number of cuts
    in ``cuts_added``; its ``meta`` holds the per-round bound history.
    """
    t0 = time.perf_counter()
    producer = producer or f"milp-{model.kind}" + ("-warm" if warm is not None else "")
    g = model.graph
    stats = {"cuts": 0, "rounds": 0}
    bounds: list[float] = []

    warm_sol = None
    start = None
    if warm is not None:
        problems = verify_solution(problem, warm)
        if problems:
            log.warning("%s", InvalidWarmStart("; ".join(problems)))
        else:
            warm_sol = warm
            try:
                start = warm_start_from(warm, model)
            except UnencodableWalk as exc:
                log.info("warm start dropped: %s", exc)

    _load(model, backend)
    backend.set_gap(gap_target)
    hook = _separation_hook(model, stats)
    use_lazy = backend.supports_lazy if lazy is None else (lazy and backend.supports_lazy)

    def remaining():
        return time_limit - (time.perf_counter() - t0)

    result = None
    if use_lazy:
        backend.on_integer_solution(hook)
        backend.set_time_limit(remaining())
        if start is not None:
            backend.set_mip_start(start)
        result = backend.solve()
        bounds.append(result.bound)
        if result.values is not None:
            violated, _ = hook(result.values, record=False)
            if violated:
                raise B.BackendFailure("callback backend returned an incumbent with subtours")
    else:
        incumbent = start
        while True:
            backend.set_time_limit(remaining())
            if incumbent is not None:
                backend.set_mip_start(incumbent)
            result = backend.solve()
            bounds.append(result.bound)
            if result.values is None:
                break
            violated, rows = hook(result.values)
            if not violated:
                break
            if not rows:
                raise B.BackendFailure("violated subtour cut already in the pool")
            for coeffs, sense, rhs in rows:
                backend.add_linear_constraint(coeffs, sense, rhs, "subtour")
            if remaining() <= 0:
                result = B.BackendResult(B.TIME_LIMIT, None, math.inf, result.bound)
                break
            incumbent = start

    finite = [b for b in bounds if math.isfinite(b)]
    bound = max(finite) if finite else (math.inf if result.status == B.INFEASIBLE else math.nan)
    elapsed = time.perf_counter() - t0
    meta = {"bound_history": bounds, "cut_rounds": stats["rounds"], "backend": backend.name,
            "lazy": use_lazy}

    sol = None
    if result.values is not None:
        x_vals = {arc: result.values[col] for arc, col in model.x.items()}
        sol = extract_routes(x_vals, None, g, problem, producer=producer)
        issues = verify_solution(problem, sol)
        if issues:
            raise B.BackendFailure("solver incumbent failed verification: " + "; ".join(issues))

    if result.status == B.INFEASIBLE and sol is None:
        status = INFEASIBLE
    elif result.status == B.OPTIMAL and sol is not None:
        status = OPTIMAL
    elif result.status == B.TIME_LIMIT:
        status = TIMED_OUT
    else:
        status = FEASIBLE if sol is not None else TIMED_OUT

    if warm_sol is not None and (sol is None or sol.cost > warm_sol.cost + 1e-9):
        sol = warm_sol
        if status == OPTIMAL:
            status = FEASIBLE
    if sol is None:
        return RouteSolution(producer=producer, status=status, bound=bound,
                             wall_time_s=elapsed, cuts_added=stats["cuts"], meta=meta)
    if math.isfinite(bound) and sol.cost < bound <= sol.cost + 1e-6:
        bound = sol.cost  # solver tolerance noise
    return sol.with_(producer=producer, status=status, bound=bound, wall_time_s=elapsed,
                     cuts_added=stats["cuts"], meta=meta)


def milp_solve(problem: Problem, formulation: str = "edge", *, backend: str | None = None,
               time_limit: float = 7200.0, gap_target: float = 0.01,
               warm: RouteSolution | None = None, lazy: bool | None = None) -> RouteSolution:
    """Build the chosen formulation for ``problem`` and run the cut loop."""
    g = RoutingGraph.from_problem(problem)
    model = build_model(g, formulation)
    return solve_with_cuts(model, B.make_backend(backend), problem, time_limit=time_limit,
                           warm=warm, gap_target=gap_target, lazy=lazy)


__all__ = [
    "extract_routes",
    "milp_solve",
    "solve_with_cuts",
    "warm_start_from",
]
