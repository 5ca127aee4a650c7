"""TSP-then-repair heuristic.

A tour over the targets and the start site is built first, ignoring fuel.
The repair pass then walks along it; wherever the UAV would arrive somewhere
without enough fuel left to reach a refueling site, it splices in a chain of
sites reachable by the refueling vehicle.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import NoPath, RepairFailure
from .solution import Problem, RouteSolution, Vertex, is_site, make_solution, site, target, verify_solution

TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    """First leg ``walk[k] -> walk[k+1]`` the UAV cannot safely fly."""

    k: int
    t_i: Vertex
    t_j: Vertex
    U_rem: float
    s_mrv: Vertex
    reason: str = "fuel"  # or "rv"


def _tour_matrix(problem: Problem) -> np.ndarray:
    pts = np.vstack([problem.xy(problem.s0)[None, :], problem.road.targets])
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff ** 2).sum(-1))


def _nearest_neighbor(D: np.ndarray) -> list[int]:
    n = len(D)
    tour = [0]
    left = set(range(1, n))
    cur = 0
    while left:
        nxt = min(left, key=lambda j: (D[cur, j], j))
        tour.append(nxt)
        left.remove(nxt)
        cur = nxt
    return tour


def tsp_tour(problem: Problem, seed: int = 0, restarts: int = 0) -> list[Vertex]:
    """Closed tour ``[s0, t.., s0]`` over all targets.

    Nearest-neighbor construction followed by 2-opt and Or-opt to a local
    optimum. ``restarts`` extra runs start from seeded random permutations;
    the shortest tour wins (ties by vertex order), so the result depends only
    on the inputs and ``seed``.
    """
    m = problem.n_targets
    if m < 1:
        raise ValueError("need at least one target")
    D = _tour_matrix(problem)
    best = kernels.local_search(_nearest_neighbor(D), D)
    best_len = kernels.tour_length(best, D)
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        order = [0] + [int(v) + 1 for v in rng.permutation(m)]
        cand = kernels.local_search(order, D)
        cand_len = kernels.tour_length(cand, D)
        if cand_len < best_len - 1e-12 or (abs(cand_len - best_len) <= 1e-12 and cand < best):
            best, best_len = cand, cand_len
    s0 = problem.s0
    return [s0] + [target(i - 1) for i in best[1:]] + [s0]


def _guard(problem: Problem, v: Vertex) -> float:
    return 0.0 if is_site(v) else float(problem.nearest_cover[v[1]])


def _simulate(problem: Problem, walk, start: int):
    """Fuel on arrival at each position from ``start`` on, and the last site
    at or before each position (the UAV refuels at sites)."""
    fuel = {start: problem.U}
    mrv = {start: walk[start]}
    level, last = problem.U, walk[start]
    for k in range(start, len(walk) - 1):
        level -= problem.f(walk[k], walk[k + 1])
        fuel[k + 1] = level
        if is_site(walk[k + 1]):
            level, last = problem.U, walk[k + 1]
        mrv[k + 1] = last
    return fuel, mrv


def fuel_check(problem: Problem, walk: Sequence[Vertex], start: int = 0) -> Violation | None:
    """First unsafe leg of ``walk`` at or after position ``start`` (a site).

    A leg ``a -> b`` is unsafe when the fuel left at ``a`` does not cover the
    leg plus the distance from ``b`` to its nearest refueling site, or when
    ``b`` is a site the vehicle cannot reach from the last site within R.
    """
    if not is_site(walk[start]):
        raise ValueError("fuel_check must start at a site")
    U = problem.U
    level, last = U, walk[start]
    for k in range(start, len(walk) - 1):
        a, b = walk[k], walk[k + 1]
        rem = level
        need = problem.f(a, b) + _guard(problem, b)
        if rem < need - TOL:
            return Violation(k, a, b, max(0.0, min(U, rem)), last, "fuel")
        if is_site(b) and problem.r(last, b) > problem.R + TOL:
            return Violation(k, a, b, max(0.0, min(U, rem)), last, "rv")
        level = rem - problem.f(a, b)
        if is_site(b):
            level, last = U, b
    return None


def indirect_path(problem: Problem, t_i: Vertex, t_j: Vertex, s_mrv: Vertex, U_rem: float,
                  sites: Sequence[int] | None = None) -> list[Vertex]:
    """Cheapest chain of refueling sites taking the UAV from ``t_i`` to ``t_j``.

    The search graph joins ``t_i`` to sites within ``U_rem`` that the vehicle
    can reach from ``s_mrv``; sites to each other when within R by road and U
    by air; and sites to ``t_j`` when within U/2 (or, if ``t_j`` is itself a
    site, through the site edges). Weights are flight distances.
    """
    U, R = problem.U, problem.R
    ids = list(problem.site_ids if sites is None else sites)
    sink_site = t_j[1] if is_site(t_j) else None
    if sink_site is not None and sink_site not in ids:
        ids.append(sink_site)
    src_site = t_i[1] if is_site(t_i) else None
    rd = problem.road.road_dist
    xy = problem.road.sites

    def fly(a: int, b: int) -> float:
        return math.hypot(xy[a, 0] - xy[b, 0], xy[a, 1] - xy[b, 1])

    # node keys: -1 source, -2 sink, otherwise the candidate site id
    dist = {-1: 0.0}
    prev: dict[int, int] = {}
    heap = [(0.0, 0, -1)]
    done = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == -2:
            break
        steps = []
        if u == -1:
            for s in ids:
                if s == src_site or s == sink_site:
                    continue
                if rd[s_mrv[1], s] > R + TOL:
                    continue
                w = problem.f(t_i, site(s))
                if w <= U_rem + TOL:
                    steps.append((s, w))
        else:
            for s in ids:
                if s == u or s == src_site:
                    continue
                if rd[u, s] <= R + TOL:
                    w = fly(u, s)
                    if w <= U + TOL:
                        steps.append((-2 if s == sink_site else s, w))
            if sink_site is None:
                w = problem.f(site(u), t_j)
                if w <= U / 2 + TOL:
                    steps.append((-2, w))
        for v, w in steps:
            nd = d + w
            if v not in done and nd < dist.get(v, math.inf) - 1e-12:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v if v >= 0 else len(xy), v))
    if -2 not in done:
        raise NoPath(f"no refueling chain from {t_i} to {t_j}")
    chain = []
    v = prev[-2]
    while v != -1:
        chain.append(site(v))
        v = prev[v]
    chain.reverse()
    return chain


def repair(problem: Problem, tour: Sequence[Vertex], max_rounds: int | None = None
           ) -> RouteSolution:
    """Splice refueling chains into ``tour`` until the walk is fuel-safe.

    The target order is never changed. After each splice the walk up to the
    chain's last site is frozen and the scan resumes there with a full tank.
    When no chain exists for a leg the scan backs up one vertex at a time,
    but never before the start of the unfrozen part.
    """
    walk = list(tour)
    if not walk or walk[0] != problem.s0 or walk[-1] != problem.s0:
        raise RepairFailure("tour must start and end at the start site")
    limit = max_rounds if max_rounds is not None else 2 * (len(walk) + 1) * (len(problem.site_ids) + 1)
    start = 0
    frozen = [0]
    splices = []
    while True:
        v = fuel_check(problem, walk, start)
        if v is None:
            break
        if len(splices) >= limit:
            raise RepairFailure(f"no progress after {limit} repairs")
        fuel, mrv = _simulate(problem, walk, start)
        i = v.k
        while True:
            t_i, t_j = walk[i], walk[i + 1]
            rem = problem.U if is_site(t_i) else max(0.0, min(problem.U, fuel[i]))
            try:
                chain = indirect_path(problem, t_i, t_j, mrv[i], rem)
                break
            except NoPath:
                if i == start:
                    raise RepairFailure(
                        f"no refueling chain out of {t_i}; site selection invariants broken"
                    ) from None
                i -= 1
        walk[i + 1:i + 1] = chain
        splices.append((i, tuple(chain)))
        start = i + len(chain)
        frozen.append(start)
    return make_solution(problem, walk, producer="tsp-repair",
                         meta={"splices": splices, "frozen": frozen})


def heuristic_solve(problem: Problem, seed: int = 0, restarts: int = 0) -> RouteSolution:
    """TSP tour, then repair if the tour is not fuel-safe. Always verified."""
    t0 = time.perf_counter()
    tour = tsp_tour(problem, seed=seed, restarts=restarts)
    if fuel_check(problem, tour) is None:
        sol = make_solution(problem, tour, producer="tsp-repair", meta={"splices": [], "frozen": [0]})
    else:
        sol = repair(problem, tour)
    issues = verify_solution(problem, sol)
    if issues:
        raise RepairFailure("repaired walk failed verification: " + "; ".join(issues))
    return sol.with_(wall_time_s=time.perf_counter() - t0)


__all__ = ["Violation", "fuel_check", "heuristic_solve", "indirect_path", "repair", "tsp_tour"]
