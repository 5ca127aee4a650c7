"""Exhaustive search for provably optimal plans on toy instances."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import Infeasible, TooLarge
from .milp.graph import RoutingGraph
from .solution import OPTIMAL, Problem, RouteSolution, make_solution


@dataclass(frozen=True)
class OracleConfig:
    max_targets: int = 5
    max_sites: int = 4
    max_site_visits: int | None = None  # None: number of targets + 2
    cost_prune: float = math.inf

    def __post_init__(self):
        if self.max_targets < 1 or self.max_sites < 1:
            raise ValueError("oracle caps must be positive")
        if self.max_site_visits is not None and self.max_site_visits < 1:
            raise ValueError("max_site_visits must be positive")

    def visit_cap(self, n_targets: int) -> int:
        return self.max_site_visits if self.max_site_visits is not None else n_targets + 2


def _search(g: RoutingGraph, cap: int, prune: float):
    r = np.zeros((g.n, g.n))
    for a in g.sites:
        for b in g.sites:
            r[a, b] = g.road(a, b)
    return kernels.oracle_search(g.f, r, g.n_targets, g.s0, g.U, g.R, cap, prune)


def sufficient_cap(n_targets: int, n_sites: int) -> int:
    """Site stops that always suffice: between consecutive targets an optimal
    walk never repeats a site (the loop can be shortcut), so each of the
    ``n_targets + 1`` stretches holds at most ``n_sites`` stops."""
    return (n_targets + 1) * n_sites


def brute_force_opt(problem: Problem, cfg: OracleConfig | None = None, *,
                    escalate: bool = True) -> RouteSolution:
    """Minimum-cost walk over targets and selected sites, by depth-first
    branch and bound over every walk with a bounded number of site stops.

    The search starts at ``cfg.visit_cap``. With ``escalate`` it reruns with
    one more stop until an extra stop no longer helps (or the always-sufficient
    cap is reached); ``meta['cap_sufficient']`` records whether the optimum was
    confirmed that way. Raises ``TooLarge`` beyond the configured size caps and
    ``Infeasible`` when no walk exists.
    """
    cfg = cfg or OracleConfig()
    m, p = problem.n_targets, len(problem.site_ids)
    if m > cfg.max_targets or p > cfg.max_sites:
        raise TooLarge(f"oracle limited to {cfg.max_targets} targets and {cfg.max_sites} sites, "
                       f"got {m} and {p}")
    t0 = time.perf_counter()
    g = RoutingGraph.from_problem(problem)
    top = sufficient_cap(m, p)
    cap = cfg.visit_cap(m)
    cost, walk = _search(g, cap, cfg.cost_prune)
    confirmed = cap >= top
    while escalate and not confirmed:
        cap += 1
        c2, w2 = _search(g, cap, cost)  # only strictly better walks come back
        if w2:
            cost, walk = c2, w2
        elif walk:
            confirmed = True
        confirmed = confirmed or cap >= top
    if not walk:
        raise Infeasible(f"no feasible walk with at most {cap} site visits")
    meta = {"visit_cap": cap, "cap_sufficient": confirmed}
    sol = make_solution(problem, [g.vertices[i] for i in walk], producer="oracle",
                        status=OPTIMAL, meta=meta)
    return sol.with_(bound=sol.cost, wall_time_s=time.perf_counter() - t0)


__all__ = ["OracleConfig", "brute_force_opt", "sufficient_cap"]
