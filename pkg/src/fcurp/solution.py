"""Route solutions, the shared planning context, and the independent verifier."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import DiscretizedRoad, Instance, discretize_road, pairwise_euclid
from .sites import SiteSelection, select_sites

OPTIMAL = "Optimal"
FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
TIMED_OUT = "TimedOut"
STATUSES = (OPTIMAL, FEASIBLE, INFEASIBLE, TIMED_OUT)

FEAS_TOL = 1e-6

# A walk vertex is ("t", target index) or ("s", candidate site id).
Vertex = tuple


def target(i: int) -> Vertex:
    return ("t", int(i))


def site(i: int) -> Vertex:
    return ("s", int(i))


def is_site(v: Vertex) -> bool:
    return v[0] == "s"


def vertex_label(v: Vertex) -> str:
    return f"{v[0]}{v[1]}"


def parse_vertex(label) -> Vertex:
    if isinstance(label, str) and label[:1] in ("t", "s") and label[1:].isdigit():
        return (label[0], int(label[1:]))
    raise ValueError(f"bad vertex label {label!r}")


@dataclass(frozen=True, eq=False)
class Problem:
    """Stage-two input: an instance, its discretized road, and the selected sites."""

    instance: Instance
    road: DiscretizedRoad
    selection: SiteSelection

    @classmethod
    def build(cls, instance: Instance, selection: SiteSelection | None = None) -> "Problem":
        road = discretize_road(instance)
        if selection is None:
            selection = select_sites(road, len(instance.targets))
        return cls(instance, road, selection)

    @property
    def U(self) -> float:
        return self.instance.U

    @property
    def R(self) -> float:
        return self.instance.R

    @property
    def n_targets(self) -> int:
        return len(self.instance.targets)

    @property
    def s0(self) -> Vertex:
        return site(self.selection.s0)

    @property
    def site_ids(self) -> tuple[int, ...]:
        return self.selection.selected

    def xy(self, v: Vertex) -> np.ndarray:
        if v[0] == "t":
            return self.road.targets[v[1]]
        return self.road.sites[v[1]]

    def f(self, a: Vertex, b: Vertex) -> float:
        pa, pb = self.xy(a), self.xy(b)
        return math.hypot(pa[0] - pb[0], pa[1] - pb[1])

    def r(self, a: Vertex, b: Vertex) -> float:
        return float(self.road.road_dist[a[1], b[1]])

    @cached_property
    def nearest_cover(self) -> np.ndarray:
        """Distance from each target to its closest selected site."""
        d = pairwise_euclid(self.road.targets, self.road.sites[list(self.site_ids)])
        return d.min(axis=1)


@dataclass(frozen=True)
class RouteSolution:
    walk: tuple = ()
    rv_route: tuple[int, ...] = ()
    fuel_profile: tuple[float, ...] = ()
    cost: float = math.inf
    producer: str = ""
    bound: float = math.nan
    status: str = INFEASIBLE
    wall_time_s: float = 0.0
    cuts_added: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def gap(self) -> float:
        """Relative gap in percent, 100 * (cost - bound) / cost."""
        return relative_gap(self.cost, self.bound)

    def with_(self, **kw) -> "RouteSolution":
        return replace(self, **kw)

    def to_dict(self, problem: Problem | None = None) -> dict:
        doc = {
            "walk": [vertex_label(v) for v in self.walk],
            "rv_route": list(self.rv_route),
            "fuel_profile": [round(x, 12) for x in self.fuel_profile],
            "cost": _num(self.cost),
            "bound": _num(self.bound),
            "gap": _num(self.gap),
            "status": self.status,
            "producer": self.producer,
            "wall_time_s": self.wall_time_s,
            "cuts_added": self.cuts_added,
        }
        if problem is not None:
            doc["walk_xy"] = [[float(c) for c in problem.xy(v)] for v in self.walk]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "RouteSolution":
        return cls(
            walk=tuple(parse_vertex(v) for v in doc.get("walk", [])),
            rv_route=tuple(int(s) for s in doc.get("rv_route", [])),
            fuel_profile=tuple(float(x) for x in doc.get("fuel_profile", [])),
            cost=_float(doc.get("cost")),
            producer=doc.get("producer", "external"),
            bound=_float(doc.get("bound")),
            status=doc.get("status", FEASIBLE),
            wall_time_s=float(doc.get("wall_time_s") or 0.0),
            cuts_added=int(doc.get("cuts_added") or 0),
        )

    def save(self, path, problem: Problem | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(problem), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "RouteSolution":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _num(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _float(x):
    return math.nan if x is None else float(x)


def relative_gap(cost: float, bound: float) -> float:
    if not (math.isfinite(cost) and math.isfinite(bound)):
        return math.nan
    if cost == bound:
        return 0.0
    if cost <= 0:
        return math.nan
    return 100.0 * (cost - bound) / cost


def walk_cost(problem: Problem, walk: Sequence[Vertex]) -> float:
    return sum(problem.f(a, b) for a, b in zip(walk, walk[1:]))


def fuel_profile(problem: Problem, walk: Sequence[Vertex]) -> tuple[float, ...]:
    """Fuel on arrival at each walk vertex, before any refuel (the start holds U)."""
    if not walk:
        return ()
    U = problem.U
    out = [U]
    fuel = U
    for a, b in zip(walk, walk[1:]):
        fuel -= problem.f(a, b)
        out.append(fuel)
        if is_site(b):
            fuel = U
    return tuple(out)


def rv_route_of(walk: Sequence[Vertex]) -> tuple[int, ...]:
    return tuple(v[1] for v in walk if is_site(v))


def make_solution(problem: Problem, walk, *, producer: str, status: str = FEASIBLE,
                  bound: float = math.nan, **kw) -> RouteSolution:
    walk = tuple(walk)
    return RouteSolution(
        walk=walk,
        rv_route=rv_route_of(walk),
        fuel_profile=fuel_profile(problem, walk),
        cost=walk_cost(problem, walk),
        producer=producer,
        bound=bound,
        status=status,
        **kw,
    )


def verify_solution(problem: Problem, sol: RouteSolution) -> list[str]:
    """Recheck a solution against the routing constraints from raw geometry.

    Returns a list of human-readable violations; empty means the plan is valid.
    """
    out = []
    walk = list(sol.walk)
    if len(walk) < 2:
        return ["walk is empty"]
    m = problem.n_targets
    allowed_sites = set(problem.site_ids)
    for k, v in enumerate(walk):
        if v[0] == "t" and not 0 <= v[1] < m:
            out.append(f"unknown target {v[1]} at walk position {k}")
        elif v[0] == "s" and v[1] not in allowed_sites:
            out.append(f"site {v[1]} at walk position {k} is not a selected refueling site")
        elif v[0] not in ("t", "s"):
            out.append(f"bad vertex {v!r} at walk position {k}")
    if out:
        return out
    if walk[0] != problem.s0 or walk[-1] != problem.s0:
        out.append("walk must start and end at the mission start site")
    counts = {}
    for v in walk:
        if v[0] == "t":
            counts[v[1]] = counts.get(v[1], 0) + 1
    for t in range(m):
        c = counts.get(t, 0)
        if c != 1:
            out.append(f"target {t} visited {c} times")
    for k, (a, b) in enumerate(zip(walk, walk[1:])):
        if a == b:
            out.append(f"degenerate leg {k}: {vertex_label(a)} -> {vertex_label(b)}")

    U = problem.U
    fuel = U
    for k, (a, b) in enumerate(zip(walk, walk[1:])):
        fuel -= problem.f(a, b)
        if fuel < -FEAS_TOL:
            out.append(f"fuel violation at leg {k}: {vertex_label(a)} -> {vertex_label(b)} "
                       f"leaves {fuel:.6f}")
            fuel = 0.0
        if is_site(b):
            fuel = U

    sites_seq = [v for v in walk if is_site(v)]
    for a, b in zip(sites_seq, sites_seq[1:]):
        if problem.r(a, b) > problem.R + FEAS_TOL:
            out.append(f"RV range violation: sites {a[1]} -> {b[1]} are {problem.r(a, b):.4f} km "
                       f"apart by road (R = {problem.R:g})")

    if tuple(sol.rv_route) != rv_route_of(walk):
        out.append("rv_route does not match the site visits of the walk")
    cost = walk_cost(problem, walk)
    if not math.isfinite(sol.cost) or abs(cost - sol.cost) > FEAS_TOL:
        out.append(f"reported cost {sol.cost} differs from recomputed {cost:.9f}")
    if sol.fuel_profile:
        ref = fuel_profile(problem, walk)
        if len(ref) != len(sol.fuel_profile) or any(
            abs(x - y) > FEAS_TOL for x, y in zip(ref, sol.fuel_profile)
        ):
            out.append("fuel_profile does not match the simulated fuel along the walk")
    return out
