"""Node-labelled and edge-labelled MILP formulations of the joint routing problem.

Both minimize total UAV flight distance over binary arc variables ``x``. The
exponential subtour family is not enumerated; cuts are added lazily from
``fcurp.milp.separation`` into ``MilpModel.cut_pool``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .graph import RoutingGraph

LE, EQ, GE = "<=", "==", ">="


@dataclass
class Row:
    coeffs: dict[int, float]
    sense: str
    rhs: float
    family: str

    def activity(self, values) -> float:
        return sum(c * values[j] for j, c in self.coeffs.items())

    def violation(self, values) -> float:
        a = self.activity(values)
        if self.sense == LE:
            return max(0.0, a - self.rhs)
        if self.sense == GE:
            return max(0.0, self.rhs - a)
        return abs(a - self.rhs)


@dataclass
class MilpModel:
    kind: str
    graph: RoutingGraph
    U: float
    R: float
    M: float
    names: list[str] = field(default_factory=list)
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    obj: list[float] = field(default_factory=list)
    binary: list[bool] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    x: dict[tuple[int, int], int] = field(default_factory=dict)
    y: dict[tuple[int, int], int] = field(default_factory=dict)
    u: dict[int, int] = field(default_factory=dict)
    z: dict[tuple[int, int], int] = field(default_factory=dict)
    cut_pool: list = field(default_factory=list)
    # index-set members whose row would only involve nonexistent self-loop arcs
    vacuous: Counter = field(default_factory=Counter)
    _cut_keys: set = field(default_factory=set, repr=False)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def family_counts(self) -> Counter:
        return Counter(r.family for r in self.rows)

    def _var(self, name, lb, ub, obj, binary) -> int:
        self.names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.obj.append(float(obj))
        self.binary.append(binary)
        return len(self.names) - 1

    def _row(self, coeffs, sense, rhs, family) -> None:
        merged: dict[int, float] = {}
        for j, c in coeffs:
            merged[j] = merged.get(j, 0.0) + c
        self.rows.append(Row({j: c for j, c in merged.items() if c != 0.0}, sense, float(rhs), family))

    def objective_of(self, values) -> float:
        return float(sum(c * values[j] for j, c in enumerate(self.obj) if c))

    def cut_row(self, cut) -> Row:
        P = cut.vertices
        coeffs = {col: 1.0 for (i, j), col in self.x.items() if i in P and j not in P}
        return Row(coeffs, GE, 1.0, "subtour")

    def add_cut(self, cut) -> bool:
        """Record a cut in the pool; False if an identical cut is already there."""
        if cut.vertices in self._cut_keys:
            return False
        self._cut_keys.add(cut.vertices)
        self.cut_pool.append(cut)
        return True

    def violated_rows(self, values, tol: float = 1e-6) -> list[Row]:
        """Rows (and variable bounds, as pseudo-rows) violated by a full assignment."""
        bad = [r for r in self.rows if r.violation(values) > tol]
        bad += [self.cut_row(c) for c in self.cut_pool if self.cut_row(c).violation(values) > tol]
        for j in range(self.n_vars):
            v = values[j]
            if v < self.lb[j] - tol or v > self.ub[j] + tol:
                bad.append(Row({j: 1.0}, "bounds", v, f"bound:{self.names[j]}"))
            elif self.binary[j] and abs(v - round(v)) > tol:
                bad.append(Row({j: 1.0}, "integrality", v, f"integrality:{self.names[j]}"))
        return bad


def big_m(g: RoutingGraph) -> float:
    return g.U + float(g.f.max())


def _common(g: RoutingGraph, kind: str) -> MilpModel:
    """Arc and last-site variables plus the degree and refueling-site families
    shared by both formulations."""
    model = MilpModel(kind=kind, graph=g, U=g.U, R=g.R, M=big_m(g))
    T, S, V = list(g.targets), list(g.sites), range(g.n)
    f = g.f
    for i in V:
        for j in V:
            if i == j:
                continue
            ub = 1.0
            both_sites = not g.is_target(i) and not g.is_target(j)
            if both_sites and f[i, j] > g.U + 1e-9:
                ub = 0.0  # direct site-to-site hop longer than a full tank
            if both_sites and j not in g.N(i):
                ub = 0.0  # RV cannot follow a site-to-site hop beyond R
            model.x[i, j] = model._var(f"x[{i},{j}]", 0.0, ub, f[i, j], True)
    for t in T:
        for s in S:
            model.y[t, s] = model._var(f"y[{t},{s}]", 0.0, 1.0, 0.0, True)
    x, y = model.x, model.y

    for j in V:
        model._row([(x[i, j], 1.0) for i in V if i != j] + [(x[j, i], -1.0) for i in V if i != j],
                   EQ, 0.0, "degree_balance")
    for t in T:
        model._row([(x[i, t], 1.0) for i in V if i != t], EQ, 1.0, "visit_once")

    for t in T:
        for s in S:
            model._row([(y[t, s], 1.0), (x[s, t], -1.0)], GE, 0.0, "last_site_direct")
    for s in S:
        for t1 in T:
            for t2 in T:
                if t1 == t2:
                    model.vacuous["last_site_carry"] += 2
                    continue
                # y[t2,s] - y[t1,s] <= 1 - x[t1,t2]  and  >= -(1 - x[t1,t2])
                model._row([(y[t2, s], 1.0), (y[t1, s], -1.0), (x[t1, t2], 1.0)], LE, 1.0,
                           "last_site_carry")
                model._row([(y[t2, s], 1.0), (y[t1, s], -1.0), (x[t1, t2], -1.0)], GE, -1.0,
                           "last_site_carry")
    for t in T:
        for s in S:
            far = [k for k in S if k not in g.N(s)]
            model._row([(x[t, k], 1.0) for k in far] + [(y[t, s], 1.0)], LE, 1.0,
                       "rv_reach_from_target")
    for t in T:
        model._row([(y[t, s], 1.0) for s in S], EQ, 1.0, "one_last_site")
    return model


def build_node_model(g: RoutingGraph, U: float | None = None, R: float | None = None) -> MilpModel:
    """Formulation with one fuel-level variable per target and big-M linking rows."""
    _check(g, U, R)
    model = _common(g, "node")
    T, S, V = list(g.targets), list(g.sites), range(g.n)
    f, x, M, Ucap = g.f, model.x, model.M, g.U
    for t in T:
        model.u[t] = model._var(f"u[{t}]", 0.0, Ucap, 0.0, False)
    u = model.u

    for t in T:
        for j in T:
            if t == j:
                model.vacuous["fuel_target_target"] += 2
                continue
            # u_t - u_j + f_jt <= M (1 - x_jt)  and  >= -M (1 - x_jt)
            model._row([(u[t], 1.0), (u[j], -1.0), (x[j, t], M)], LE, M - f[j, t],
                       "fuel_target_target")
            model._row([(u[t], 1.0), (u[j], -1.0), (x[j, t], -M)], GE, -M - f[j, t],
                       "fuel_target_target")
    for t in T:
        for k in S:
            # u_t - U + f_kt <= M (1 - x_kt)  and  >= -M (1 - x_kt)
            model._row([(u[t], 1.0), (x[k, t], M)], LE, M + Ucap - f[k, t], "fuel_site_target")
            model._row([(u[t], 1.0), (x[k, t], -M)], GE, -M + Ucap - f[k, t], "fuel_site_target")
    for t in T:
        for k in S:
            # -u_t + f_tk <= M (1 - x_tk)
            model._row([(u[t], -1.0), (x[t, k], M)], LE, M - f[t, k], "fuel_target_site")
    # total flight <= U * number of departures from sites
    coeffs = [(x[i, j], f[i, j]) for (i, j) in x]
    coeffs += [(x[k, i], -Ucap) for k in S for i in V if i != k]
    model._row(coeffs, LE, 0.0, "fuel_total")
    return model


def build_edge_model(g: RoutingGraph, U: float | None = None, R: float | None = None) -> MilpModel:
    """Formulation tracking fuel used since the last refuel on every arc."""
    _check(g, U, R)
    model = _common(g, "edge")
    T, S, V = list(g.targets), list(g.sites), range(g.n)
    f, x, Ucap = g.f, model.x, g.U
    for (i, j) in list(x):
        model.z[i, j] = model._var(f"z[{i},{j}]", 0.0, Ucap, 0.0, False)
    z = model.z

    for t in T:
        coeffs = [(z[t, i], 1.0) for i in V if i != t]
        coeffs += [(z[i, t], -1.0) for i in V if i != t]
        coeffs += [(x[t, i], -f[t, i]) for i in V if i != t]
        model._row(coeffs, EQ, 0.0, "fuel_flow")
    for k in S:
        for i in V:
            if i == k:
                continue
            model._row([(z[k, i], 1.0), (x[k, i], -f[k, i])], EQ, 0.0, "fuel_leave_site")
    for (i, j) in x:
        model._row([(z[i, j], 1.0), (x[i, j], -Ucap)], LE, 0.0, "fuel_arc_cap")
    return model


def _check(g: RoutingGraph, U, R) -> None:
    if g.n_targets < 1 or g.n - g.n_targets < 1:
        raise ValueError("need at least one target and one site")
    if U is not None and abs(U - g.U) > 1e-12:
        raise ValueError("U does not match the routing graph")
    if R is not None and abs(R - g.R) > 1e-12:
        raise ValueError("R does not match the routing graph")


def census_total(m: int, p: int) -> int:
    """Closed-form constraint count of the node formulation, subtour family excluded."""
    n = m + p
    return 1 + 2 * m + n + 5 * m * p + 2 * m * m + 2 * m * m * p


def census_variables(m: int, p: int) -> int:
    n = m + p
    return n * n + (p + 1) * m


def build_model(g: RoutingGraph, kind: str) -> MilpModel:
    if kind == "node":
        return build_node_model(g)
    if kind == "edge":
        return build_edge_model(g)
    raise ValueError(f"unknown formulation {kind!r}")


def assignment_vector(model: MilpModel, assignment: dict[int, float]) -> np.ndarray:
    out = np.zeros(model.n_vars)
    for j, v in assignment.items():
        out[j] = v
    return out
