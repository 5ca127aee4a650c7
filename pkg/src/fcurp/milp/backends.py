"""Thin adapters presenting different MIP engines through one small interface.

An adapter that can call back into Python on every candidate integer solution
sets ``supports_lazy``; the cut loop then separates subtours inside the
search. Otherwise the loop re-solves after adding cuts.
"""
from __future__ import annotations

import importlib.util
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import BackendFailure

log = logging.getLogger(__name__)

# backend-level outcome codes
OPTIMAL = "optimal"          # proven optimal, or within the requested gap
TIME_LIMIT = "time_limit"
INFEASIBLE = "infeasible"
OTHER = "other"

# hook(values, record=True) -> (any_violation, new rows as (coeffs, sense, rhs));
# with record=False the hook only detects and never emits rows
LazyHook = Callable[..., tuple[bool, list]]


@dataclass
class BackendResult:
    status: str
    values: np.ndarray | None
    objective: float
    bound: float
    time_s: float = 0.0


class MipBackend(ABC):
    name = "abstract"
    supports_lazy = False

    @abstractmethod
    def add_continuous_var(self, lb: float, ub: float, obj: float, name: str = "") -> int: ...

    @abstractmethod
    def add_binary_var(self, obj: float, name: str = "", lb: float = 0.0, ub: float = 1.0) -> int: ...

    @abstractmethod
    def add_linear_constraint(self, coeffs: dict[int, float], sense: str, rhs: float,
                              name: str = "") -> None: ...

    @abstractmethod
    def set_time_limit(self, seconds: float) -> None: ...

    @abstractmethod
    def set_gap(self, gap: float) -> None: ...

    @abstractmethod
    def set_mip_start(self, assignment: dict[int, float]) -> None: ...

    @abstractmethod
    def solve(self) -> BackendResult: ...

    def on_integer_solution(self, hook: LazyHook) -> None:
        raise NotImplementedError(f"{self.name} has no integer-solution callback")


def _have(module: str) -> bool:
    return importlib.util.find_spec(module) is not None


def available_backends() -> list[str]:
    return [name for name, mod in (("scip", "pyscipopt"), ("highs", "highspy")) if _have(mod)]


def make_backend(name: str | None = None) -> MipBackend:
    names = available_backends()
    if name is None:
        if not names:
            raise BackendFailure("no MIP backend installed (pip install pyscipopt or highspy)")
        name = names[0]
    if name == "scip":
        return ScipBackend()
    if name == "highs":
        return HighsBackend()
    raise BackendFailure(f"unknown backend {name!r}; available: {names}")


class ScipBackend(MipBackend):
    name = "scip"
    supports_lazy = True

    def __init__(self, threads: int = 1):
        from pyscipopt import Model

        self.m = Model()
        self.m.hideOutput()
        # a lazy handler without constraint locks makes dual reductions unsafe
        self.m.setBoolParam("misc/allowstrongdualreds", False)
        self.m.setBoolParam("misc/allowweakdualreds", False)
        self.m.setIntParam("parallel/maxnthreads", threads)
        self.vars = []
        self._binaries = []
        self._start = None
        self._hook = None
        self._solved = False

    def _editable(self):
        # a solved model must drop its transformed copy before it can change
        if self._solved:
            self.m.freeTransform()
            self._solved = False

    def add_continuous_var(self, lb, ub, obj, name=""):
        self.vars.append(self.m.addVar(name=name or f"v{len(self.vars)}", vtype="C", lb=lb, ub=ub, obj=obj))
        return len(self.vars) - 1

    def add_binary_var(self, obj, name="", lb=0.0, ub=1.0):
        v = self.m.addVar(name=name or f"v{len(self.vars)}", vtype="B", lb=lb, ub=ub, obj=obj)
        self.vars.append(v)
        self._binaries.append(v)
        return len(self.vars) - 1

    def _expr(self, coeffs):
        from pyscipopt import quicksum

        return quicksum(c * self.vars[j] for j, c in coeffs.items())

    def add_linear_constraint(self, coeffs, sense, rhs, name=""):
        self._editable()
        self.m.addCons(_relation(self._expr(coeffs), sense, rhs), name=name or "")

    def set_time_limit(self, seconds):
        self.m.setRealParam("limits/time", max(float(seconds), 0.01))

    def set_gap(self, gap):
        self.m.setRealParam("limits/gap", float(gap))

    def set_mip_start(self, assignment):
        self._start = dict(assignment)

    def on_integer_solution(self, hook):
        self._hook = hook
        handler = _make_scip_handler(self)
        self.m.includeConshdlr(handler, "lazy_subtour", "lazy subtour elimination",
                               enfopriority=-1, chckpriority=-1, needscons=False)

    def solve(self):
        self._editable()
        if self._start is not None:
            sol = self.m.createSol()
            for j, v in self._start.items():
                self.m.setSolVal(sol, self.vars[j], v)
            if not self.m.addSol(sol):
                log.info("scip rejected the MIP start")
        try:
            self.m.optimize()
        except Exception as exc:  # pyscipopt raises plain Exceptions
            raise BackendFailure(f"scip failed: {exc}") from exc
        self._solved = True
        st = self.m.getStatus()
        has_sol = self.m.getNSols() > 0
        values = None
        obj = math.inf
        if has_sol:
            best = self.m.getBestSol()
            values = np.array([self.m.getSolVal(best, v) for v in self.vars])
            obj = self.m.getSolObjVal(best)
        bound = self.m.getDualbound()
        if st in ("optimal", "gaplimit"):
            code = OPTIMAL
        elif st == "infeasible":
            code = INFEASIBLE
        elif st in ("timelimit", "userinterrupt", "nodelimit", "sollimit", "stallnodelimit"):
            code = TIME_LIMIT
        else:
            code = OTHER
        if code == INFEASIBLE:
            bound = math.inf
        return BackendResult(code, values, obj, float(bound), self.m.getSolvingTime())


def _make_scip_handler(backend: ScipBackend):
    from pyscipopt import SCIP_RESULT, Conshdlr

    class LazyHandler(Conshdlr):
        def _values(self, solution=None):
            return np.array([self.model.getSolVal(solution, v) for v in backend.vars])

        def _enforce(self):
            violated, rows = backend._hook(self._values())
            if not violated:
                return {"result": SCIP_RESULT.FEASIBLE}
            for coeffs, sense, rhs in rows:
                self.model.addCons(_relation(backend._expr(coeffs), sense, rhs), name="subtour")
            if rows:
                return {"result": SCIP_RESULT.CONSADDED}
            return {"result": SCIP_RESULT.INFEASIBLE}

        def conscheck(self, constraints, solution, checkintegrality, checklprows, printreason,
                      completely, **kw):
            violated, _ = backend._hook(self._values(solution), record=False)
            return {"result": SCIP_RESULT.INFEASIBLE if violated else SCIP_RESULT.FEASIBLE}

        def consenfolp(self, constraints, nusefulconss, solinfeasible):
            return self._enforce()

        def consenfops(self, constraints, nusefulconss, solinfeasible, objinfeasible):
            return self._enforce()

        def consenforelax(self, solution, constraints, nusefulconss, solinfeasible):
            return self._enforce()

        def conslock(self, constraint, locktype, nlockspos, nlocksneg):
            for v in backend._binaries:
                self.model.addVarLocksType(v, locktype, nlockspos + nlocksneg, nlockspos + nlocksneg)

    return LazyHandler()


def _relation(expr, sense, rhs):
    if sense == "<=":
        return expr <= rhs
    if sense == ">=":
        return expr >= rhs
    if sense == "==":
        return expr == rhs
    raise ValueError(f"bad sense {sense!r}")


class HighsBackend(MipBackend):
    name = "highs"
    supports_lazy = False

    def __init__(self, threads: int = 1):
        import highspy

        self._hs = highspy
        self.h = highspy.Highs()
        self.h.setOptionValue("output_flag", False)
        self.h.setOptionValue("threads", threads)
        self.h.setOptionValue("mip_feasibility_tolerance", 1e-7)
        self.n = 0
        self._start = None

    def _add(self, lb, ub, obj, integer):
        self.h.addVar(lb, ub)
        j = self.n
        self.n += 1
        if obj:
            self.h.changeColCost(j, obj)
        if integer:
            self.h.changeColIntegrality(j, self._hs.HighsVarType.kInteger)
        return j

    def add_continuous_var(self, lb, ub, obj, name=""):
        return self._add(lb, ub, obj, False)

    def add_binary_var(self, obj, name="", lb=0.0, ub=1.0):
        return self._add(lb, ub, obj, True)

    def add_linear_constraint(self, coeffs, sense, rhs, name=""):
        inf = self._hs.kHighsInf
        lo, hi = {"<=": (-inf, rhs), ">=": (rhs, inf), "==": (rhs, rhs)}[sense]
        idx = np.fromiter(coeffs.keys(), dtype=np.int32, count=len(coeffs))
        val = np.fromiter(coeffs.values(), dtype=np.float64, count=len(coeffs))
        self.h.addRow(lo, hi, len(idx), idx, val)

    def set_time_limit(self, seconds):
        self.h.setOptionValue("time_limit", max(float(seconds), 0.01))

    def set_gap(self, gap):
        self.h.setOptionValue("mip_rel_gap", float(gap))
        if gap == 0:
            self.h.setOptionValue("mip_abs_gap", 0.0)

    def set_mip_start(self, assignment):
        self._start = dict(assignment)

    def solve(self):
        hs = self._hs
        if self._start is not None:
            sol = hs.HighsSolution()
            col = [0.0] * self.n
            for j, v in self._start.items():
                col[j] = float(v)
            sol.col_value = col
            sol.value_valid = True
            self.h.setSolution(sol)
        run = self.h.run()
        if run == hs.HighsStatus.kError:
            raise BackendFailure("highs returned an error status")
        st = self.h.getModelStatus()
        info = self.h.getInfo()
        values = None
        obj = math.inf
        if info.primal_solution_status == 2:  # kSolutionStatusFeasible
            values = np.array(self.h.getSolution().col_value)
            obj = info.objective_function_value
        bound = info.mip_dual_bound
        MS = hs.HighsModelStatus
        if st == MS.kOptimal:
            code = OPTIMAL
        elif st == MS.kInfeasible:
            code = INFEASIBLE
            bound = math.inf
        elif st in (MS.kTimeLimit, MS.kInterrupt, MS.kSolutionLimit, MS.kIterationLimit):
            code = TIME_LIMIT
        else:
            code = OTHER
        return BackendResult(code, values, obj, float(bound), self.h.getRunTime())
