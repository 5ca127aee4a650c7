"""Invariant groups that need no MIP backend.

Run alone with ``pytest tests/test_properties.py --no-backend``; each class is
an independent group.
"""
import dataclasses
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fcurp.errors import Infeasible
from fcurp.heuristic import heuristic_solve
from fcurp.instancegen import U_MENU, R_MENU, GenConfig, generate, tiny_instance
from fcurp.model import discretize_road, euclid
from fcurp.oracle import brute_force_opt
from fcurp.sites import select_sites
from fcurp.solution import Problem, is_site

generated = st.builds(
    lambda kind, n, U, R, i: generate(GenConfig(grid_n=n, U=U, R=R, network_kind=kind), i),
    st.sampled_from(["dense", "sparse"]), st.integers(3, 7), st.sampled_from(U_MENU),
    st.sampled_from(R_MENU), st.integers(0, 50))


def feasible(inst):
    try:
        return Problem.build(inst)
    except Infeasible:
        assume(False)


def plans(problem):
    """Every plan this problem admits from the backend-free strategies."""
    out = [heuristic_solve(problem)]
    if problem.n_targets <= 5 and len(problem.site_ids) <= 4:
        out.append(brute_force_opt(problem))
    return out


class TestMetricProperties:
    @settings(max_examples=30, deadline=None)
    @given(generated, st.sampled_from([0.5, 1.0, 2.0]))
    def test_road_metric(self, inst, delta):
        road = discretize_road(dataclasses.replace(inst, delta=delta))
        r = road.road_dist
        assert np.array_equal(r, r.T)
        assert not np.diagonal(r).any()
        # triangle inequality through every intermediate site
        for k in range(0, road.n_sites, max(1, road.n_sites // 25)):
            assert np.all(r <= r[:, [k]] + r[[k], :] + 1e-9)
        E = np.hypot(*(road.sites[:, None, :] - road.sites[None, :, :]).transpose(2, 0, 1))
        assert np.all(r >= E - 1e-9)

    @settings(max_examples=100, deadline=None)
    @given(*[st.tuples(st.floats(-50, 50), st.floats(-50, 50))] * 3)
    def test_flight_metric(self, p, q, w):
        assert euclid(p, q) == euclid(q, p) >= 0
        assert euclid(p, w) <= euclid(p, q) + euclid(q, w) + 1e-9


class TestSiteSelectionVerification:
    @settings(max_examples=40, deadline=None)
    @given(generated)
    def test_coverage_and_connectedness(self, inst):
        road = discretize_road(inst)
        try:
            sel = select_sites(road)
        except Infeasible:
            return
        U, R = inst.U, inst.R
        S = list(sel.selected)
        for t in inst.targets:
            assert min(euclid(t, road.sites[s]) for s in S) <= U / 2 + 1e-9
        reach, stack = {S[0]}, [S[0]]
        while stack:
            a = stack.pop()
            for b in S:
                if b not in reach and road.road_dist[a, b] <= R + 1e-9:
                    reach.add(b)
                    stack.append(b)
        assert reach == set(S)


class TestFuelProfile:
    @settings(max_examples=30, deadline=None)
    @given(generated)
    def test_generated_plans_never_run_dry(self, inst):
        p = feasible(inst)
        for sol in plans(p):
            self._check(p, sol)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_tiny_plans_never_run_dry(self, seed):
        p = Problem.build(tiny_instance(seed))
        for sol in plans(p):
            self._check(p, sol)

    @staticmethod
    def _check(p, sol):
        fuel = p.U
        pts = [p.xy(v) for v in sol.walk]
        for k in range(1, len(pts)):
            fuel -= math.dist(pts[k - 1], pts[k])
            assert fuel >= -1e-9
            if is_site(sol.walk[k]):
                fuel = p.U
        assert min(sol.fuel_profile) >= -1e-9


class TestRvRange:
    @settings(max_examples=30, deadline=None)
    @given(generated)
    def test_generated_plans_respect_road_range(self, inst):
        p = feasible(inst)
        for sol in plans(p):
            self._check(p, sol)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_tiny_plans_respect_road_range(self, seed):
        p = Problem.build(tiny_instance(seed))
        for sol in plans(p):
            self._check(p, sol)

    @staticmethod
    def _check(p, sol):
        stops = [v[1] for v in sol.walk if is_site(v)]
        assert list(sol.rv_route) == stops
        for a, b in zip(stops, stops[1:]):
            assert p.road.road_dist[a, b] <= p.R + 1e-9
