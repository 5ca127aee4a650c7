import math

import numpy as np
import pytest

from fcurp.errors import ExtractionError, UnencodableWalk
from fcurp.heuristic import heuristic_solve
from fcurp.instancegen import GenConfig, generate, tiny_instance
from fcurp.milp import (
    RoutingGraph,
    build_edge_model,
    build_node_model,
    census_total,
    extract_routes,
    make_backend,
    milp_solve,
    separate_subtours,
    solve_with_cuts,
    warm_start_from,
)
from fcurp.milp.formulation import assignment_vector, big_m, census_variables
from fcurp.model import Point, RoadNetwork
from fcurp.oracle import brute_force_opt
from fcurp.sites import SiteSelection
from fcurp.solution import INFEASIBLE, OPTIMAL, Problem, make_solution, site, target, verify_solution

from conftest import BACKENDS, line_instance

backends = pytest.mark.parametrize("backend", BACKENDS or ["none"])
forms = pytest.mark.parametrize("form", ["node", "edge"])


def with_sites(problem, *site_ids):
    return Problem(problem.instance, problem.road, SiteSelection(tuple(site_ids), {}))


def one_target():
    # site (0,5) is the only selected site, target 2 km above it
    p = Problem.build(line_instance(targets=(Point(0, 7),)))
    assert p.site_ids == (0,)
    return p


# -- model structure ---------------------------------------------------------

def test_one_target_one_site_model_shape():
    g = RoutingGraph.from_problem(one_target())
    node = build_node_model(g)
    assert sorted(node.x) == [(0, 1), (1, 0)]  # self-loops are never created
    assert len(node.y) == 1 and len(node.u) == 1
    assert node.n_rows + sum(node.vacuous.values()) == census_total(1, 1)


@pytest.mark.parametrize("seed", range(8))
def test_census_matches_closed_form(seed):
    g = RoutingGraph.from_problem(Problem.build(tiny_instance(seed)))
    m, p = g.n_targets, g.n - g.n_targets
    node = build_node_model(g)
    # rows the closed form counts over i == j pairs reduce to 0 <= 0 and are skipped
    assert node.n_rows + sum(node.vacuous.values()) == census_total(m, p)
    assert node.n_vars + g.n == census_variables(m, p)
    assert len(node.cut_pool) == 0


@pytest.mark.parametrize("seed", range(5))
def test_objective_is_arc_length(seed):
    g = RoutingGraph.from_problem(Problem.build(tiny_instance(seed)))
    for model in (build_node_model(g), build_edge_model(g)):
        for (i, j), col in model.x.items():
            assert model.obj[col] == g.f[i, j]
        others = set(range(model.n_vars)) - set(model.x.values())
        assert all(model.obj[c] == 0 for c in others)


def test_big_m_on_corner_to_corner_instance():
    inst = line_instance(env_width=20.0, env_height=20.0, U=20.0, R=10.0,
                         targets=(Point(0, 0), Point(20, 20)),
                         road=RoadNetwork.from_lists([[(0, 0), (0, 10), (10, 10), (20, 10), (20, 20)]]))
    g = RoutingGraph.from_problem(Problem.build(inst))
    assert big_m(g) == pytest.approx(20 + math.hypot(20, 20))
    assert build_node_model(g).M == pytest.approx(48.2843, abs=1e-4)


def test_edge_model_fuel_rows():
    g = RoutingGraph.from_problem(Problem.build(tiny_instance(3)))
    model = build_edge_model(g)
    assert not model.u
    fam = model.family_counts()
    p = g.n - g.n_targets
    assert fam["fuel_leave_site"] == p * (g.n - 1)
    assert fam["fuel_flow"] == g.n_targets
    assert fam["fuel_arc_cap"] == len(model.x)
    assert "fuel_total" not in fam


def test_far_site_pairs_fixed_to_zero(line_problem):
    p = with_sites(line_problem, 0, 7)  # road distance 7 > R = 4
    g = RoutingGraph.from_problem(p)
    model = build_node_model(g)
    assert model.ub[model.x[3, 4]] == 0.0
    assert model.ub[model.x[4, 3]] == 0.0


# -- warm start and extraction -------------------------------------------------

def test_warm_start_out_and_back():
    p = one_target()
    g = RoutingGraph.from_problem(p)
    sol = make_solution(p, [site(0), target(0), site(0)], producer="hand")
    node = build_node_model(g)
    a = warm_start_from(sol, node)
    assert a[node.x[1, 0]] == 1 and a[node.x[0, 1]] == 1
    assert a[node.y[0, 1]] == 1
    assert a[node.u[0]] == pytest.approx(6 - 2)
    assert node.violated_rows(assignment_vector(node, a)) == []


def test_warm_start_last_site_follows_walk(line_problem):
    p = line_problem  # sites 0, 4, 7
    g = RoutingGraph.from_problem(p)
    walk = [site(0), target(0), target(1), site(4), site(7), target(2), site(7), site(4), site(0)]
    sol = make_solution(p, walk, producer="hand")
    assert verify_solution(p, sol) == []
    for model in (build_node_model(g), build_edge_model(g)):
        a = warm_start_from(sol, model)
        s0, s4, s7 = g.index(site(0)), g.index(site(4)), g.index(site(7))
        assert a[model.y[0, s0]] == 1 and a[model.y[1, s0]] == 1 and a[model.y[2, s7]] == 1
        assert model.violated_rows(assignment_vector(model, a)) == []
        assert model.objective_of(assignment_vector(model, a)) == pytest.approx(sol.cost)


def test_repeated_arc_is_unencodable(line_problem):
    p = with_sites(line_problem, 0, 4)
    g = RoutingGraph.from_problem(p)
    walk = [site(0), site(4), site(0), site(4), site(0), target(0), target(1), site(0)]
    with pytest.raises(UnencodableWalk):
        warm_start_from(make_solution(p, walk, producer="hand"), build_edge_model(g))


@pytest.mark.parametrize("seed", range(12))
def test_heuristic_warm_start_satisfies_every_row(seed):
    p = Problem.build(tiny_instance(seed))
    g = RoutingGraph.from_problem(p)
    sol = heuristic_solve(p)
    for model in (build_node_model(g), build_edge_model(g)):
        try:
            a = warm_start_from(sol, model)
        except UnencodableWalk:
            continue
        assert model.violated_rows(assignment_vector(model, a)) == []


def test_extract_simple_tour():
    p = Problem.build(line_instance(targets=(Point(1, 6), Point(9, 6))))
    p = with_sites(p, 0, 4)  # t1=0, t2=1, s0=2, s1=3
    g = RoutingGraph.from_problem(p)
    sol = extract_routes({(2, 0): 1, (0, 3): 1, (3, 1): 1, (1, 2): 1, (0, 1): 0}, None, g)
    assert sol.walk == (site(0), target(0), site(4), target(1), site(0))
    assert sol.rv_route == (0, 4, 0)


def test_extract_repeated_site_visit(line_problem):
    g = RoutingGraph.from_problem(line_problem)  # t 0..2, s0=3 (site 0), 4 (site 4), 5 (site 7)
    arcs = [(3, 0), (0, 1), (1, 4), (4, 5), (5, 2), (2, 5), (5, 4), (4, 3)]
    sol = extract_routes(arcs, None, g, line_problem)
    assert sol.rv_route == (0, 4, 7, 7, 4, 0)
    assert sol.walk.count(site(7)) == 2
    assert sol.cost == pytest.approx(sum(g.f[i, j] for i, j in arcs), abs=1e-9)
    assert verify_solution(line_problem, sol) == []


def test_extract_rejects_bad_support(line_problem):
    g = RoutingGraph.from_problem(line_problem)
    with pytest.raises(ExtractionError, match="unbalanced"):
        extract_routes([(3, 0), (0, 3), (3, 1)], None, g)
    with pytest.raises(ExtractionError, match="unreachable"):
        extract_routes([(3, 0), (0, 3), (1, 2), (2, 1)], None, g)


# -- solving -------------------------------------------------------------------

@pytest.mark.backend
@backends
@forms
def test_single_target_out_and_back(backend, form):
    sol = milp_solve(one_target(), form, backend=backend)
    assert sol.status == OPTIMAL
    assert sol.cost == pytest.approx(4.0, abs=1e-6)
    assert sol.cuts_added == 0


@pytest.mark.backend
@backends
@forms
def test_fixture_needs_intermediate_refuel(backend, form, line_problem):
    sol = milp_solve(line_problem, form, backend=backend, gap_target=0.0)
    assert sol.status == OPTIMAL
    assert sum(1 for v in sol.walk[1:-1] if v[0] == "s") >= 2
    assert sol.cost == pytest.approx(brute_force_opt(line_problem).cost, abs=1e-6)
    assert verify_solution(line_problem, sol) == []


@pytest.mark.backend
@backends
@forms
def test_stage_two_infeasible(backend, form, line_problem):
    # (9,6) is 8 km from the only selected site; U/2 = 3
    p = with_sites(line_problem, 0)
    sol = milp_solve(p, form, backend=backend)
    assert sol.status == INFEASIBLE
    assert sol.walk == ()


@pytest.mark.backend
@backends
@pytest.mark.parametrize("seed", range(6))
def test_callback_and_outer_loop_agree(backend, seed):
    p = Problem.build(tiny_instance(seed))
    a = milp_solve(p, "edge", backend=backend, lazy=True, gap_target=0.0)
    b = milp_solve(p, "edge", backend=backend, lazy=False, gap_target=0.0)
    assert a.status == b.status
    assert a.cost == pytest.approx(b.cost, abs=1e-6)


@pytest.mark.backend
@backends
@pytest.mark.parametrize("seed", range(10))
def test_outer_loop_bound_and_cut_pool(backend, seed):
    p = Problem.build(tiny_instance(seed))
    g = RoutingGraph.from_problem(p)
    model = build_node_model(g)
    sol = solve_with_cuts(model, make_backend(backend), p, lazy=False, gap_target=0.0)
    hist = [b for b in sol.meta["bound_history"] if math.isfinite(b)]
    assert all(b2 >= b1 - 1e-6 for b1, b2 in zip(hist, hist[1:]))
    keys = [c.vertices for c in model.cut_pool]
    assert len(keys) == len(set(keys)) == sol.cuts_added
    if sol.walk:
        idx = [g.index(v) for v in sol.walk]
        assert separate_subtours(list(zip(idx, idx[1:])), g) == []


@pytest.mark.backend
@backends
@pytest.mark.parametrize("seed", range(6))
def test_heuristic_start_accepted_as_feasible(backend, seed):
    # pin every variable to the warm assignment; the backend must find it feasible
    p = Problem.build(tiny_instance(seed))
    g = RoutingGraph.from_problem(p)
    model = build_edge_model(g)
    try:
        a = warm_start_from(heuristic_solve(p), model)
    except UnencodableWalk:
        pytest.skip("heuristic walk repeats an arc")
    be = make_backend(backend)
    from fcurp.milp.solve import _load

    _load(model, be)
    for j, v in a.items():
        be.add_linear_constraint({j: 1.0}, "==", v)
    res = be.solve()
    assert res.values is not None
    assert res.objective == pytest.approx(heuristic_solve(p).cost, abs=1e-6)


@pytest.mark.backend
@backends
def test_warm_never_worse_than_start(backend):
    inst = generate(GenConfig(grid_n=3, U=20, R=10), 0)
    p = Problem.build(inst)
    warm = heuristic_solve(p)
    sol = milp_solve(p, "edge", backend=backend, warm=warm, time_limit=60)
    assert sol.cost <= warm.cost + 1e-9
    assert verify_solution(p, sol) == []
    assert sol.bound <= sol.cost + 1e-6
    assert np.isfinite(sol.bound)
