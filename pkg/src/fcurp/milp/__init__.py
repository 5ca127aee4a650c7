"""Exact stage-two methods: MILP formulations solved by branch-and-cut."""
from .backends import BackendResult, HighsBackend, MipBackend, ScipBackend, available_backends, make_backend
from .formulation import MilpModel, build_edge_model, build_model, build_node_model, census_total
from .graph import RoutingGraph
from .separation import SubtourCut, separate_subtours, strongly_connected_components
from .solve import extract_routes, milp_solve, solve_with_cuts, warm_start_from

__all__ = [
    "BackendResult",
    "HighsBackend",
    "MilpModel",
    "MipBackend",
    "RoutingGraph",
    "ScipBackend",
    "SubtourCut",
    "available_backends",
    "build_edge_model",
    "build_model",
    "build_node_model",
    "census_total",
    "extract_routes",
    "make_backend",
    "milp_solve",
    "separate_subtours",
    "solve_with_cuts",
    "strongly_connected_components",
    "warm_start_from",
]
