"""Joint routing of a fuel-limited UAV and a road-bound refueling vehicle."""
from .errors import (
    BackendFailure,
    DisconnectedRoad,
    ExtractionError,
    Infeasible,
    InvalidInstance,
    InvalidWarmStart,
    NoPath,
    PlanningError,
    RepairFailure,
    TooLarge,
    UncoverableTarget,
    UnencodableWalk,
)
from .heuristic import fuel_check, heuristic_solve, indirect_path, repair, tsp_tour
from .model import DiscretizedRoad, Instance, Point, RoadNetwork, discretize_road, validate_instance
from .oracle import OracleConfig, brute_force_opt
from .sites import SiteSelection, check_selection, select_sites
from .solution import Problem, RouteSolution, verify_solution

__version__ = "0.1.0"

__all__ = [
    "BackendFailure",
    "DiscretizedRoad",
    "DisconnectedRoad",
    "ExtractionError",
    "Infeasible",
    "Instance",
    "InvalidInstance",
    "InvalidWarmStart",
    "NoPath",
    "OracleConfig",
    "PlanningError",
    "Point",
    "Problem",
    "RepairFailure",
    "RoadNetwork",
    "RouteSolution",
    "SiteSelection",
    "TooLarge",
    "UncoverableTarget",
    "UnencodableWalk",
    "brute_force_opt",
    "check_selection",
    "discretize_road",
    "fuel_check",
    "heuristic_solve",
    "indirect_path",
    "repair",
    "select_sites",
    "tsp_tour",
    "validate_instance",
    "verify_solution",
]
