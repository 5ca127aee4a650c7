"""Exception hierarchy shared across the planner."""


class PlanningError(Exception):
    """Base class for all planner errors."""


class InvalidInstance(PlanningError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DisconnectedRoad(InvalidInstance):
    def __init__(self, n_components):
        self.n_components = n_components
        super().__init__([f"road network has {n_components} connected components"])


class Infeasible(PlanningError):
    """The instance admits no feasible plan (maps to CLI exit code 1)."""


class UncoverableTarget(Infeasible):
    def __init__(self, target, point, nearest):
        self.target = target
        self.point = point
        self.nearest = nearest
        super().__init__(
            f"target {target} at ({point[0]:g}, {point[1]:g}) is {nearest:.3f} km "
            "from the nearest candidate site, beyond half the UAV range"
        )


class FrontierExhausted(Infeasible):
    def __init__(self, uncovered):
        self.uncovered = sorted(uncovered)
        super().__init__(
            f"targets {self.uncovered} cannot be covered by a road-connected site set"
        )


class TooLarge(PlanningError):
    pass


class ExtractionError(PlanningError):
    pass


class BackendFailure(PlanningError):
    pass


class InvalidWarmStart(PlanningError):
    pass


class UnencodableWalk(PlanningError):
    pass


class NoPath(PlanningError):
    pass


class RepairFailure(PlanningError):
    pass
