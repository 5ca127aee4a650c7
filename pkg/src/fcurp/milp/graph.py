from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import DIST_TOL, pairwise_euclid
from ..solution import Problem, Vertex, site, target


@dataclass(frozen=True, eq=False)
class RoutingGraph:
    """Complete directed graph over targets (indices ``0..m-1``) and selected
    sites (indices ``m..n-1``, in selection order, so ``s0 == m``)."""

    vertices: tuple[Vertex, ...]
    n_targets: int
    f: np.ndarray
    r: np.ndarray
    neighbors: tuple[frozenset, ...]
    U: float
    R: float

    @classmethod
    def from_problem(cls, problem: Problem) -> "RoutingGraph":
        m = problem.n_targets
        sel = list(problem.site_ids)
        vertices = tuple(target(t) for t in range(m)) + tuple(site(s) for s in sel)
        xy = np.vstack([problem.road.targets, problem.road.sites[sel]])
        f = pairwise_euclid(xy)
        r = problem.road.road_dist[np.ix_(sel, sel)].copy()
        # N(s) contains s itself: a sortie may return to the site it left from
        neighbors = tuple(
            frozenset(m + int(b) for b in np.flatnonzero(r[a] <= problem.R + DIST_TOL))
            for a in range(len(sel))
        )
        return cls(vertices, m, f, r, neighbors, problem.U, problem.R)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def s0(self) -> int:
        return self.n_targets

    @property
    def targets(self) -> range:
        return range(self.n_targets)

    @property
    def sites(self) -> range:
        return range(self.n_targets, self.n)

    def is_target(self, i: int) -> bool:
        return i < self.n_targets

    def road(self, a: int, b: int) -> float:
        return float(self.r[a - self.n_targets, b - self.n_targets])

    def N(self, s: int) -> frozenset:
        return self.neighbors[s - self.n_targets]

    def index(self, v: Vertex) -> int:
        return self._index[v]

    @property
    def _index(self) -> dict:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {v: i for i, v in enumerate(self.vertices)}
            object.__setattr__(self, "_idx", idx)
        return idx
