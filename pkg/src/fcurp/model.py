"""Geometry, road network and problem instance.

Distances are in kilometers throughout. The UAV burns one unit of fuel per
kilometer flown, so flight distance, flight time and fuel are the same number.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import cKDTree

from .errors import DisconnectedRoad, InvalidInstance

# inclusive slack on every "at most U", "at most U/2", "at most R" comparison
DIST_TOL = 1e-9
# points closer than this are the same road location
MERGE_TOL = 1e-9


class Point(NamedTuple):
    x: float
    y: float


def euclid(p, q) -> float:
    """Straight-line distance between two points, equal to the fuel burned flying p -> q."""
    return math.hypot(p[0] - q[0], p[1] - q[1])


def pairwise_euclid(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = a if b is None else np.asarray(b, dtype=float).reshape(-1, 2)
    diff = a[:, None, :] - b[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


@dataclass(frozen=True)
class RoadNetwork:
    polylines: tuple[tuple[Point, ...], ...]

    @classmethod
    def from_lists(cls, polylines: Sequence[Sequence[Sequence[float]]]) -> "RoadNetwork":
        return cls(tuple(tuple(Point(float(x), float(y)) for x, y in line) for line in polylines))

    def segments(self):
        for line in self.polylines:
            for a, b in zip(line, line[1:]):
                yield a, b

    def to_lists(self) -> list:
        return [[[p.x, p.y] for p in line] for line in self.polylines]


@dataclass(frozen=True)
class Instance:
    env_width: float
    env_height: float
    targets: tuple[Point, ...]
    road: RoadNetwork
    U: float
    R: float
    delta: float = 1.0
    V_u: float | None = None
    V_r: float | None = None
    s0_hint: Point | None = None
    seed: int = 0

    @property
    def t_u(self) -> float | None:
        """Maximum sortie duration in hours, when the UAV speed is known."""
        if self.V_u:
            return self.U / self.V_u
        return None

    def to_dict(self) -> dict:
        return {
            "env": {"width": self.env_width, "height": self.env_height},
            "targets": [[t.x, t.y] for t in self.targets],
            "road": self.road.to_lists(),
            "U": self.U,
            "R": self.R,
            "Vu": self.V_u,
            "Vr": self.V_r,
            "delta": self.delta,
            "s0_hint": None if self.s0_hint is None else [self.s0_hint.x, self.s0_hint.y],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Instance":
        allowed = {"env", "targets", "road", "U", "R", "Vu", "Vr", "delta", "s0_hint", "seed"}
        unknown = set(doc) - allowed
        if unknown:
            raise InvalidInstance([f"unknown field {k!r}" for k in sorted(unknown)])
        missing = {"env", "targets", "road", "U", "R"} - set(doc)
        if missing:
            raise InvalidInstance([f"missing field {k!r}" for k in sorted(missing)])
        env = doc["env"]
        if set(env) - {"width", "height"}:
            raise InvalidInstance([f"unknown env field {k!r}" for k in sorted(set(env) - {"width", "height"})])
        hint = doc.get("s0_hint")
        return cls(
            env_width=float(env["width"]),
            env_height=float(env["height"]),
            targets=tuple(Point(float(x), float(y)) for x, y in doc["targets"]),
            road=RoadNetwork.from_lists(doc["road"]),
            U=float(doc["U"]),
            R=float(doc["R"]),
            delta=float(doc.get("delta", 1.0)),
            V_u=None if doc.get("Vu") is None else float(doc["Vu"]),
            V_r=None if doc.get("Vr") is None else float(doc["Vr"]),
            s0_hint=None if hint is None else Point(float(hint[0]), float(hint[1])),
            seed=int(doc.get("seed", 0)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "Instance":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _finite(*values) -> bool:
    return all(v is not None and math.isfinite(v) for v in values)


def _road_components(road: RoadNetwork) -> int:
    """Number of connected components of the segment graph (junctions = shared vertices)."""
    pts = [p for line in road.polylines for p in line]
    if not pts:
        return 0
    ids = _merge_ids(np.asarray(pts, dtype=float))
    rows, cols = [], []
    k = 0
    for line in road.polylines:
        for i in range(len(line) - 1):
            rows.append(ids[k + i])
            cols.append(ids[k + i + 1])
        k += len(line)
    n = int(ids.max()) + 1
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, _ = connected_components(graph, directed=False)
    return int(ncomp)


def validate_instance(instance: Instance) -> list[str]:
    """Return every violated instance invariant; an empty list means the instance is valid."""
    out = []
    if not _finite(instance.env_width, instance.env_height) or instance.env_width <= 0 or instance.env_height <= 0:
        out.append("environment dimensions must be positive")
    if not _finite(instance.U) or instance.U <= 0:
        out.append("U must be positive")
    if not _finite(instance.R) or instance.R <= 0:
        out.append("R must be positive")
    if not _finite(instance.delta) or instance.delta <= 0:
        out.append("delta must be positive")
    elif _finite(instance.R) and instance.delta > instance.R:
        out.append("delta must not exceed R")
    if instance.V_u is not None and instance.V_u <= 0:
        out.append("Vu must be positive")
    if instance.V_r is not None and instance.V_r <= 0:
        out.append("Vr must be positive")
    if instance.V_u and instance.V_r and _finite(instance.U, instance.R) and instance.V_u > 0:
        implied = instance.U / instance.V_u * instance.V_r
        if abs(implied - instance.R) > 1e-9 * max(1.0, abs(instance.R)):
            out.append(f"R={instance.R:g} inconsistent with U/Vu*Vr={implied:g}")
    if not instance.targets:
        out.append("at least one target required")
    for i, t in enumerate(instance.targets):
        if not _finite(t.x, t.y):
            out.append(f"target {i} has non-finite coordinates")
        elif not (0 <= t.x <= instance.env_width and 0 <= t.y <= instance.env_height):
            out.append(f"target outside environment: target {i} at ({t.x:g}, {t.y:g})")
    polylines = instance.road.polylines
    if not polylines:
        out.append("road network is empty")
    geometry_ok = True
    for li, line in enumerate(polylines):
        if len(line) < 2:
            out.append(f"road polyline {li} has fewer than 2 points")
            geometry_ok = False
            continue
        for p in line:
            if not _finite(p.x, p.y):
                out.append(f"road polyline {li} has non-finite coordinates")
                geometry_ok = False
                break
        for si, (a, b) in enumerate(zip(line, line[1:])):
            if euclid(a, b) <= MERGE_TOL:
                out.append(f"road polyline {li} segment {si} has zero length")
                geometry_ok = False
    if polylines and geometry_ok:
        ncomp = _road_components(instance.road)
        if ncomp > 1:
            out.append(f"road network is disconnected ({ncomp} components)")
    return out


def _merge_ids(pts: np.ndarray) -> np.ndarray:
    """Map each point to the index of the first point coinciding with it (within MERGE_TOL),
    renumbered densely in order of first appearance."""
    n = len(pts)
    parent = np.arange(n)
    if n > 1:
        for i, j in sorted(cKDTree(pts).query_pairs(MERGE_TOL)):
            ri, rj = parent[i], parent[j]
            while parent[ri] != ri:
                ri = parent[ri]
            while parent[rj] != rj:
                rj = parent[rj]
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    roots = np.empty(n, dtype=int)
    for i in range(n):
        r = i
        while parent[r] != r:
            r = parent[r]
        roots[i] = r
    dense = {}
    out = np.empty(n, dtype=int)
    for i, r in enumerate(roots):
        out[i] = dense.setdefault(r, len(dense))
    return out


@dataclass(frozen=True, eq=False)
class DiscretizedRoad:
    """Candidate refueling sites sampled along the road.

    ``road_dist[i, j]`` is the along-road distance between sites ``i`` and
    ``j``; ``H[s]`` lists the targets within U/2 of site ``s`` and ``N[s]``
    the other sites within road distance R.
    """

    sites: np.ndarray
    road_dist: np.ndarray
    H: tuple[tuple[int, ...], ...]
    N: tuple[tuple[int, ...], ...]
    U: float
    R: float
    targets: np.ndarray
    predecessors: np.ndarray = field(repr=False)
    edges: tuple[tuple[int, int], ...] = field(repr=False, default=())

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def site(self, i: int) -> Point:
        return Point(float(self.sites[i, 0]), float(self.sites[i, 1]))

    def road_path(self, i: int, j: int) -> list[int]:
        """Site ids along the shortest road path from i to j (inclusive)."""
        path = [j]
        while path[-1] != i:
            prev = int(self.predecessors[i, path[-1]])
            if prev < 0:
                raise ValueError(f"no road path between sites {i} and {j}")
            path.append(prev)
        return path[::-1]


def _sample_road(road: RoadNetwork, delta: float):
    """Emit points at most ``delta`` apart along every segment, with the graph edges
    joining consecutive samples."""
    points = []
    links = []
    for a, b in road.segments():
        length = euclid(a, b)
        k = max(1, math.ceil(length / delta - 1e-9))
        base = len(points)
        for i in range(k + 1):
            s = i / k
            points.append((a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s))
        links.extend((base + i, base + i + 1) for i in range(k))
    return np.asarray(points, dtype=float), links


def discretize_road(instance: Instance) -> DiscretizedRoad:
    """Sample candidate sites along the road and precompute road distances, H and N."""
    problems = validate_instance(instance)
    if problems:
        disconnected = [p for p in problems if p.startswith("road network is disconnected")]
        if disconnected and len(problems) == 1:
            raise DisconnectedRoad(_road_components(instance.road))
        raise InvalidInstance(problems)

    raw, links = _sample_road(instance.road, instance.delta)
    ids = _merge_ids(raw)
    n = int(ids.max()) + 1
    sites = np.zeros((n, 2))
    seen = np.zeros(n, dtype=bool)
    for k, i in enumerate(ids):
        if not seen[i]:
            sites[i] = raw[k]
            seen[i] = True

    if instance.s0_hint is not None:
        start = int(np.argmin(pairwise_euclid(sites, [instance.s0_hint])[:, 0]))
        order = [start] + [i for i in range(n) if i != start]
        remap = np.empty(n, dtype=int)
        remap[order] = np.arange(n)
        sites = sites[order]
        ids = remap[ids]

    weights: dict[tuple[int, int], float] = {}
    for u, v in links:
        a, b = int(ids[u]), int(ids[v])
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        w = euclid(sites[a], sites[b])
        if key not in weights or w < weights[key]:
            weights[key] = w
    rows = [k[0] for k in weights]
    cols = [k[1] for k in weights]
    graph = csr_matrix((list(weights.values()), (rows, cols)), shape=(n, n))
    ncomp, _ = connected_components(graph, directed=False)
    if ncomp > 1:
        raise DisconnectedRoad(ncomp)
    dist, pred = dijkstra(graph, directed=False, return_predecessors=True)
    dist = 0.5 * (dist + dist.T)
    np.fill_diagonal(dist, 0.0)

    targets = np.asarray(instance.targets, dtype=float).reshape(-1, 2)
    reach = pairwise_euclid(sites, targets) <= instance.U / 2 + DIST_TOL
    H = tuple(tuple(int(t) for t in np.flatnonzero(row)) for row in reach)
    near = dist <= instance.R + DIST_TOL
    np.fill_diagonal(near, False)
    N = tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in near)

    for arr in (sites, dist, pred, targets):
        arr.setflags(write=False)
    return DiscretizedRoad(
        sites=sites,
        road_dist=dist,
        H=H,
        N=N,
        U=instance.U,
        R=instance.R,
        targets=targets,
        predecessors=pred,
        edges=tuple(sorted(weights)),
    )
