"""Stage one: pick a small, road-connected set of refueling sites covering every target."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FrontierExhausted, UncoverableTarget
from .model import DIST_TOL, DiscretizedRoad, pairwise_euclid


@dataclass(frozen=True)
class SiteSelection:
    """Selected candidate-site ids in selection order; ``selected[0]`` is the mission start s0.

    ``covered`` maps each target to the site that first covered it.
    """

    selected: tuple[int, ...]
    covered: dict[int, int]

    @property
    def s0(self) -> int:
        return self.selected[0]

    def to_dict(self, road: DiscretizedRoad) -> dict:
        return {
            "sites": [[float(road.sites[s, 0]), float(road.sites[s, 1])] for s in self.selected],
            "s0_index": 0,
            "order": list(self.selected),
        }

    def save(self, path, road: DiscretizedRoad) -> None:
        Path(path).write_text(json.dumps(self.to_dict(road), indent=2) + "\n")

    @classmethod
    def from_dict(cls, doc: dict, road: DiscretizedRoad) -> "SiteSelection":
        order = [int(i) for i in doc["order"]]
        if doc.get("s0_index", 0) != 0:
            k = int(doc["s0_index"])
            order = [order[k]] + order[:k] + order[k + 1:]
        for sid, xy in zip(order, doc.get("sites", [])):
            if np.hypot(*(road.sites[sid] - np.asarray(xy, dtype=float))) > 1e-6:
                raise ValueError(f"site {sid} coordinates do not match the discretized road")
        covered = {}
        for s in order:
            for t in road.H[s]:
                covered.setdefault(t, s)
        return cls(tuple(order), covered)

    @classmethod
    def load(cls, path, road: DiscretizedRoad) -> "SiteSelection":
        return cls.from_dict(json.loads(Path(path).read_text()), road)


def select_sites(road: DiscretizedRoad, n_targets: int | None = None) -> SiteSelection:
    """Greedy maximum-coverage selection restricted to the road-distance frontier.

    The first site is the one reaching the most targets overall. Later sites
    come from the neighbors of the sites chosen so far, taking the largest
    number of newly covered targets (lowest id on ties). When no frontier site
    covers anything new, the site that enlarges the frontier the most is taken
    instead, so distant targets can still be bridged to.
    """
    if n_targets is None:
        n_targets = len(road.targets)
    reachable = np.zeros(n_targets, dtype=bool)
    for h in road.H:
        reachable[list(h)] = True
    if not reachable.all():
        t = int(np.flatnonzero(~reachable)[0])
        d = float(pairwise_euclid(road.sites, road.targets[t:t + 1]).min())
        raise UncoverableTarget(t, tuple(road.targets[t]), d)

    n_sites = road.n_sites
    H = [set(h) for h in road.H]
    N = [set(nb) for nb in road.N]

    first = max(range(n_sites), key=lambda s: (len(H[s]), -s))
    selected = [first]
    in_s = {first}
    covered = {t: first for t in sorted(H[first])}
    frontier = set(N[first])

    while len(covered) < n_targets:
        candidates = sorted(frontier - in_s)
        if not candidates:
            raise FrontierExhausted(set(range(n_targets)) - set(covered))
        gains = [len(H[s] - covered.keys()) for s in candidates]
        best_gain = max(gains)
        if best_gain > 0:
            pick = candidates[gains.index(best_gain)]
        else:
            closed = in_s | frontier
            growth = [len(N[s] - closed) for s in candidates]
            if max(growth) == 0:
                raise FrontierExhausted(set(range(n_targets)) - set(covered))
            pick = candidates[growth.index(max(growth))]
        selected.append(pick)
        in_s.add(pick)
        frontier |= N[pick]
        for t in sorted(H[pick]):
            covered.setdefault(t, pick)

    return SiteSelection(tuple(selected), covered)


def check_selection(road: DiscretizedRoad, selection: SiteSelection) -> list[str]:
    """Recheck the coverage and connectedness conditions from raw geometry."""
    problems = []
    S = list(selection.selected)
    if not S:
        return ["no sites selected"]
    if len(set(S)) != len(S):
        problems.append("duplicate site in selection")
    d = pairwise_euclid(road.sites[S], road.targets)
    for t in range(len(road.targets)):
        if d[:, t].min() > road.U / 2 + DIST_TOL:
            problems.append(f"coverage: target {t} not within U/2 of any selected site")
    seen = {S[0]}
    stack = [S[0]]
    while stack:
        a = stack.pop()
        for b in S:
            if b not in seen and road.road_dist[a, b] <= road.R + DIST_TOL:
                seen.add(b)
                stack.append(b)
    if len(seen) != len(set(S)):
        problems.append("connectedness: selected sites are not road-connected within R")
    return problems
