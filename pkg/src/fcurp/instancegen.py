"""Seeded instance families: gridded targets over a dense or a sparse road network."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Instance, Point, RoadNetwork

U_MENU = (15.0, 20.0, 25.0)
R_MENU = (10.0, 15.0)


@dataclass(frozen=True)
class GenConfig:
    env_side: float = 20.0
    grid_n: int = 3
    U: float = 20.0
    R: float = 10.0
    delta: float = 1.0
    network_kind: str = "dense"
    instances_per_config: int = 20
    seed: int = 0
    targets: str = "uniform"  # or "centers"
    strict: bool = True

    def __post_init__(self):
        if self.network_kind not in ("dense", "sparse"):
            raise ValueError(f"network_kind must be dense or sparse, not {self.network_kind!r}")
        if self.targets not in ("uniform", "centers"):
            raise ValueError(f"targets must be uniform or centers, not {self.targets!r}")
        if self.env_side <= 0 or self.delta <= 0:
            raise ValueError("env_side and delta must be positive")
        if self.strict:
            if not 3 <= self.grid_n <= 10:
                raise ValueError("grid_n must be in 3..10 (pass strict=False to override)")
            if self.U not in U_MENU or self.R not in R_MENU:
                raise ValueError("U must be in {15,20,25} and R in {10,15} (pass strict=False)")
        elif self.grid_n < 1:
            raise ValueError("grid_n must be positive")


def road_network(kind: str, env_side: float = 20.0) -> RoadNetwork:
    """``dense``: three horizontal roads joined by three vertical ones (a ladder mesh).
    ``sparse``: one central cross, leaving the corners far from any road."""
    k = env_side / 20.0
    a, b, c = 4 * k, 10 * k, 16 * k
    if kind == "dense":
        rows = [[(0.0, y), (a, y), (b, y), (c, y), (env_side, y)] for y in (a, b, c)]
        cols = [[(x, a), (x, b), (x, c)] for x in (a, b, c)]
        return RoadNetwork.from_lists(rows + cols)
    if kind == "sparse":
        return RoadNetwork.from_lists([
            [(b, 0.0), (b, b), (b, env_side)],
            [(0.0, b), (b, b), (env_side, b)],
        ])
    raise ValueError(f"unknown road network kind {kind!r}")


def generate(cfg: GenConfig, index: int) -> Instance:
    """Instance number ``index`` of a configuration: one target per grid cell."""
    n = cfg.grid_n
    cell = cfg.env_side / n
    rng = np.random.default_rng([cfg.seed, index, n, int(cfg.U * 1000), int(cfg.R * 1000),
                                 0 if cfg.network_kind == "dense" else 1])
    targets = []
    for row in range(n):
        for col in range(n):
            if cfg.targets == "centers":
                x, y = (col + 0.5) * cell, (row + 0.5) * cell
            else:
                x, y = (col + rng.random()) * cell, (row + rng.random()) * cell
            targets.append(Point(round(float(x), 9), round(float(y), 9)))
    return Instance(
        env_width=cfg.env_side,
        env_height=cfg.env_side,
        targets=tuple(targets),
        road=road_network(cfg.network_kind, cfg.env_side),
        U=cfg.U,
        R=cfg.R,
        delta=cfg.delta,
        seed=cfg.seed,
    )


def _fmt(v: float) -> str:
    return f"{v:g}"


def instance_name(cfg: GenConfig, index: int) -> str:
    return f"{cfg.network_kind}-n{cfg.grid_n}-U{_fmt(cfg.U)}-R{_fmt(cfg.R)}-i{index}"


def write_suite(cfg: GenConfig, out_dir, count: int | None = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(cfg.instances_per_config if count is None else count):
        p = out / f"{instance_name(cfg, i)}.json"
        generate(cfg, i).save(p)
        paths.append(p)
    return paths


def tiny_instance(seed: int, max_targets: int = 5, max_sites: int = 4) -> Instance:
    """A small random instance for oracle cross-checks.

    The road is a bent polyline through ``max_sites`` vertices with the
    sampling step set to its longest segment, so only the vertices become
    candidate sites. Targets sit within U/2 of a random vertex and U is short
    enough that most plans need several refuels.
    """
    rng = np.random.default_rng([seed, 7919])
    side = 10.0
    k = max(2, max_sites)
    xs = np.linspace(1.0, 9.0, k) + rng.uniform(-0.4, 0.4, k)
    ys = rng.uniform(4.0, 6.0, k)
    verts = [(round(float(x), 6), round(float(y), 6)) for x, y in zip(xs, ys)]
    seg = max(float(np.hypot(b[0] - a[0], b[1] - a[1])) for a, b in zip(verts, verts[1:]))
    delta = round(seg, 6) + 1e-6
    U = round(float(rng.uniform(4.0, 7.0)), 6)
    R = round(max(delta, float(rng.uniform(1.0, 1.6)) * seg), 6)
    m = int(rng.integers(1, max_targets + 1))
    targets = []
    while len(targets) < m:
        ax, ay = verts[int(rng.integers(k))]
        rad = float(rng.uniform(0.2, 0.95)) * U / 2
        ang = float(rng.uniform(0, 2 * np.pi))
        x, y = ax + rad * np.cos(ang), ay + rad * np.sin(ang)
        if 0 <= x <= side and 0 <= y <= side:
            targets.append(Point(round(float(x), 6), round(float(y), 6)))
    return Instance(
        env_width=side,
        env_height=side,
        targets=tuple(targets),
        road=RoadNetwork.from_lists([verts]),
        U=U,
        R=R,
        delta=delta,
        seed=seed,
    )
