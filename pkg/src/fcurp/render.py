"""Static SVG drawings of instances, site selections and plans."""
from __future__ import annotations

import re
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .model import DiscretizedRoad, Instance, discretize_road
from .sites import SiteSelection
from .solution import RouteSolution

_COLOR = re.compile(r"^(#[0-9a-fA-F]{3}|#[0-9a-fA-F]{6}|[a-zA-Z]+)$")


@dataclass(frozen=True)
class RenderStyle:
    scale: float = 30.0  # px per km
    margin: float = 20.0
    road_color: str = "#1f5fbf"
    road_width: float = 2.0
    uav_color: str = "#d62728"
    uav_width: float = 1.5
    rv_color: str = "#555555"
    rv_width: float = 2.5
    target_color: str = "#d62728"
    target_size: float = 7.0
    site_color: str = "#2ca02c"
    site_size: float = 9.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        for name in ("road_color", "uav_color", "rv_color", "target_color", "site_color"):
            if not _COLOR.match(getattr(self, name)):
                raise ValueError(f"{name} is not a valid SVG color: {getattr(self, name)!r}")


def _n(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


class _Canvas:
    def __init__(self, instance: Instance, style: RenderStyle):
        self.h = instance.env_height
        self.s = style

    def pt(self, x, y) -> tuple[str, str]:
        s = self.s
        return _n(s.margin + float(x) * s.scale), _n(s.margin + (self.h - float(y)) * s.scale)

    def pts(self, coords) -> str:
        return " ".join(",".join(self.pt(x, y)) for x, y in coords)

    def square(self, x, y, size, color, cls, title) -> str:
        px, py = self.pt(x, y)
        half = size / 2
        return (f'<rect class="{cls}" x="{_n(float(px) - half)}" y="{_n(float(py) - half)}" '
                f'width="{_n(size)}" height="{_n(size)}" fill="{color}"><title>{escape(title)}</title></rect>')


def render(instance: Instance, selection: SiteSelection | None = None,
           solution: RouteSolution | None = None, style: RenderStyle | None = None,
           road: DiscretizedRoad | None = None) -> str:
    """SVG document with frame, roads, targets, optional sites and optional plan.

    The UAV plan is drawn as one ``<path>`` per leg; the vehicle's route is a
    dashed polyline following road shortest paths between its stops.
    """
    style = style or RenderStyle()
    cv = _Canvas(instance, style)
    W = 2 * style.margin + instance.env_width * style.scale
    H = 2 * style.margin + instance.env_height * style.scale
    need_road = selection is not None or (solution is not None and solution.walk)
    if need_road and road is None:
        road = discretize_road(instance)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(W)}" height="{_n(H)}" '
        f'viewBox="0 0 {_n(W)} {_n(H)}">',
        f'<rect class="frame" x="{_n(style.margin)}" y="{_n(style.margin)}" '
        f'width="{_n(instance.env_width * style.scale)}" height="{_n(instance.env_height * style.scale)}" '
        'fill="white" stroke="black" stroke-width="1"/>',
        '<g id="roads">',
    ]
    for line in instance.road.polylines:
        out.append(f'<polyline class="road" points="{cv.pts(line)}" fill="none" '
                   f'stroke="{style.road_color}" stroke-width="{_n(style.road_width)}"/>')
    out.append("</g>")

    if solution is not None and solution.rv_route and road is not None:
        coords = []
        stops = list(solution.rv_route)
        for a, b in zip(stops, stops[1:]):
            path = road.road_path(a, b)
            seg = [tuple(road.sites[k]) for k in path]
            coords.extend(seg if not coords else seg[1:])
        if not coords:
            coords = [tuple(road.sites[stops[0]])]
        out.append('<g id="rv-route">')
        out.append(f'<polyline class="rv" points="{cv.pts(coords)}" fill="none" '
                   f'stroke="{style.rv_color}" stroke-width="{_n(style.rv_width)}" '
                   'stroke-dasharray="6,4"/>')
        out.append("</g>")

    if solution is not None and solution.walk:
        out.append('<g id="uav-route">')

        def xy(v):
            return instance.targets[v[1]] if v[0] == "t" else road.sites[v[1]]

        for k, (a, b) in enumerate(zip(solution.walk, solution.walk[1:])):
            (x1, y1), (x2, y2) = cv.pt(*xy(a)), cv.pt(*xy(b))
            out.append(f'<path class="leg" d="M {x1} {y1} L {x2} {y2}" fill="none" '
                       f'stroke="{style.uav_color}" stroke-width="{_n(style.uav_width)}">'
                       f'<title>leg {k}</title></path>')
        out.append("</g>")

    out.append('<g id="targets">')
    for i, (x, y) in enumerate(instance.targets):
        out.append(cv.square(x, y, style.target_size, style.target_color, "target", f"t{i}"))
    out.append("</g>")

    if selection is not None:
        out.append('<g id="sites">')
        for sid in selection.selected:
            x, y = road.sites[sid]
            out.append(cv.square(x, y, style.site_size, style.site_color, "site", f"s{sid}"))
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, *args, **kw) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render(*args, **kw))


__all__ = ["RenderStyle", "render", "write_svg"]
