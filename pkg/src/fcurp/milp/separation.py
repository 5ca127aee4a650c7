"""Subtour separation on integer arc assignments via strongly connected components."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .graph import RoutingGraph


@dataclass(frozen=True)
class SubtourCut:
    """At least one selected arc must leave ``vertices`` (which holds a target, not s0)."""

    vertices: frozenset

    def __repr__(self):
        return f"SubtourCut({sorted(self.vertices)})"


def strongly_connected_components(n: int, adj: list[list[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative, over vertices ``0..n-1``.

    Components are returned in reverse topological order of the condensation.
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            succ = adj[v]
            if pos < len(succ):
                work[-1] = (v, pos + 1)
                w = succ[pos]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
    return out


def support_arcs(x_values: Mapping[tuple[int, int], float] | Iterable[tuple[int, int]]):
    if isinstance(x_values, Mapping):
        return [arc for arc, v in x_values.items() if v > 0.5]
    return list(x_values)


def separate_subtours(x_values, g: RoutingGraph) -> list[SubtourCut]:
    """One cut per strongly connected component of the selected arcs that has
    more than one vertex, excludes s0 and contains a target."""
    adj: list[list[int]] = [[] for _ in range(g.n)]
    for i, j in sorted(support_arcs(x_values)):
        adj[i].append(j)
    cuts = []
    for comp in strongly_connected_components(g.n, adj):
        if len(comp) > 1 and g.s0 not in comp and any(g.is_target(v) for v in comp):
            cuts.append(SubtourCut(frozenset(comp)))
    cuts.sort(key=lambda c: min(c.vertices))
    return cuts
