"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Both modules expose the same functions with the same results; ``fcurp.kernels``
picks the compiled one when it is importable.
"""
import math

EPS = 1e-10
TOL = 1e-9


def local_search(tour, dist):
    """Improve a closed tour with 2-opt and Or-opt moves until neither helps.

    ``tour`` lists vertex indices once each; position 0 stays fixed.
    """
    t = [int(v) for v in tour]
    n = len(t)
    if n < 4:
        return t
    d = [list(map(float, row)) for row in dist]
    improved = True
    while improved:
        improved = False
        # 2-opt
        again = True
        while again:
            again = False
            for i in range(n - 2):
                a, b = t[i], t[i + 1]
                dab = d[a][b]
                for j in range(i + 2, n if i > 0 else n - 1):
                    c, e = t[j], t[(j + 1) % n]
                    delta = d[a][c] + d[b][e] - dab - d[c][e]
                    if delta < -EPS:
                        t[i + 1:j + 1] = t[i + 1:j + 1][::-1]
                        again = improved = True
                        a, b = t[i], t[i + 1]
                        dab = d[a][b]
        # Or-opt: relocate a chain of 1..3 vertices, optionally reversed
        moved = True
        while moved:
            moved = False
            for length in (1, 2, 3):
                if length > n - 2:
                    break
                i = 1
                while i + length <= n:
                    first, last = t[i], t[i + length - 1]
                    prev, nxt = t[i - 1], t[(i + length) % n]
                    gain = d[prev][first] + d[last][nxt] - d[prev][nxt]
                    best = -EPS
                    best_j = -1
                    best_rev = False
                    for j in range(n):
                        if i - 1 <= j <= i + length - 1:
                            continue
                        p, q = t[j], t[(j + 1) % n]
                        base = d[p][q]
                        fwd = d[p][first] + d[last][q] - base - gain
                        rev = d[p][last] + d[first][q] - base - gain
                        if fwd < best:
                            best, best_j, best_rev = fwd, j, False
                        if rev < best:
                            best, best_j, best_rev = rev, j, True
                    if best_j >= 0:
                        seg = t[i:i + length]
                        if best_rev:
                            seg.reverse()
                        rest = t[:i] + t[i + length:]
                        # position of t[best_j] in rest
                        k = best_j if best_j < i else best_j - length
                        t = rest[:k + 1] + seg + rest[k + 1:]
                        moved = improved = True
                    else:
                        i += 1
    return t


def tour_length(tour, dist):
    n = len(tour)
    return sum(float(dist[tour[k]][tour[(k + 1) % n]]) for k in range(n))


def oracle_search(f, r, n_targets, s0, U, R, max_site_visits, best_cost=math.inf):
    """Exhaustive minimum-cost walk search with branch-and-bound pruning.

    Vertices ``0..n_targets-1`` are targets and the rest are sites; the walk
    starts and ends at site ``s0``. Returns ``(cost, walk)``; ``walk`` is
    empty when no feasible walk beats ``best_cost``.
    """
    n = len(f)
    m = n_targets
    F = [list(map(float, row)) for row in f]
    Rd = [list(map(float, row)) for row in r]
    sites = list(range(m, n))
    full = (1 << m) - 1
    best = [best_cost, []]
    path = [s0]

    def lower(cur, mask):
        lb = F[cur][s0]
        for t in range(m):
            if not mask >> t & 1:
                v = F[cur][t] + F[t][s0]
                if v > lb:
                    lb = v
        return lb

    def dfs(cur, fuel, mask, last_site, cost, visits):
        if cost + lower(cur, mask) >= best[0] - EPS:
            return
        for t in range(m):
            if mask >> t & 1:
                continue
            left = fuel - F[cur][t]
            if left < -TOL:
                continue
            path.append(t)
            dfs(t, left, mask | (1 << t), last_site, cost + F[cur][t], visits)
            path.pop()
        if visits >= max_site_visits:
            return
        for s in sites:
            if s == cur:
                continue
            if fuel - F[cur][s] < -TOL or Rd[last_site][s] > R + TOL:
                continue
            c = cost + F[cur][s]
            if s == s0 and mask == full:
                if c < best[0] - EPS:
                    best[0] = c
                    best[1] = path + [s0]
                continue
            path.append(s)
            dfs(s, U, mask, s, c, visits + 1)
            path.pop()

    dfs(s0, U, 0, s0, 0.0, 0)
    return best[0], best[1]
