"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--sizes 20 50 100] [--repeat 3]
"""
import argparse
import time

import numpy as np

from fcurp import _kernels_py

try:
    from fcurp import _kernels
except ImportError:  # extension not built
    _kernels = None


def _best(fn, repeat):
    out = None
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def tour_case(n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 20, size=(n, 2))
    D = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    tour = [0] + list(rng.permutation(np.arange(1, n)))
    return tour, D


def oracle_cases(count, seed):
    """Generated tiny instances with five targets, searched at the always-sufficient cap."""
    from fcurp.instancegen import tiny_instance
    from fcurp.milp.graph import RoutingGraph
    from fcurp.oracle import sufficient_cap
    from fcurp.solution import Problem

    k = seed
    while count:
        k += 1
        p = Problem.build(tiny_instance(k))
        if p.n_targets < 5:
            continue
        g = RoutingGraph.from_problem(p)
        r = np.zeros((g.n, g.n))
        for a in g.sites:
            for b in g.sites:
                r[a, b] = g.road(a, b)
        count -= 1
        yield f"seed{k}/p{len(g.sites)}", (g.f, r, g.n_targets, g.s0, g.U, g.R,
                                           sufficient_cap(g.n_targets, len(g.sites)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; only the fallback can run")
    impls = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])

    print(f"{'kernel':<14}{'case':>10}" + "".join(f"{name:>12}" for name, _ in impls) + f"{'speedup':>10}")
    for n in args.sizes:
        tour, D = tour_case(n, args.seed)
        times, results = [], []
        for _, mod in impls:
            t, res = _best(lambda: mod.local_search(tour, D), args.repeat)
            times.append(t)
            results.append(res)
        assert all(r == results[0] for r in results), "kernels disagree"
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
        print(f"{'local_search':<14}{n:>10}" + "".join(f"{t:12.5f}" for t in times) + f"{speed:>10}")
    for label, case in oracle_cases(4, args.seed):
        times, results = [], []
        for _, mod in impls:
            t, res = _best(lambda: mod.oracle_search(*case), args.repeat)
            times.append(t)
            results.append(res)
        assert all(r == results[0] for r in results), "kernels disagree"
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
        print(f"{'oracle_search':<14}{label:>10}" + "".join(f"{t:12.5f}" for t in times) + f"{speed:>10}")


if __name__ == "__main__":
    main()
