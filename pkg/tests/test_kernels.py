import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcurp import _kernels_py, kernels
from fcurp.instancegen import tiny_instance
from fcurp.milp import RoutingGraph
from fcurp.oracle import sufficient_cap
from fcurp.solution import Problem

compiled = pytest.importorskip("fcurp._kernels", reason="compiled kernels not built")


def test_compiled_kernels_selected():
    forced = os.environ.get("FCURP_PURE_PYTHON", "") in ("1", "true", "yes")
    assert kernels.BACKEND == ("python" if forced else "cython")


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 40), st.integers(0, 2**31))
def test_local_search_agrees(n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 20, (n, 2))
    D = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    start = [0] + [int(v) + 1 for v in rng.permutation(n - 1)]
    a = _kernels_py.local_search(start, D)
    b = compiled.local_search(start, D)
    assert list(a) == list(b)
    assert sorted(a) == list(range(n)) and a[0] == 0
    assert _kernels_py.tour_length(a, D) <= _kernels_py.tour_length(start, D) + 1e-9


@pytest.mark.parametrize("seed", range(15))
def test_oracle_search_agrees(seed):
    p = Problem.build(tiny_instance(seed))
    g = RoutingGraph.from_problem(p)
    r = np.zeros((g.n, g.n))
    for a in g.sites:
        for b in g.sites:
            r[a, b] = g.road(a, b)
    cap = sufficient_cap(g.n_targets, g.n - g.n_targets)
    args = (g.f, r, g.n_targets, g.s0, g.U, g.R, cap)
    ca, wa = _kernels_py.oracle_search(*args)
    cb, wb = compiled.oracle_search(*args)
    assert ca == cb and list(wa) == list(wb)
