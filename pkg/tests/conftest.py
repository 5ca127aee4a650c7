import pytest

from fcurp.milp.backends import available_backends
from fcurp.model import Instance, Point, RoadNetwork
from fcurp.solution import Problem

BACKENDS = available_backends()

# criterion -> (passed, detail), filled in by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_addoption(parser):
    parser.addoption("--no-backend", action="store_true", default=False,
                     help="skip every test that needs a MIP backend")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--no-backend"):
        reason = "--no-backend given"
    elif not BACKENDS:
        reason = "no MIP backend installed"
    else:
        return
    skip = pytest.mark.skip(reason=reason)
    for item in items:
        if "backend" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in range(1, 9):
        if key not in ACCEPTANCE:
            terminalreporter.write_line(f"SKIP  criterion {key}: not run")
            continue
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")


def line_instance(**kw) -> Instance:
    """Straight road (0,5)-(10,5) sampled every km; U=6, R=4."""
    doc = dict(env_width=10.0, env_height=10.0,
               targets=(Point(1, 6), Point(2, 6), Point(9, 6)),
               road=RoadNetwork.from_lists([[(0, 5), (10, 5)]]),
               U=6.0, R=4.0, delta=1.0)
    doc.update(kw)
    return Instance(**doc)


@pytest.fixture
def line_problem():
    return Problem.build(line_instance())
