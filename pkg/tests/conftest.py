import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from capsys import geometry as geo

settings.register_profile("capsys", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("capsys")


def random_symmetric_vertices(rng, m=10, d=4):
    """``m`` random points and their negatives, pushed off the origin."""
    P = rng.standard_normal((m, d))
    P /= np.linalg.norm(P, axis=1)[:, None]
    P *= rng.uniform(0.6, 1.4, size=(m, 1))
    return np.vstack([P, -P])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def ball():
    return geo.make_ellipsoid([1.0, 1.0])


@pytest.fixture(scope="session")
def bxb1():
    return geo.bxb1()


@pytest.fixture(scope="session")
def cube():
    return geo.make_vpolytope(geo.cube_vertices(4))


@pytest.fixture(scope="session")
def bxb1_solved(bxb1):
    """The 16-start solve of B_inf x B_1 at N = 24 with its wall time."""
    import time

    from capsys import dual

    t0 = time.perf_counter()
    results = dual.solve(bxb1, dual.SolveConfig(modes=24, starts=16, seed=0))
    return results, time.perf_counter() - t0


@pytest.fixture(scope="session")
def ball_solved(ball):
    from capsys import dual

    return dual.solve(ball, dual.SolveConfig(modes=24, starts=8, seed=0))


# one PASS/FAIL line per acceptance criterion at the end of the run
_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _CRITERIA[int(name.split("_")[2])] = (report.outcome == "passed", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok, detail = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
