"""Shared, expensive experiment runs (computed once per session)."""
import time

import numpy as np
import pytest

from pullback import engine, models as md

S1_FORWARD_T = tuple(np.round(np.arange(0.0, 10.01, 0.5), 12))
S1_BACKWARD_T = tuple(float(t) for t in range(-10, 1))
R1_FORWARD_T = (0.0, 2.0, 4.0, 6.0, 8.0)
R1_BACKWARD_T = (-8.0, -6.0, -4.0, -2.0, 0.0)


@pytest.fixture(scope="session")
def s1():
    return md.preset_s1()


@pytest.fixture(scope="session")
def s1_forward(s1):
    return engine.forward_convergence_experiment(
        s1, s1.semigroup(), S1_FORWARD_T, 1e-8, gap_t_grid=np.arange(0.0, 20.01, 2.0))


@pytest.fixture(scope="session")
def s1_backward(s1):
    return engine.backward_convergence_experiment(
        s1, s1.semigroup(), S1_BACKWARD_T, 1e-8, gap_t_grid=np.arange(-20.0, 0.01, 2.0))


@pytest.fixture(scope="session")
def pair_report():
    A, B = md.preset_pair()
    return engine.attractor_pair_experiment(A, B, S1_BACKWARD_T, 1e-8,
                                            gap_t_grid=np.arange(-20.0, 0.01, 2.0))


@pytest.fixture(scope="session")
def r1():
    return md.preset_r1()


def _timed(run):
    t0 = time.perf_counter()
    rep = run()
    rep.details["wall_time"] = time.perf_counter() - t0
    return rep


@pytest.fixture(scope="session")
def r1_forward(r1):
    return _timed(lambda: engine.forward_convergence_experiment(
        r1, r1.semigroup(), R1_FORWARD_T, 1e-7, ensemble_size=8,
        gap_t_grid=np.arange(0.0, 20.01, 4.0)))


@pytest.fixture(scope="session")
def r1_backward(r1, r1_forward):
    return _timed(lambda: engine.backward_convergence_experiment(
        r1, r1.semigroup(), R1_BACKWARD_T, 1e-7, ensemble_size=8,
        gap_t_grid=np.arange(-20.0, 0.01, 4.0)))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
