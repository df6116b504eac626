import numpy as np
import pytest

from coorbit import DualPair, Frame, materialize

SQ3 = np.sqrt(3.0)


def naive_inner(f, g):
    return sum(a * complex(b).conjugate() for a, b in zip(f, g))


@pytest.fixture
def mercedes_pair():
    return DualPair.canonical(materialize({"kind": "mercedes"}))


@pytest.fixture
def onb_pair():
    onb = Frame(np.eye(3))
    return DualPair(onb, onb)


@pytest.fixture
def e1e1e2_pair():
    primal = Frame(np.array([[1, 1, 0], [0, 0, 1]], dtype=complex))
    dual = Frame(np.array([[0.5, 0.5, 0], [0, 0, 1]], dtype=complex))
    return DualPair(primal, dual)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_pair(rng, d, M):
    P = rng.standard_normal((d, M)) + 1j * rng.standard_normal((d, M))
    return DualPair.canonical(Frame(P))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
