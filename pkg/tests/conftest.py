import numpy as np
import pytest

from mgtheta.graphs import validate_graph
from mgtheta.ingest import BUNDLED_INSTANCES, bundled_multigraph


def cycle(n, weights=None):
    return validate_graph(weights or [1.0] * n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(rng, n, p=0.5, wmax=2.0):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    weights = rng.uniform(0.05, wmax, size=n)
    return validate_graph(weights, edges)


@pytest.fixture
def c5():
    return cycle(5)


@pytest.fixture(scope="session")
def instances():
    return {name: bundled_multigraph(name) for name in BUNDLED_INSTANCES}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, details: list[str]) -> None:
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}"
    if details:
        line += " | " + "; ".join(details)
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
