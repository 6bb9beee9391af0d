import numpy as np
import pytest

from adini.fields import biharmonic_rhs, solution_poly4, solution_sine2
from adini.mesh import build_dofmap, build_mesh


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def sine2():
    return solution_sine2()


@pytest.fixture(scope="session")
def poly4():
    return solution_poly4()


def square_problem(w, n):
    mesh = build_mesh(w.domain[0], w.domain[1], n, n)
    return mesh, build_dofmap(mesh), biharmonic_rhs(w)


# acceptance lines recorded by test_acceptance, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
