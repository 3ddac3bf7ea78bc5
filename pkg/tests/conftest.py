import pytest

from pinned_elastica import ProblemParams, constants

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def consts():
    return constants()


@pytest.fixture(scope="session")
def lam_hat(consts):
    return consts.lambda_hat


@pytest.fixture
def half():
    """lambda = 1/2, ell = 1."""
    return ProblemParams(0.5, 1.0)
