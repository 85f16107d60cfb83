import pytest

from spinwn.lie import family_basis

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def basis5():
    return family_basis("ppqr")


@pytest.fixture(scope="session")
def basis28():
    return family_basis("int0")


@pytest.fixture(scope="session")
def basis_int1():
    return family_basis("int1")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
