import pytest

from trilinear_manin.form import diagonal_form, random_generic_form

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def generic_n1():
    return [random_generic_form(1, 3, seed) for seed in range(1, 6)]


@pytest.fixture(scope="session")
def generic_n2():
    return [random_generic_form(2, 2, seed) for seed in range(1, 3)]


@pytest.fixture(scope="session")
def diag1():
    return diagonal_form(1)


@pytest.fixture(scope="session")
def diag2():
    return diagonal_form(2)
