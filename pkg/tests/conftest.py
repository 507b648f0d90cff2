import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphs import fig2_graph, random_suite, self_loop, two_cycle  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fig2():
    return fig2_graph()


@pytest.fixture(scope="session")
def cycle2():
    return two_cycle()


@pytest.fixture(scope="session")
def loop1():
    return self_loop()


@pytest.fixture(scope="session")
def suite():
    return random_suite(50)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
