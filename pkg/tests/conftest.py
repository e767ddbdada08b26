import sys

import pytest

from helpers import complete_graph


@pytest.fixture
def k4():
    return complete_graph(4)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            lines = getattr(mod, "ACCEPTANCE_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
