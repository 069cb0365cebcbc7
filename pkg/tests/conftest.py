import functools
import sys

import pytest

from gmlie.geometry import get_geometry
from gmlie.vfsolver import EnhancedSpace


@functools.lru_cache(maxsize=None)
def space_for(name):
    return EnhancedSpace(get_geometry(name))


@pytest.fixture(scope="session")
def elliptic_space():
    return space_for("elliptic-1star")


@pytest.fixture(scope="session")
def p2_space():
    return space_for("local-p2")


@pytest.fixture(scope="session")
def f2_space():
    return space_for("local-f2")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = mod.summary_lines() if mod else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
