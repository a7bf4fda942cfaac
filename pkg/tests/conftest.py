import random

import pytest

from projquant._rational import QQ
from projquant.repspace import RepSpec, density


@pytest.fixture
def rng():
    return random.Random(20240917)


@pytest.fixture
def densities():
    return density(QQ(2)), density(QQ(-3, 7))


MIXED_PAIRS = [
    (density(QQ(1, 3)), density(QQ(-1, 2))),
    (RepSpec("sym", 1, QQ(1, 2)), RepSpec("ext", 1, QQ(0))),
    (RepSpec("ext", 2, QQ(2, 3)), RepSpec("sym", 2, QQ(1, 5))),
]


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
