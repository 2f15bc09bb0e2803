import numpy as np
import pytest

from lsqcontrol.corrector import BOUNDARY_EXTENDED, BOUNDARY_H1, inner_variant

VARIANTS = [BOUNDARY_H1, BOUNDARY_EXTENDED, inner_variant(0.25, 0.75)]


@pytest.fixture(params=VARIANTS, ids=lambda v: v.kind)
def variant(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
