import numpy as np
import pytest

from boundary_sdf.grid import BinaryMask

_ACCEPTANCE_LINES = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE_LINES.append(f"{name}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_two_class_mask(rng, shape, density):
    """Bernoulli mask, redrawn until both classes are present."""
    while True:
        fg = rng.random(shape) < density
        if 0 < fg.sum() < fg.size:
            return BinaryMask(fg.astype(np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
