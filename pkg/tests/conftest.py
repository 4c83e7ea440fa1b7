import numpy as np
import pytest

# Mapping table ground truth: input bits -> (active TAs, BPSK symbol) for
# DTAA-R (Nt=3), DTAA-D (Nt=4) and LUT (Nt=4).
MAPPING_TRUTH = {
    "0000": ((1, 2, 3), 1j, (4,), -1, (1,), -1),
    "0001": ((1, 2, 3), -1j, (4,), 1, (1,), 1),
    "0010": ((3,), -1, (3,), -1, (2,), -1),
    "0011": ((3,), 1, (3,), 1, (2,), 1),
    "0100": ((2,), -1, (2,), -1, (3,), -1),
    "0101": ((2,), 1, (2,), 1, (3,), 1),
    "0110": ((2, 3), -1, (2, 3), -1, (4,), -1),
    "0111": ((2, 3), 1, (2, 3), 1, (4,), 1),
    "1000": ((1,), -1, (1,), -1, (1, 2), -1),
    "1001": ((1,), 1, (1,), 1, (1, 2), 1),
    "1010": ((1, 3), -1, (1, 3), -1, (3, 4), -1),
    "1011": ((1, 3), 1, (1, 3), 1, (3, 4), 1),
    "1100": ((1, 2), -1, (1, 2), -1, (1, 3), -1),
    "1101": ((1, 2), 1, (1, 2), 1, (1, 3), 1),
    "1110": ((1, 2, 3), -1, (1, 2, 3), -1, (2, 4), -1),
    "1111": ((1, 2, 3), 1, (1, 2, 3), 1, (2, 4), 1),
}


@pytest.fixture
def mapping_truth():
    return MAPPING_TRUTH


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
