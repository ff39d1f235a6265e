import math

import numpy as np
import pytest

from nvexotic import SequenceConfig, SourceGeometry, VibrationModel
from nvexotic.inference import Setup

THETA = math.acos(1 / math.sqrt(3))
LAM_200 = 200e-6

# Regression constants, frozen from independent evaluations (40-digit mpmath
# for the source integral and field, adaptive time quadrature for the phase).
F_NOMINAL = 9.5628957108974814e22
B_NOMINAL_G1 = 3.8564759065286178e9
K_NOMINAL = 5.79374471860252e15


@pytest.fixture
def geometry():
    return SourceGeometry()


@pytest.fixture
def vibration():
    return VibrationModel()


@pytest.fixture
def sequence():
    return SequenceConfig()


@pytest.fixture
def setup():
    return Setup()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import CRITERIA, RESULTS, _line

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, _ in CRITERIA:
        if label in RESULTS:
            terminalreporter.write_line(_line(label, *RESULTS[label]))
