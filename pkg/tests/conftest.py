import math

import pytest

from hyperconc.fock import ModeId, ModeTable

S = 1 / math.sqrt(2)


@pytest.fixture
def two_modes():
    return ModeTable((ModeId(0, 1, "u", "H"), ModeId(0, 1, "d", "H")))


@pytest.fixture
def four_modes():
    return ModeTable.standard(1, copies=(1,))
