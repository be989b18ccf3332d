import math

import pytest

from rauzy_lab.combinatorics import CombinatorialPair

PHI = (1 + math.sqrt(5)) / 2


@pytest.fixture
def golden_pair():
    return CombinatorialPair(("A", "B"), (1, 2), (2, 1))


@pytest.fixture
def d3_pair():
    return CombinatorialPair(("A", "B", "C"), (1, 2, 3), (3, 2, 1))
