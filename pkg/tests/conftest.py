import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from legtrainer.mechanism import MechanismConfig, paper_config
from legtrainer.trajectory import paper_trajectory


@pytest.fixture(scope="session")
def paper():
    return paper_config()


@pytest.fixture(scope="session")
def spec():
    return paper_trajectory()


@pytest.fixture
def parallelogram():
    # crank and rocker 1, coupler and ground 2; the default branches keep the coupler level
    return MechanismConfig(l1=1.0, l2=2.0, l3=1.0, l4=2.0)


TWO_PI = 2 * math.pi
