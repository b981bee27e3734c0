import os

import pytest
from hypothesis import settings

from ultralab.analysis import QuadratureGrid
from ultralab.pdo import parse_operator

# symbolic differentiation makes first examples slow
settings.register_profile("default", deadline=None)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture()
def laplacian():
    return parse_operator("1*D[2,0] + 1*D[0,2]")


@pytest.fixture()
def coarse_grid():
    return QuadratureGrid(33)
