import numpy as np
import pytest

from sparsect.geometry import Image, fan_geometry, parallel_geometry
from sparsect.projector import back_project, forward_project


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the ray kernels once so timed tests measure math, not JIT."""
    img = Image(np.ones((16, 16)), 1.0)
    for geom in (parallel_geometry(16, 4), fan_geometry(16, 4)):
        back_project(forward_project(img, geom), geom)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
