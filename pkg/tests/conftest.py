import pytest

from hypext.spheres import SamplingSpec


@pytest.fixture(scope="session")
def coarse():
    """Cheap grid for unit tests; acceptance runs use the default grid."""
    return SamplingSpec(points_per_axis=7, max_points=400, fd_step=1e-3)
