import matplotlib

matplotlib.use('Agg')

import numpy as np
import pytest

from liesym.pointcloud import PointCloud, family_spec, sample_system


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full pipeline runs on 2-D data')


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def exp_curve():
    """u = e^x on [-2, 1], 400 points."""
    spec = family_spec('linear_ode', ranges={'x': (-2., 1.)},
                       counts={'x': 400}, fixed={'C': 1.}, seed=3)
    return sample_system(spec)


@pytest.fixture
def sin_curve():
    """y = sin(x) on [0, pi], 400 regularly spaced points."""
    x = np.linspace(0, np.pi, 400)
    return PointCloud.from_arrays(x, np.sin(x), names=['x', 'y'])


@pytest.fixture
def heat_names():
    return ['t', 'x', 'u']
