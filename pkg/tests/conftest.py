import math
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from fisherinfo.density import materialize, shared_grid
from fisherinfo.harness import DEFAULT_CATALOG
from fisherinfo.specs import Gaussian, GaussianMixture

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "fisherinfo", deadline=None, max_examples=20, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("fisherinfo")

SYMMETRIC_GMM = GaussianMixture(((0.5, -1.0, 1.0), (0.5, 1.0, 1.0)))
SKEWED_GMM = GaussianMixture(((0.3, -2.0, 0.5), (0.7, 1.0, 0.8)))
LAPLACE_SCALE = 1.0 / math.sqrt(2.0)


@pytest.fixture(scope="session")
def catalog_grid():
    return shared_grid(list(DEFAULT_CATALOG.values()))


@pytest.fixture(scope="session")
def catalog(catalog_grid):
    return {name: materialize(spec, catalog_grid) for name, spec in DEFAULT_CATALOG.items()}


@pytest.fixture(scope="session")
def gauss(catalog):
    return catalog["gauss-unit"]


@pytest.fixture(scope="session")
def gmm(catalog):
    return catalog["gmm-symmetric"]


def on_grid(spec, grid):
    return materialize(spec, grid)


def standard_normal(grid):
    return materialize(Gaussian(0.0, 1.0), grid)
