import numpy as np
import pytest

from trajcheck.config import DEFAULT_SETTINGS
from trajcheck.moments import MomentTable
from trajcheck.synth import MeasureSpec, synthesize


def identity_gamma(max_i, max_j):
    """Moments of δ_t dt: gamma[i][j] = 1/(i+j+1)."""
    i = np.arange(max_i + 1)[:, None]
    j = np.arange(max_j + 1)[None, :]
    return 1.0 / (i + j + 1.0)


def product_gamma(max_i, max_j):
    i = np.arange(max_i + 1)[:, None]
    j = np.arange(max_j + 1)[None, :]
    return 1.0 / ((i + 1.0) * (j + 1.0))


@pytest.fixture
def settings():
    return DEFAULT_SETTINGS


@pytest.fixture
def identity_table():
    return MomentTable.build(identity_gamma(4, 8))


@pytest.fixture
def product_table():
    return MomentTable.build(product_gamma(4, 8))


@pytest.fixture
def mixture_spec():
    return MeasureSpec.from_dict({'kind': 'mixture',
                                  'trajectories': ['poly:0,1', 'poly:1,-1']})


@pytest.fixture
def mixture_table(mixture_spec):
    return synthesize(mixture_spec, 4, 8)


@pytest.fixture
def exp_spec():
    return MeasureSpec.from_dict({'trajectories': 'exp_neg'})


@pytest.fixture
def exp_table(exp_spec):
    return synthesize(exp_spec, 2, 10)


@pytest.fixture
def linear_marginal_table():
    spec = MeasureSpec.from_dict({'trajectories': 'poly:0,1',
                                  'marginal': 'linear'})
    return synthesize(spec, 3, 3)
