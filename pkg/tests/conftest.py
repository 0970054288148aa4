import numpy as np
import pytest

from unf.model import UnfParams
from unf.ode import IntegratorConfig

# parameter anchors used throughout: the classical-Lorenz image, the
# classical-Chen image, and the stable-focus reference point
LORENZ_PT = UnfParams(0.6694, 0.1623, 1.05487)
CHEN_PT = UnfParams(0.26, 0.11, 2.47)
FOCUS_PT = UnfParams(0.7634, 0.35, 1.05487)


@pytest.fixture(scope="session")
def cfg():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
