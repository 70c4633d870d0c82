import numpy as np
import pytest

from curves import make_circle, make_line


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_line():
    """Unit-speed segment along e1 through the origin."""
    return make_line([1.0, 0.0], [0.0, 0.0])


@pytest.fixture
def unit_circle():
    return make_circle(1.0)


@pytest.fixture
def db_url(tmp_path):
    return f"sqlite:///{tmp_path / 'runs.db'}"
