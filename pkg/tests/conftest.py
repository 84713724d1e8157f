import numpy as np
import pytest

from config import Config
from models.convolution import Group
from utils.logging_config import configure_root_logger
from utils.serialization import lattice_space, partial_sums_space


@pytest.fixture(autouse=True, scope='session')
def _logging():
    # bind the console handler before any CliRunner swaps stderr
    configure_root_logger('WARNING', log_dir=None)


@pytest.fixture
def a11_4():
    return partial_sums_space(4)


@pytest.fixture
def l1_3():
    return lattice_space(3, [1.0, 2.0, 0.5])


@pytest.fixture
def l1_2():
    return lattice_space(2)


@pytest.fixture
def rng():
    return np.random.default_rng(Config.SEED)


@pytest.fixture
def z8():
    return Group.integers(8)


@pytest.fixture
def z5():
    return Group.cyclic(5)


@pytest.fixture
def app(tmp_path):
    from app import create_app

    app = create_app({
        'TESTING': True,
        'DATABASE_PATH': str(tmp_path / 'reports.db'),
        'LOG_DIR': str(tmp_path / 'logs'),
    })
    yield app


@pytest.fixture
def client(app):
    return app.test_client()
