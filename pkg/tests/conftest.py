import pathlib

import numpy as np
import pytest

from ucreg.dataset import load_table

DATA_DIR = pathlib.Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def zoo_path():
    return DATA_DIR / "zoo.csv"


@pytest.fixture(scope="session")
def zoo(zoo_path):
    return load_table(zoo_path.read_bytes())


def make_clouds(seed=0, n_per=40, centers=((0.0, 0.0), (10.0, 0.0), (5.0, 8.66))):
    """Well-separated Gaussian clouds; returns (X, label_index_vector)."""
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for j, c in enumerate(centers):
        xs.append(rng.normal(loc=c, scale=0.5, size=(n_per, 2)))
        ys.extend([j] * n_per)
    return np.vstack(xs), np.array(ys)


@pytest.fixture
def clouds():
    return make_clouds()
