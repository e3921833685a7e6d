import numpy as np
import pytest

from hitpredict.canonicalize import SongKey
from hitpredict.features import Dataset, InstanceId


def make_dataset(X, y, names=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    names = names or [f"f{j}" for j in range(X.shape[1])]
    instances = [InstanceId(SongKey(f"artist {i}", "t")) for i in range(len(X))]
    return Dataset(instances, names, X, np.asarray(y))


@pytest.fixture
def noisy_dataset():
    """200 rows, 6 features; the first two carry signal."""
    rng = np.random.default_rng(7)
    X = rng.normal(size=(200, 6))
    logit = 1.5 * X[:, 0] - X[:, 1]
    y = (rng.random(200) < 1 / (1 + np.exp(-logit))).astype(int)
    return make_dataset(X, y)
