import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bayesfuse import Dataset


def random_instance(rng: np.random.Generator, n: int, p: int, scale: float = 1.0):
    """Small full-rank regression instance with centered columns."""
    X = rng.standard_normal((n, p))
    X -= X.mean(axis=0)
    beta = rng.standard_normal(p)
    y = X @ beta + scale * rng.standard_normal(n)
    y -= y.mean()
    return y, X


@pytest.fixture
def toy_data():
    rng = np.random.default_rng(7)
    y, X = random_instance(rng, 40, 5)
    data = Dataset(y=y, X=X, standardized=False)
    data.validate()
    return data
