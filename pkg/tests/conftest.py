import numpy as np
import pytest

from hessmetric.profiles import HessianParams, RadialProfile, make_profile


def random_profile(rng, n: int, q: int, max_kinks: int = 4) -> RadialProfile:
    k = int(rng.integers(1, max_kinks + 1))
    taus = np.sort(-rng.uniform(0.05, 3.0, k))
    slopes = np.concatenate([[0.0], np.cumsum(rng.uniform(0.05, 1.5, k))])
    return make_profile(n, q, taus.tolist(), slopes.tolist())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params22():
    return HessianParams(2, 2)
