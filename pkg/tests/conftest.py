import warnings

import numpy as np
import pytest

from ncwishart.model import RiceanChannel, WishartSpec, mean_from_singulars

# canonical 3x5 test channel (singular values of the deterministic mean)
SIGMAS_3X5 = [2.9751, 2.2840, 0.9657]


def make_channel(n=3, m=5, K=10.0, sigmas=SIGMAS_3X5, seed=7) -> RiceanChannel:
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="rescaling singular values")
        Hbar = mean_from_singulars(n, m, sigmas, seed=seed)
    return RiceanChannel(n, m, K, Hbar)


@pytest.fixture(scope="session")
def ch_3x5_k10():
    return make_channel(K=10.0)


@pytest.fixture(scope="session")
def ch_3x5_k1():
    return make_channel(K=1.0)


def random_spec(rng: np.random.Generator, s_max=4, t_max=7) -> WishartSpec:
    """A random valid spec with well-separated noncentrality eigenvalues."""
    s = int(rng.integers(1, s_max + 1))
    t = int(rng.integers(s, t_max + 1))
    L = int(rng.integers(0, s + 1))
    lam = np.sort(rng.uniform(0.3, 40.0, size=L))[::-1]
    # enforce comfortable relative gaps
    for i in range(1, L):
        if lam[i] > 0.8 * lam[i - 1]:
            lam[i] = 0.8 * lam[i - 1]
    return WishartSpec(s=s, t=t, L=L, lambdas=tuple(lam))
