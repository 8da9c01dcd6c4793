import cmath

import numpy as np
import pytest

from tau2sov.representation import random_generic_config


def random_points(rng, n, lo=0.8, hi=1.25):
    """``n`` spectral points on the annulus ``lo <= |lam| <= hi``."""
    r = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
    return [complex(z) for z in r * np.exp(2j * np.pi * rng.uniform(size=n))]


def random_complex(rng, n=None, lo=0.5, hi=2.0):
    if n is None:
        return complex(np.exp(rng.uniform(np.log(lo), np.log(hi))) * cmath.exp(2j * np.pi * rng.uniform()))
    return [random_complex(rng, None, lo, hi) for _ in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_CACHE = {}


def config(p=3, n=2, seed=1, mode="general", triangular_plus=True):
    key = (p, n, seed, mode, triangular_plus)
    if key not in _CACHE:
        _CACHE[key] = random_generic_config(p, 2, n, seed, mode=mode, triangular_plus=triangular_plus)[0]
    return _CACHE[key]
