import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qramsim.qstate import make_address_state

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_superposition(rng: np.random.Generator, n: int, terms: int | None = None, d: int = 1):
    """Random normalized address state over ``terms`` distinct addresses (all of them by default)."""
    size = 2**n if terms is None else min(terms, 2**n)
    ks = rng.choice(2**n, size=size, replace=False)
    amps = rng.normal(size=size) + 1j * rng.normal(size=size)
    amps /= np.linalg.norm(amps)
    return make_address_state(n, [(int(k), complex(a)) for k, a in zip(ks, amps)], d)


def basis(n: int, k: int, d: int = 1):
    return make_address_state(n, [(k, 1.0)], d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


INV_SQRT2 = 1 / math.sqrt(2)
