import random
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from burnside_split.burnside import burnside_ring
from burnside_split.groups import build_group

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

FIXTURES = ["1", "C2", "C6", "S3", "D8", "Q8", "A4", "S4", "SL(2,3)", "A5"]
SMALL = ["1", "C2", "C6", "S3", "D8", "Q8", "A4"]


@lru_cache(maxsize=None)
def group(spec):
    return build_group(spec)


def random_element(ring, rng: random.Random, lo=-3, hi=3, fractions=False):
    """A random virtual element given by orbit coefficients."""
    coeffs = []
    for _ in range(ring.rank):
        c = Fraction(rng.randint(lo, hi))
        if fractions and rng.random() < 0.3:
            c /= rng.choice([2, 3, 5])
        coeffs.append(c)
    return ring.from_orbits(coeffs)


def ring_of(H):
    return burnside_ring(H)


@pytest.fixture(params=FIXTURES)
def fixture_group(request):
    return group(request.param)


@pytest.fixture(params=SMALL)
def small_group(request):
    return group(request.param)
