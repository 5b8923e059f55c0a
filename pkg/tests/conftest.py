import random

import pytest
from hypothesis import strategies as st

from vps.selftest import model


@pytest.fixture(scope="session")
def osc():
    return model("oscillator")


@pytest.fixture(scope="session")
def kg():
    return model("klein_gordon")


@pytest.fixture(scope="session")
def maxwell():
    return model("maxwell2d")


# a seeded generator; hypothesis shrinks the seed, the generators stay simple
rngs = st.integers(min_value=0, max_value=2**32 - 1).map(random.Random)
