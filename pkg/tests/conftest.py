import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from fpl import FdAlgebra, TracialState

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@st.composite
def algebras(draw, max_dim=16):
    """Block algebras with complex dimension <= max_dim."""
    sizes = []
    budget = max_dim
    while True:
        n = draw(st.integers(1, 3))
        if n * n > budget:
            break
        sizes.append(n)
        budget -= n * n
        if draw(st.booleans()):
            break
    if not sizes:
        sizes = [1]
    return FdAlgebra(tuple(sizes))


@st.composite
def faithful_traces(draw, algebra):
    raw = [draw(st.floats(0.05, 1.0)) for _ in range(algebra.num_blocks)]
    w = [x / sum(raw) for x in raw]
    w[-1] = 1.0 - sum(w[:-1])
    return TracialState(tuple(w))


def random_faithful(rng, algebra):
    w = rng.random(algebra.num_blocks) + 0.1
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return TracialState(tuple(w))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
