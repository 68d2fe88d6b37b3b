"""Shared strategies and small numeric helpers for the test suite."""

import numpy as np
from hypothesis import strategies as st

from ttno.dimtree import leaf, node


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@st.composite
def trees(draw, d=None, min_d=2, max_d=7, binary=False):
    """Random ordered dimension trees on leaves ``1..d``."""
    if d is None:
        d = draw(st.integers(min_d, max_d))

    def grow(lo, hi):
        if lo == hi:
            return leaf(lo)
        size = hi - lo + 1
        m = 2 if binary else draw(st.integers(2, min(size, 4)))
        cuts = sorted(draw(st.sets(st.integers(lo, hi - 1), min_size=m - 1, max_size=m - 1)))
        bounds = [lo] + [c + 1 for c in cuts] + [hi + 1]
        return node(*(grow(a, b - 1) for a, b in zip(bounds, bounds[1:])))

    return grow(1, d)
