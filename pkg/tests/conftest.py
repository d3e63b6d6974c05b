"""Shared fixtures and random-instance helpers."""

import numpy as np
import pytest

from coopt.model import build_model

SEED = 20250811


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def random_model(rng, n_lo=2, n_hi=8, m_lo=2, m_hi=5, pair_prob=0.4,
                 scale=10.0, max_assignments=None):
    """Random pairwise instance: n variables, uniform tables in [0, scale].

    Ordered pairs (i, j) with i < j appear independently with ``pair_prob``.
    ``max_assignments`` (when given) resamples domain sizes until the full
    assignment count stays enumerable in bulk.
    """
    n = int(rng.integers(n_lo, n_hi + 1))
    while True:
        sizes = rng.integers(m_lo, m_hi + 1, size=n)
        total = int(np.prod(sizes))
        if max_assignments is None or total <= max_assignments:
            break
    unary = [rng.uniform(0.0, scale, size=int(m)) for m in sizes]
    pairwise = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.uniform() < pair_prob:
                pairwise[(i, j)] = rng.uniform(
                    0.0, scale, size=(int(sizes[i]), int(sizes[j]))
                )
    return build_model(unary, pairwise)


def two_var_model():
    """Small fixed instance used for hand-checked values throughout.

    Energies (shift 0): E(0,0)=0, E(0,1)=8, E(1,0)=6, E(1,1)=3.
    """
    return build_model(
        unary=[np.array([0.0, 1.0]), np.array([0.0, 2.0])],
        pairwise={(0, 1): np.array([[0.0, 6.0], [5.0, 0.0]])},
    )
