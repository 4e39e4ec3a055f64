"""Shared test fixtures and the independent brute-force oracles.

The oracles here are written as plain double loops on purpose: they share
no code path with the package (no kernel tables, no sorting tricks), so
agreement is a genuine cross-check rather than a tautology.
"""

import numpy as np
import pytest

from topoflock import Kernel, ParticleEnsemble


def brute_rank_counts(x, i):
    """Inclusive rank counts for agent i: for each j, how many agents sit
    within the closed ball of radius |x_j - x_i| around x_i; ties share the
    group-maximal count."""
    n = x.shape[0]
    d = np.sqrt(((x - x[i]) ** 2).sum(axis=1))
    counts = np.empty(n, dtype=np.int64)
    for j in range(n):
        counts[j] = int(np.sum(d <= d[j]))
    return counts


def brute_rhs(x, v, kernel):
    """O(N^2) alignment force via direct evaluation of K at each rank."""
    n = x.shape[0]
    out = np.zeros_like(v)
    for i in range(n):
        counts = brute_rank_counts(x, i)
        for j in range(n):
            w = kernel.eval(counts[j] / n)
            out[i] += w * (v[j] - v[i]) / n
    return out


def random_ensemble(rng, n, d, x_scale=1.0, v_scale=1.0):
    return ParticleEnsemble(
        x_scale * rng.normal(size=(n, d)), v_scale * rng.normal(size=(n, d))
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


KERNEL_CASES = [
    Kernel.constant(1.0),
    Kernel.constant(0.3),
    Kernel.affine(2.0, 1.0),
    Kernel.affine(1.0, 0.5),
    Kernel.exponential(beta=1.0),
    Kernel.exponential(beta=2.0, scale=1.5),
]
