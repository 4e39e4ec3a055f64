"""Pure-numpy backend for the rank-weighted alignment force.

Each evaluation point is processed independently: distances to all source
atoms, inclusive rank counts via a sorted search, then accumulation of
K(rank)·(v_j − v) over neighbors in sorted-distance order. Keeping the
accumulation order tied to the sorted neighbor sequence makes the result
independent of agent labelling (no exact distance ties) and of any outer
parallelism.
"""

from __future__ import annotations

import numpy as np


def accel_at(x_eval, v_eval, xs, vs, ktable, out):
    """out[e] = (1/n)·Σ_j ktable[c_j−1]·(vs[j] − v_eval[e]).

    c_j is the inclusive count of source atoms within |x_eval[e] − xs[j]|
    of x_eval[e]; ktable[k−1] holds the kernel at rank k/n.
    """
    n = xs.shape[0]
    inv_n = 1.0 / n
    for e in range(x_eval.shape[0]):
        diff = xs - x_eval[e]
        dist = np.sqrt((diff * diff).sum(axis=1))
        order = np.argsort(dist, kind="stable")
        sorted_d = dist[order]
        counts = np.searchsorted(sorted_d, sorted_d, side="right")
        coeff = ktable[counts - 1] * inv_n
        dv = vs[order] - v_eval[e]
        out[e] = (coeff[:, None] * dv).sum(axis=0)
    return out
