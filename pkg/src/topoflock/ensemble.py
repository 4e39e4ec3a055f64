"""Particle-system state and rank bookkeeping.

State is a pair of (n, d) float64 arrays. The rank of agent j relative to
agent i counts, inclusively, how many agents lie within distance
|x_i - x_j| of x_i; agents at equal distance share the same (group-maximal)
count, and agent i itself is always counted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ParticleEnsemble", "SupportBox", "support_box", "RankProfile", "rank_profile"]


def _state_array(arr, name: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.ndim == 1:
        out = out[:, None]
    if out.ndim != 2:
        raise ValueError(f"{name} must be an (n, d) array")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


@dataclass
class ParticleEnsemble:
    """Positions and velocities of n agents in R^d."""

    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.x = _state_array(self.x, "x")
        self.v = _state_array(self.v, "v")
        if self.x.shape != self.v.shape:
            raise ValueError("x and v must have matching shapes")
        if self.x.shape[0] < 1:
            raise ValueError("ensemble must contain at least one agent")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.x.copy(), self.v.copy())

    def mean_velocity(self) -> np.ndarray:
        return self.v.mean(axis=0)

    def max_speed(self) -> float:
        return float(np.sqrt((self.v**2).sum(axis=1)).max())

    def max_radius(self) -> float:
        return float(np.sqrt((self.x**2).sum(axis=1)).max())


@dataclass(frozen=True)
class SupportBox:
    """Euclidean norm bounds for positions (r_x) and velocities (r_v)."""

    r_x: float
    r_v: float

    def __post_init__(self):
        if not (np.isfinite(self.r_x) and np.isfinite(self.r_v)):
            raise ValueError("support radii must be finite")
        if self.r_x < 0 or self.r_v < 0:
            raise ValueError("support radii must be non-negative")


def support_box(ens: ParticleEnsemble) -> SupportBox:
    return SupportBox(ens.max_radius(), ens.max_speed())


@dataclass(frozen=True)
class RankProfile:
    """Neighbor ranks of one agent, sorted by distance.

    ordered_neighbors[k] = (j, |x_i - x_j|, M) with M the inclusive
    normalized count of agents within that distance; tie_groups partitions
    neighbor indices by equal distance, in the same order.
    """

    center_index: int
    ordered_neighbors: tuple
    tie_groups: tuple

    def rank_of(self, j: int) -> float:
        for idx, _, m in self.ordered_neighbors:
            if idx == j:
                return m
        raise KeyError(j)


def rank_profile(ens: ParticleEnsemble, i: int) -> RankProfile:
    if not 0 <= i < ens.n:
        raise ValueError("agent index out of range")
    dist = np.sqrt(((ens.x - ens.x[i]) ** 2).sum(axis=1))
    order = np.argsort(dist, kind="stable")
    sorted_d = dist[order]
    neighbors = []
    groups = []
    start = 0
    for stop in range(1, ens.n + 1):
        if stop == ens.n or sorted_d[stop] != sorted_d[start]:
            m = stop / ens.n  # inclusive count of the whole tie group
            groups.append(tuple(int(j) for j in order[start:stop]))
            for k in range(start, stop):
                neighbors.append((int(order[k]), float(sorted_d[k]), m))
            start = stop
    return RankProfile(
        center_index=i,
        ordered_neighbors=tuple(neighbors),
        tie_groups=tuple(groups),
    )
