"""Probability-measure representations: atomic clouds and 1D grid densities.

An :class:`EmpiricalMeasure` is a weighted point cloud in R^d; a
:class:`GridDensity1D` is a cell-averaged density on a uniform 1D grid with
a precomputed CDF. Both expose closed-ball masses with an inclusive
boundary convention.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["EmpiricalMeasure", "GridDensity1D", "ball_mass"]

_MASS_TOL = 1e-12
_GRID_MASS_TOL = 1e-10


def _as_float_matrix(arr, name: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.ndim == 1:
        out = out[:, None]
    if out.ndim != 2:
        raise ValueError(f"{name} must be a (m, d) array")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


@dataclass
class EmpiricalMeasure:
    """Weighted atomic probability measure on R^d."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points = _as_float_matrix(self.points, "points")
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.points.shape[0],):
            raise ValueError("weights must be a (m,) array matching points")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise ValueError("weights must be finite and non-negative")
        if abs(float(self.weights.sum()) - 1.0) > _MASS_TOL:
            raise ValueError("weights must sum to 1 within 1e-12")

    @classmethod
    def from_points(cls, points, weights=None) -> "EmpiricalMeasure":
        pts = _as_float_matrix(points, "points")
        if weights is None:
            weights = np.full(pts.shape[0], 1.0 / pts.shape[0])
        return cls(pts, weights)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == 1.0 / self.n_atoms))

    def ball_mass(self, center, radius: float) -> float:
        """Mass of the closed ball B(center, radius), inclusive boundary."""
        if radius < 0:
            raise ValueError("radius must be >= 0")
        c = np.asarray(center, dtype=np.float64).reshape(-1)
        if c.shape[0] != self.dim:
            raise ValueError("center dimension mismatch")
        dist = np.sqrt(((self.points - c) ** 2).sum(axis=1))
        return float(self.weights[dist <= radius].sum())

    def to_csv(self, path) -> None:
        header = [f"x{k}" for k in range(self.dim)] + ["w"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row, w in zip(self.points, self.weights):
                writer.writerow([repr(float(v)) for v in row] + [repr(float(w))])

    @classmethod
    def from_csv(cls, path) -> "EmpiricalMeasure":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if not header or header[-1] != "w":
                raise ValueError("empirical-measure CSV must end with a 'w' column")
            rows = [[float(v) for v in row] for row in reader]
        data = np.asarray(rows, dtype=np.float64)
        return cls(data[:, :-1], data[:, -1])


@dataclass
class GridDensity1D:
    """Cell-averaged probability density on a uniform grid over [x_min, x_max].

    ``cdf_edges[k]`` holds the cumulative mass at the k-th cell edge, so the
    CDF is the piecewise-linear interpolant of (edges, cdf_edges).
    """

    x_min: float
    x_max: float
    values: np.ndarray
    cdf_edges: np.ndarray = field(init=False)

    def __post_init__(self):
        self.x_min = float(self.x_min)
        self.x_max = float(self.x_max)
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be < x_max")
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("values must be a non-empty 1D array")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValueError("density values must be finite and non-negative")
        mass = float(self.values.sum() * self.dx)
        if abs(mass - 1.0) > _GRID_MASS_TOL:
            raise ValueError(f"grid density mass {mass} deviates from 1 beyond 1e-10")
        cdf = np.concatenate([[0.0], np.cumsum(self.values) * self.dx])
        cdf[-1] = 1.0
        self.cdf_edges = cdf

    @property
    def cells(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.values.size

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.cells) + 0.5) * self.dx

    @property
    def sup_norm(self) -> float:
        return float(self.values.max())

    def cdf(self, x):
        """CDF at x (scalar or array); piecewise linear, clipped to [0, 1]."""
        return np.interp(x, self.edges, self.cdf_edges, left=0.0, right=1.0)

    def ball_mass(self, center: float, radius: float) -> float:
        if radius < 0:
            raise ValueError("radius must be >= 0")
        c = float(np.asarray(center).reshape(()))
        return float(self.cdf(c + radius) - self.cdf(c - radius))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n inverse-CDF draws; exact for the piecewise-constant density."""
        u = rng.random(n)
        return np.interp(u, self.cdf_edges, self.edges)

    @classmethod
    def uniform(cls, x_min: float, x_max: float, cells: int) -> "GridDensity1D":
        return cls(x_min, x_max, np.full(cells, 1.0 / (x_max - x_min)))

    @classmethod
    def raised_cosine(cls, x_min: float, x_max: float, cells: int) -> "GridDensity1D":
        """rho(x) = (1 - cos(2 pi (x-x_min)/L)) / L on [x_min, x_max], cell-averaged exactly."""
        length = x_max - x_min
        edges = np.linspace(0.0, 1.0, cells + 1)
        # antiderivative of (1 - cos(2 pi s)) on [0, 1]: s - sin(2 pi s) / (2 pi)
        anti = edges - np.sin(2.0 * np.pi * edges) / (2.0 * np.pi)
        vals = np.diff(anti) / (length / cells)
        vals = vals / (vals.sum() * (length / cells))
        return cls(x_min, x_max, vals)

    @classmethod
    def from_function(
        cls, fn, x_min: float, x_max: float, cells: int
    ) -> "GridDensity1D":
        """Cell averages of fn by 5-point Gauss-Legendre, normalized to unit mass."""
        nodes, wts = np.polynomial.legendre.leggauss(5)
        edges = np.linspace(x_min, x_max, cells + 1)
        dx = (x_max - x_min) / cells
        mids = 0.5 * (edges[:-1] + edges[1:])
        pts = mids[:, None] + 0.5 * dx * nodes[None, :]
        vals = 0.5 * (np.asarray(fn(pts)) * wts[None, :]).sum(axis=1)
        vals = np.clip(vals, 0.0, None)
        vals = vals / (vals.sum() * dx)
        return cls(x_min, x_max, vals)

    def to_json(self, path) -> None:
        doc = {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "values": [float(v) for v in self.values],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def from_json(cls, path) -> "GridDensity1D":
        with open(path) as fh:
            doc = json.load(fh)
        return cls(doc["x_min"], doc["x_max"], np.asarray(doc["values"]))


def ball_mass(measure, center, radius: float) -> float:
    """Closed-ball mass for either measure representation."""
    return measure.ball_mass(center, radius)
