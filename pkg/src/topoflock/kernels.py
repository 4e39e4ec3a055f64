"""Communication kernels mapping a neighbour rank in [0, 1] to an alignment weight.

Three closed-form families are provided, all positive, Lipschitz and
non-increasing on [0, 1]:

* ``constant``     K(z) = kappa
* ``affine``       K(z) = a - b*z          (a > b >= 0)
* ``exponential``  K(z) = scale * exp(-beta*z)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Kernel"]

_FAMILIES = ("constant", "affine", "exponential")


@dataclass(frozen=True)
class Kernel:
    """A rank-interaction kernel with its closed-form norms.

    Attributes:
        family: one of ``constant``, ``affine``, ``exponential``.
        params: family parameters, see the factory classmethods.
        lip_constant: Lipschitz constant of K on [0, 1].
        sup_norm: sup of K on [0, 1] (attained at 0 for all families).
        gamma: integral of K over [0, 1], in closed form.
        kcal: max(1, lip_constant, sup_norm).
    """

    family: str
    params: tuple[float, ...]
    lip_constant: float = field(init=False)
    sup_norm: float = field(init=False)
    gamma: float = field(init=False)
    kcal: float = field(init=False)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        p = self.params
        if self.family == "constant":
            (kappa,) = p
            if not (kappa > 0 and math.isfinite(kappa)):
                raise ValueError("constant kernel requires kappa > 0")
            lip, sup, gam = 0.0, kappa, kappa
        elif self.family == "affine":
            a, b = p
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("affine kernel parameters must be finite")
            if b < 0:
                raise ValueError("affine kernel requires b >= 0 (non-increasing)")
            if a - b <= 0:
                raise ValueError("affine kernel requires a - b > 0 (positivity at z=1)")
            lip, sup, gam = b, a, a - 0.5 * b
        else:
            beta, scale = p
            if not (scale > 0 and math.isfinite(scale)):
                raise ValueError("exponential kernel requires scale > 0")
            if not (beta >= 0 and math.isfinite(beta)):
                raise ValueError("exponential kernel requires beta >= 0")
            lip = scale * beta
            sup = scale
            gam = scale if beta == 0 else scale * (1.0 - math.exp(-beta)) / beta
        object.__setattr__(self, "lip_constant", float(lip))
        object.__setattr__(self, "sup_norm", float(sup))
        object.__setattr__(self, "gamma", float(gam))
        object.__setattr__(self, "kcal", max(1.0, float(lip), float(sup)))

    @classmethod
    def constant(cls, kappa: float = 1.0) -> "Kernel":
        return cls("constant", (float(kappa),))

    @classmethod
    def affine(cls, a: float, b: float) -> "Kernel":
        return cls("affine", (float(a), float(b)))

    @classmethod
    def exponential(cls, beta: float, scale: float = 1.0) -> "Kernel":
        return cls("exponential", (float(beta), float(scale)))

    def eval(self, z):
        """Evaluate K at z (scalar or array); z must lie in [0, 1]."""
        zarr = np.asarray(z, dtype=np.float64)
        if np.any(zarr < 0.0) or np.any(zarr > 1.0):
            raise ValueError("kernel argument outside [0, 1]")
        out = self._eval_raw(zarr)
        return float(out) if np.isscalar(z) or zarr.ndim == 0 else out

    def _eval_raw(self, zarr: np.ndarray) -> np.ndarray:
        if self.family == "constant":
            return np.full_like(zarr, self.params[0])
        if self.family == "affine":
            a, b = self.params
            return a - b * zarr
        beta, scale = self.params
        return scale * np.exp(-beta * zarr)

    def table(self, n: int) -> np.ndarray:
        """K evaluated at the n attainable rank values k/n, k = 1..n.

        This is the lookup table used by the force kernels: an inclusive
        rank count of k out of n atoms maps to ``table(n)[k-1]``.
        """
        if n < 1:
            raise ValueError("table size must be >= 1")
        return self._eval_raw(np.arange(1, n + 1, dtype=np.float64) / n)

    def to_dict(self) -> dict:
        if self.family == "constant":
            return {"family": "constant", "kappa": self.params[0]}
        if self.family == "affine":
            return {"family": "affine", "a": self.params[0], "b": self.params[1]}
        return {"family": "exponential", "beta": self.params[0], "scale": self.params[1]}

    @classmethod
    def from_dict(cls, spec: dict) -> "Kernel":
        family = spec.get("family")
        if family == "constant":
            return cls.constant(spec.get("kappa", 1.0))
        if family == "affine":
            return cls.affine(spec["a"], spec["b"])
        if family == "exponential":
            return cls.exponential(spec["beta"], spec.get("scale", 1.0))
        raise ValueError(
            f"unknown kernel family {family!r}; expected one of {_FAMILIES}"
        )
