"""Topological alignment force with a compiled core and a numpy fallback.

The compiled extension is preferred when importable; ``use_backend`` swaps
implementations explicitly (benchmarks, cross-checks). Both backends share
one contract: ``accel_at`` evaluates the rank-weighted alignment force at
arbitrary phase points sourced from a uniformly weighted atom cloud, and
``topological_rhs`` is the special case where the evaluation points are
the atoms themselves. All agents at distance <= |x - x_j| of x count
toward the rank of atom j (self inclusive), so a shared table of kernel
values indexed by integer count keeps the two call sites exactly equal.
"""

from __future__ import annotations

import numpy as np

from . import _force_py
from .ensemble import ParticleEnsemble
from .kernels import Kernel

try:
    from . import _core

    _HAVE_CORE = True
except ImportError:  # pragma: no cover - build-dependent
    _core = None
    _HAVE_CORE = False

__all__ = [
    "accel_at",
    "topological_rhs",
    "use_backend",
    "backend_name",
    "available_backends",
]

_backend = "compiled" if _HAVE_CORE else "python"


def available_backends():
    return ("compiled", "python") if _HAVE_CORE else ("python",)


def backend_name() -> str:
    return _backend


def use_backend(name: str) -> str:
    """Select 'compiled' or 'python'; returns the previous backend name."""
    global _backend
    if name not in ("compiled", "python"):
        raise ValueError("backend must be 'compiled' or 'python'")
    if name == "compiled" and not _HAVE_CORE:
        raise RuntimeError("compiled backend unavailable (extension not built)")
    prev = _backend
    _backend = name
    return prev


def _as_matrix(arr) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.ndim == 1:
        out = out[:, None]
    return out


def accel_at(x_eval, v_eval, xs, vs, kernel: Kernel) -> np.ndarray:
    """Alignment force at each (x_eval[e], v_eval[e]) from uniform atoms (xs, vs).

    Returns (m, d) accelerations
    (1/n)·Σ_j K(c_j/n)·(vs[j] − v_eval[e]) with c_j the inclusive count of
    atoms within |x_eval[e] − xs[j]| of x_eval[e].
    """
    x_eval = _as_matrix(x_eval)
    v_eval = _as_matrix(v_eval)
    xs = _as_matrix(xs)
    vs = _as_matrix(vs)
    if x_eval.shape != v_eval.shape or xs.shape != vs.shape:
        raise ValueError("position/velocity shape mismatch")
    if x_eval.shape[1] != xs.shape[1]:
        raise ValueError("dimension mismatch between evaluation points and atoms")
    n = xs.shape[0]
    ktable = kernel.table(n)
    out = np.empty_like(x_eval)
    if _backend == "python":
        return _force_py.accel_at(x_eval, v_eval, xs, vs, ktable, out)
    if xs.shape[1] == 1:
        order = np.argsort(xs[:, 0], kind="stable")
        xs_s = np.ascontiguousarray(xs[order, 0])
        vs_s = np.ascontiguousarray(vs[order, 0])
        _core.accel_at_1d(
            np.ascontiguousarray(x_eval[:, 0]),
            np.ascontiguousarray(v_eval[:, 0]),
            xs_s,
            vs_s,
            ktable,
            out[:, 0],
        )
        return out
    return _core.accel_at_nd(x_eval, v_eval, xs, vs, ktable, out)


def topological_rhs(ens: ParticleEnsemble, kernel: Kernel) -> np.ndarray:
    """Accelerations (1/N)·Σ_j K(M(x_i,|x_i−x_j|))·(v_j − v_i) for all agents."""
    return accel_at(ens.x, ens.v, ens.x, ens.v, kernel)
