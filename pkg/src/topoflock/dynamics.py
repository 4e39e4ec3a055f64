"""Fixed-step RK4 integration of the rank-weighted alignment dynamics.

The right-hand side is piecewise smooth: it jumps when two inter-agent
distances cross and the rank configuration changes. RK4's formal order
holds between crossings; the invariant suites (velocity-hull contraction,
support growth) are the guard rails across them.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import ParticleEnsemble
from .forces import topological_rhs
from .kernels import Kernel

__all__ = ["IntegrationError", "step_rk4", "simulate", "Trajectory"]


class IntegrationError(RuntimeError):
    """Raised when a step produces a non-finite state."""


def _rhs(x, v, kernel):
    return topological_rhs(ParticleEnsemble(x, v), kernel)


def step_rk4(ens: ParticleEnsemble, kernel: Kernel, dt: float) -> ParticleEnsemble:
    """One classical RK4 step of (dx/dt, dv/dt) = (v, alignment force)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x0, v0 = ens.x, ens.v
    try:
        k1x = v0
        k1v = _rhs(x0, v0, kernel)
        k2x = v0 + 0.5 * dt * k1v
        k2v = _rhs(x0 + 0.5 * dt * k1x, v0 + 0.5 * dt * k1v, kernel)
        k3x = v0 + 0.5 * dt * k2v
        k3v = _rhs(x0 + 0.5 * dt * k2x, v0 + 0.5 * dt * k2v, kernel)
        k4x = v0 + dt * k3v
        k4v = _rhs(x0 + dt * k3x, v0 + dt * k3v, kernel)
    except ValueError as exc:
        # overflow in an intermediate stage shows up as ensemble validation
        raise IntegrationError(f"non-finite stage during step of dt={dt}") from exc
    x1 = x0 + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    v1 = v0 + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(v1))):
        raise IntegrationError(f"non-finite state after step of dt={dt}")
    return ParticleEnsemble(x1, v1)


@dataclass
class Trajectory:
    """Observed frames of a particle run plus per-frame summary statistics."""

    times: list = field(default_factory=list)
    frames: list = field(default_factory=list)
    max_speed: list = field(default_factory=list)
    max_radius: list = field(default_factory=list)

    def append(self, t: float, ens: ParticleEnsemble) -> None:
        self.times.append(float(t))
        self.frames.append(ens)
        self.max_speed.append(ens.max_speed())
        self.max_radius.append(ens.max_radius())

    def to_csv(self, path) -> None:
        d = self.frames[0].dim if self.frames else 0
        header = (
            ["t", "agent"]
            + [f"x{k}" for k in range(d)]
            + [f"v{k}" for k in range(d)]
        )
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t, ens in zip(self.times, self.frames):
                for i in range(ens.n):
                    row = [repr(t), str(i)]
                    row += [repr(float(val)) for val in ens.x[i]]
                    row += [repr(float(val)) for val in ens.v[i]]
                    writer.writerow(row)

    def summary_dict(self) -> dict:
        return {
            "t": list(self.times),
            "max_speed": list(self.max_speed),
            "max_radius": list(self.max_radius),
        }

    def summary_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary_dict(), fh, indent=1)


def step_times(t_final: float, dt: float) -> np.ndarray:
    """Step boundary times: k·dt up to ⌈t_final/dt⌉ steps, last lands on t_final."""
    if t_final < 0 or dt <= 0:
        raise ValueError("need t_final >= 0 and dt > 0")
    if t_final == 0:
        return np.array([0.0])
    n_steps = max(1, math.ceil(t_final / dt - 1e-12))
    times = np.arange(n_steps + 1, dtype=np.float64) * dt
    times[-1] = t_final
    return times


def simulate(
    ens: ParticleEnsemble,
    kernel: Kernel,
    dt: float,
    t_final: float,
    observer_stride: int = 1,
) -> Trajectory:
    """Integrate to t_final, recording every observer_stride-th frame.

    The initial and final frames are always recorded.
    """
    if observer_stride < 1:
        raise ValueError("observer_stride must be >= 1")
    times = step_times(t_final, dt)
    traj = Trajectory()
    traj.append(times[0], ens.copy())
    state = ens
    for k in range(len(times) - 1):
        state = step_rk4(state, kernel, float(times[k + 1] - times[k]))
        if (k + 1) % observer_stride == 0 or k + 1 == len(times) - 1:
            traj.append(times[k + 1], state.copy())
    return traj
