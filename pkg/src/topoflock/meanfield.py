"""Mean-field force, mollified monokinetic sampling, and the coupled
particle/mean-field deviation experiment.

The continuum solution is never available in closed form; the independent
mean-field flow is approximated by advecting test particles in the frozen
empirical field of a large reference ensemble evolved as a coupled system.
Freezing the field at the frame time across RK4 stages avoids interpolating
a field that is discontinuous in the rank configuration; the O(dt) stage
error this introduces is far below the Monte Carlo error at these scales.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import time

import numpy as np

from .dynamics import simulate, step_times
from .ensemble import ParticleEnsemble
from .forces import accel_at
from .kernels import Kernel
from .measures import EmpiricalMeasure, GridDensity1D

__all__ = [
    "MollifierSpec",
    "ProductDatum",
    "MonokineticDatum",
    "sample_iid",
    "mollified_monokinetic_sample",
    "mean_field_force",
    "advect_in_reference_field",
    "ChaosRunResult",
    "chaos_experiment",
]


@dataclass(frozen=True)
class MollifierSpec:
    """Smooth bump exp(-1/(1-|z|^2)) on the unit ball of phase space R^{2d}."""

    epsilon: float
    phase_dim: int = 2

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("mollifier scale must be positive")
        if self.phase_dim < 1:
            raise ValueError("phase dimension must be >= 1")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n rejection draws from the normalized bump, unit-ball support."""
        out = np.empty((n, self.phase_dim))
        have = 0
        while have < n:
            batch = max(64, 4 * (n - have))
            z = rng.uniform(-1.0, 1.0, size=(batch, self.phase_dim))
            r2 = (z * z).sum(axis=1)
            u = rng.random(batch)
            inside = r2 < 1.0
            # bump(z)/bump(0) = exp(1 - 1/(1 - r^2))
            accept = inside & (u < np.exp(1.0 - 1.0 / np.maximum(1.0 - r2, 1e-300)))
            take = min(int(accept.sum()), n - have)
            out[have : have + take] = z[accept][:take]
            have += take
        return out


@dataclass(frozen=True)
class ProductDatum:
    """Initial datum with independent bounded marginals per coordinate."""

    x_marginals: tuple
    v_marginals: tuple

    def __post_init__(self):
        if len(self.x_marginals) != len(self.v_marginals) or not self.x_marginals:
            raise ValueError("need matching non-empty x and v marginal lists")

    @property
    def dim(self) -> int:
        return len(self.x_marginals)

    def sample(self, rng: np.random.Generator, n: int) -> ParticleEnsemble:
        x = np.column_stack([m.sample(rng, n) for m in self.x_marginals])
        v = np.column_stack([m.sample(rng, n) for m in self.v_marginals])
        return ParticleEnsemble(x, v)


@dataclass(frozen=True)
class MonokineticDatum:
    """1D monokinetic datum rho0(x)·delta(v - u0(x)), mollified when epsilon > 0."""

    rho0: GridDensity1D
    u0: object  # vectorized callable x -> u0(x)
    epsilon: float = 0.0

    @property
    def dim(self) -> int:
        return 1

    def sample(self, rng: np.random.Generator, n: int) -> ParticleEnsemble:
        x0 = self.rho0.sample(rng, n)
        v0 = np.asarray(self.u0(x0), dtype=np.float64)
        if self.epsilon == 0.0:
            return ParticleEnsemble(x0, v0)
        zeta = MollifierSpec(self.epsilon, 2).sample(rng, n)
        return ParticleEnsemble(
            x0 + self.epsilon * zeta[:, 0], v0 + self.epsilon * zeta[:, 1]
        )


def sample_iid(datum, n: int, rng_seed) -> ParticleEnsemble:
    """n iid draws from an initial-datum spec; deterministic given the seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    return datum.sample(rng, n)


def mollified_monokinetic_sample(
    rho0: GridDensity1D, u0, moll: MollifierSpec, n: int, rng_seed
) -> ParticleEnsemble:
    """Draw x0 ~ rho0 and set (x, v) = (x0, u0(x0)) + eps·zeta, zeta ~ bump."""
    rng = np.random.default_rng(rng_seed)
    x0 = rho0.sample(rng, n)
    v0 = np.asarray(u0(x0), dtype=np.float64)
    zeta = moll.sample(rng, n)
    eps = moll.epsilon
    return ParticleEnsemble(x0 + eps * zeta[:, 0], v0 + eps * zeta[:, 1])


def _phase_split(phase: EmpiricalMeasure, d: int):
    if phase.dim != 2 * d:
        raise ValueError("phase measure must have dimension 2d")
    return phase.points[:, :d], phase.points[:, d:]


def mean_field_force(spatial, phase: EmpiricalMeasure, kernel: Kernel, x, v):
    """Alignment force of the phase measure at (x, v), ranks from `spatial`.

    Returns ∫ K(M[rho](x, |x-y|))·(w - v) df(y, w). When `spatial` is
    exactly the position marginal of a uniform empirical `phase`, the rank
    of every atom is an integer count over the same atoms, and the
    evaluation routes through the same kernel-table path as the particle
    right-hand side, reproducing it identically.
    """
    if isinstance(spatial, GridDensity1D):
        d = 1
    elif isinstance(spatial, EmpiricalMeasure):
        d = spatial.dim
    else:
        raise TypeError(f"unsupported spatial measure {type(spatial).__name__}")
    y, w = _phase_split(phase, d)
    x = np.asarray(x, dtype=np.float64).reshape(d)
    v = np.asarray(v, dtype=np.float64).reshape(d)

    if (
        isinstance(spatial, EmpiricalMeasure)
        and spatial.is_uniform
        and phase.is_uniform
        and spatial.n_atoms == phase.n_atoms
        and np.array_equal(spatial.points, y)
    ):
        return accel_at(x[None, :], v[None, :], y, w, kernel)[0]

    dist = np.sqrt(((y - x) ** 2).sum(axis=1))
    if isinstance(spatial, GridDensity1D):
        masses = spatial.cdf(x[0] + dist) - spatial.cdf(x[0] - dist)
    else:
        dsp = np.sqrt(((spatial.points - x) ** 2).sum(axis=1))
        order = np.argsort(dsp, kind="stable")
        prefix = np.concatenate([[0.0], np.cumsum(spatial.weights[order])])
        masses = prefix[np.searchsorted(dsp[order], dist, side="right")]
    coeff = phase.weights * kernel._eval_raw(np.clip(masses, 0.0, 1.0))
    return (coeff[:, None] * (w - v)).sum(axis=0)


def advect_in_reference_field(
    tests: ParticleEnsemble,
    reference_frames,
    kernel: Kernel,
    dt: float,
    times=None,
):
    """RK4 trajectories of test particles in a frozen per-step reference field.

    reference_frames[k] supplies the field for the whole step from
    times[k] to times[k+1]; tests influence neither the reference nor each
    other. Returns the list of test frames at the same times.
    """
    n_steps = len(reference_frames) - 1
    if n_steps < 0:
        raise ValueError("need at least one reference frame")
    if times is None:
        times = np.arange(len(reference_frames)) * dt
    if len(times) != len(reference_frames):
        raise ValueError("times/frames length mismatch")
    out = [tests.copy()]
    y, w = tests.x.copy(), tests.v.copy()
    for k in range(n_steps):
        h = float(times[k + 1] - times[k])
        ref = reference_frames[k]

        def force(py, pv):
            return accel_at(py, pv, ref.x, ref.v, kernel)

        k1y = w
        k1w = force(y, w)
        k2y = w + 0.5 * h * k1w
        k2w = force(y + 0.5 * h * k1y, w + 0.5 * h * k1w)
        k3y = w + 0.5 * h * k2w
        k3w = force(y + 0.5 * h * k2y, w + 0.5 * h * k2w)
        k4y = w + h * k3w
        k4w = force(y + h * k3y, w + h * k3w)
        y = y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        w = w + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        out.append(ParticleEnsemble(y, w))
    return out


@dataclass
class ChaosRunResult:
    """Deviation curves between coupled and mean-field-advected particles."""

    n: int
    times: list
    d_n_estimate: list  # trial mean of the per-agent mean deviation
    delta_estimate: list  # trial mean of the per-agent max deviation
    w1_marginal: list  # W1 between coupled/advected agent-0 laws across trials
    trials: int
    rng_seed: int
    per_trial_mean_dev: np.ndarray = field(default=None, repr=False)
    per_trial_max_dev: np.ndarray = field(default=None, repr=False)
    s2_covariance: float = 0.0
    truncated: bool = False


def _row_norms(a: np.ndarray) -> np.ndarray:
    return np.sqrt((a * a).sum(axis=1))


def _chaos_trial(trial, n_list, m_ref, f0, kernel, dt, t_final, rng_seed, stride):
    """One independent trial: reference evolution plus all N cells."""
    ref_seed = np.random.SeedSequence(rng_seed, spawn_key=(0, trial))
    ref = sample_iid(f0, m_ref, ref_seed)
    ref_traj = simulate(ref, kernel, dt, t_final, observer_stride=1)
    times = np.asarray(ref_traj.times)
    obs_idx = _observed_indices(len(times), stride)

    cells = []
    for c, n in enumerate(n_list, start=1):
        cell_seed = np.random.SeedSequence(rng_seed, spawn_key=(c, trial))
        z0 = sample_iid(f0, n, cell_seed)
        coupled = simulate(z0, kernel, dt, t_final, observer_stride=1)
        advected = advect_in_reference_field(
            z0, ref_traj.frames, kernel, dt, times=times
        )
        mean_dev = np.empty(len(obs_idx))
        max_dev = np.empty(len(obs_idx))
        agent0_c = np.empty((len(obs_idx), 2 * z0.dim))
        agent0_a = np.empty((len(obs_idx), 2 * z0.dim))
        for out_k, k in enumerate(obs_idx):
            dev = _row_norms(coupled.frames[k].x - advected[k].x) + _row_norms(
                coupled.frames[k].v - advected[k].v
            )
            mean_dev[out_k] = dev.mean()
            max_dev[out_k] = dev.max()
            agent0_c[out_k] = np.concatenate(
                [coupled.frames[k].x[0], coupled.frames[k].v[0]]
            )
            agent0_a[out_k] = np.concatenate([advected[k].x[0], advected[k].v[0]])
        final_c = coupled.frames[-1]
        phi = float(np.tanh(final_c.x[0].sum() + final_c.v[0].sum()))
        psi = float(np.tanh(final_c.x[1].sum() - final_c.v[1].sum())) if n > 1 else 0.0
        cells.append(
            {
                "mean_dev": mean_dev,
                "max_dev": max_dev,
                "phi": phi,
                "psi": psi,
                "agent0_c": agent0_c,
                "agent0_a": agent0_a,
            }
        )
    return {"times": times[obs_idx], "cells": cells}


def _observed_indices(n_times: int, stride: int):
    idx = list(range(0, n_times, stride))
    if idx[-1] != n_times - 1:
        idx.append(n_times - 1)
    return idx


def chaos_experiment(
    n_list,
    m_ref: int,
    trials: int,
    f0,
    kernel: Kernel,
    dt: float,
    t_final: float,
    rng_seed: int,
    observer_stride: int = 1,
    threads: int = 1,
    max_seconds: float = None,
):
    """Coupled-vs-advected deviation curves for each N in n_list.

    Per trial: draw a fresh reference ensemble of size m_ref and evolve it
    as a coupled system; for each N draw Z_N, evolve it coupled, and advect
    the same Z_N in the frozen reference field; record per-frame mean/max
    of |x_i − y_i| + |v_i − w_i|. Trials are seeded independently of their
    scheduling and merged in trial order. With max_seconds set, remaining
    trials may be dropped (results flagged truncated); this trades the
    cross-thread-count determinism guarantee for a wall-clock cap.
    """
    n_list = list(n_list)
    if m_ref < max(n_list):
        raise ValueError("m_ref must be >= max(n_list)")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    t_start = time.monotonic()
    args = (n_list, m_ref, f0, kernel, dt, t_final, rng_seed, observer_stride)

    payloads = [None] * trials
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(_chaos_trial, tr, *args): tr for tr in range(trials)}
            for fut, tr in futures.items():
                payloads[tr] = fut.result()
    else:
        for tr in range(trials):
            payloads[tr] = _chaos_trial(tr, *args)
            if max_seconds is not None and time.monotonic() - t_start > max_seconds:
                payloads = payloads[: tr + 1]
                break
    truncated = len(payloads) < trials
    done = len(payloads)

    times = payloads[0]["times"]
    results = []
    for ci, n in enumerate(n_list):
        mean_mat = np.vstack([p["cells"][ci]["mean_dev"] for p in payloads])
        max_mat = np.vstack([p["cells"][ci]["max_dev"] for p in payloads])
        phis = np.array([p["cells"][ci]["phi"] for p in payloads])
        psis = np.array([p["cells"][ci]["psi"] for p in payloads])
        if done > 1:
            s2 = float(np.mean(phis * psis) - np.mean(phis) * np.mean(psis))
        else:
            s2 = 0.0
        coupled0 = np.stack([p["cells"][ci]["agent0_c"] for p in payloads])
        advected0 = np.stack([p["cells"][ci]["agent0_a"] for p in payloads])
        w1m = []
        for tk in range(len(times)):
            if done > 1:
                w1m.append(wasserstein1_marginal(coupled0[:, tk], advected0[:, tk]))
            else:
                w1m.append(float(_row_norms(coupled0[:, tk] - advected0[:, tk]).mean()))
        results.append(
            ChaosRunResult(
                n=n,
                times=[float(t) for t in times],
                d_n_estimate=[float(x) for x in mean_mat.mean(axis=0)],
                delta_estimate=[float(x) for x in max_mat.mean(axis=0)],
                w1_marginal=w1m,
                trials=done,
                rng_seed=rng_seed,
                per_trial_mean_dev=mean_mat,
                per_trial_max_dev=max_mat,
                s2_covariance=s2,
                truncated=truncated,
            )
        )
    return results


def wasserstein1_marginal(a_points: np.ndarray, b_points: np.ndarray) -> float:
    """W1 between two equal-size uniform clouds of phase points."""
    from .metrics import wasserstein1_assignment

    mu = EmpiricalMeasure.from_points(a_points)
    nu = EmpiricalMeasure.from_points(b_points)
    return wasserstein1_assignment(mu, nu)
