"""Sampling of initial data, the mean-field force, frozen-field advection,
and the coupled/advected deviation experiment."""

import numpy as np
import pytest

from topoflock import (
    ChaosRunResult,
    EmpiricalMeasure,
    GridDensity1D,
    Kernel,
    MollifierSpec,
    MonokineticDatum,
    ParticleEnsemble,
    ProductDatum,
    advect_in_reference_field,
    ball_mass,
    chaos_experiment,
    mean_field_force,
    mollified_monokinetic_sample,
    sample_iid,
    simulate,
    topological_rhs,
    wasserstein1_1d,
)

UNIT = GridDensity1D.uniform(0.0, 1.0, 64)


def uniform_product(d):
    return ProductDatum((UNIT,) * d, (UNIT,) * d)


# ----------------------------------------------------------------- sampling


def test_sample_iid_product_clt_band():
    ens = sample_iid(uniform_product(2), 1000, 555)
    # mean of U[0,1] within 4 sigma / sqrt(n) = 4*0.2887/31.6
    assert np.all(np.abs(ens.x.mean(axis=0) - 0.5) < 0.04)
    assert np.all(np.abs(ens.v.mean(axis=0) - 0.5) < 0.04)
    assert ens.n == 1000 and ens.dim == 2


def test_sample_iid_deterministic_and_single_point():
    a = sample_iid(uniform_product(1), 5, 99)
    b = sample_iid(uniform_product(1), 5, 99)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v)
    one = sample_iid(uniform_product(3), 1, 0)
    assert one.x.shape == (1, 3)
    with pytest.raises(ValueError):
        sample_iid(uniform_product(1), 0, 1)


def test_monokinetic_sharp_velocities():
    u0 = lambda x: np.sin(2.0 * np.pi * x)
    ens = sample_iid(MonokineticDatum(UNIT, u0, 0.0), 200, 7)
    assert np.array_equal(ens.v[:, 0], u0(ens.x[:, 0]))


def test_mollified_support_and_coupled_shrinkage():
    u0 = lambda x: 0.3 * x
    big = sample_iid(MonokineticDatum(UNIT, u0, 0.1), 500, 21)
    assert big.x.min() >= -0.1 and big.x.max() <= 1.1

    # epsilon only scales the bump draws, so equal seeds couple the clouds
    sharp = sample_iid(MonokineticDatum(UNIT, u0, 0.0), 500, 21)
    eps = 1e-8
    tiny = sample_iid(MonokineticDatum(UNIT, u0, eps), 500, 21)
    assert np.max(np.abs(tiny.x - sharp.x)) <= eps
    assert np.max(np.abs(tiny.v - sharp.v)) <= eps
    w1 = wasserstein1_1d(
        EmpiricalMeasure.from_points(tiny.x),
        EmpiricalMeasure.from_points(sharp.x),
    )
    assert w1 <= eps


def test_mollifier_draws_inside_unit_ball(rng):
    z = MollifierSpec(1.0, 4).sample(rng, 400)
    assert z.shape == (400, 4)
    assert np.all((z * z).sum(axis=1) < 1.0)
    with pytest.raises(ValueError):
        MollifierSpec(0.0)


def test_mollified_sample_helper_matches_datum():
    u0 = lambda x: x**2
    a = mollified_monokinetic_sample(UNIT, u0, MollifierSpec(0.05, 2), 64, 3)
    b = sample_iid(MonokineticDatum(UNIT, u0, 0.05), 64, 3)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v)


# ------------------------------------------------------------- force at law


def test_mean_field_force_reproduces_particle_rhs(rng):
    for d in (1, 2, 3):
        ens = ParticleEnsemble(rng.normal(size=(17, d)), rng.normal(size=(17, d)))
        spatial = EmpiricalMeasure.from_points(ens.x)
        phase = EmpiricalMeasure.from_points(np.hstack([ens.x, ens.v]))
        ker = Kernel.exponential(1.3)
        rhs = topological_rhs(ens, ker)
        for i in range(ens.n):
            f = mean_field_force(spatial, phase, ker, ens.x[i], ens.v[i])
            assert np.array_equal(f, rhs[i])


def test_mean_field_force_aligned_is_zero(rng):
    x = rng.normal(size=(9, 2))
    v = np.tile([0.4, -1.0], (9, 1))
    phase = EmpiricalMeasure.from_points(np.hstack([x, v]))
    f = mean_field_force(
        EmpiricalMeasure.from_points(x), phase, Kernel.affine(2.0, 1.0), x[3], v[3]
    )
    assert np.array_equal(f, np.zeros(2))


def test_mean_field_force_constant_kernel(rng):
    # constant kernel ignores ranks: force is kappa * (mean velocity - v)
    pts = rng.normal(size=(30, 4))
    w = rng.random(30)
    w /= w.sum()
    phase = EmpiricalMeasure.from_points(pts, w)
    spatial = EmpiricalMeasure.from_points(pts[:, :2], w)
    v = np.array([0.2, -0.7])
    f = mean_field_force(spatial, phase, Kernel.constant(1.7), np.zeros(2), v)
    want = 1.7 * ((w[:, None] * pts[:, 2:]).sum(axis=0) - v)
    assert np.max(np.abs(f - want)) <= 1e-14


def test_mean_field_force_grid_spatial_matches_ball_mass_sum(rng):
    rho = GridDensity1D.raised_cosine(0.0, 1.0, 128)
    ker = Kernel.affine(1.0, 0.25)
    pts = rng.uniform(0.0, 1.0, size=(40, 2))
    wts = rng.random(40)
    wts /= wts.sum()
    phase = EmpiricalMeasure.from_points(pts, wts)
    x, v = np.array([0.4]), np.array([-0.3])
    f = mean_field_force(rho, phase, ker, x, v)
    acc = 0.0
    for (y, w_), wt in zip(pts, wts):
        m = min(max(ball_mass(rho, x, abs(y - x[0])), 0.0), 1.0)
        acc += wt * ker._eval_raw(np.array([m]))[0] * (w_ - v[0])
    assert abs(f[0] - acc) <= 1e-12


def test_mean_field_force_rejects_mismatched_phase(rng):
    spatial = EmpiricalMeasure.from_points(rng.normal(size=(5, 2)))
    phase = EmpiricalMeasure.from_points(rng.normal(size=(5, 3)))
    with pytest.raises(ValueError):
        mean_field_force(spatial, phase, Kernel.constant(1.0), np.zeros(2), np.zeros(2))


# ----------------------------------------------------------- advected tests


def test_advect_aligned_field_free_streams(rng):
    x = rng.normal(size=(12, 2))
    c = np.array([0.3, -0.2])
    ens = ParticleEnsemble(x, np.tile(c, (12, 1)))
    traj = simulate(ens, Kernel.affine(1.0, 0.5), 0.1, 0.5, observer_stride=1)
    frames = advect_in_reference_field(ens, traj.frames, Kernel.affine(1.0, 0.5), 0.1)
    got = frames[-1]
    assert np.max(np.abs(got.v - c)) == 0.0
    assert np.max(np.abs(got.x - (x + 0.5 * c))) <= 1e-12


def test_advect_constant_kernel_relaxation():
    # static aligned reference: test velocity obeys dv/dt = kappa (c - v)
    kappa, c, v0, t_final, dt = 0.8, 1.0, -0.5, 1.0, 0.01
    ref_x = np.linspace(0.0, 1.0, 11)[:, None]
    ref = ParticleEnsemble(ref_x, np.full((11, 1), c))
    frames = [ref] * (int(round(t_final / dt)) + 1)
    tests = ParticleEnsemble(np.array([[0.5]]), np.array([[v0]]))
    out = advect_in_reference_field(tests, frames, Kernel.constant(kappa), dt)
    decay = np.exp(-kappa * t_final)
    v_want = c + (v0 - c) * decay
    x_want = 0.5 + c * t_final + (v0 - c) * (1.0 - decay) / kappa
    assert abs(out[-1].v[0, 0] - v_want) <= 1e-8
    assert abs(out[-1].x[0, 0] - x_want) <= 1e-8


def test_advect_self_consistency_small_residual():
    # advecting an ensemble in its own frozen field stays near the coupled
    # run; the gap is the frozen-stage error, well under 0.1 dt
    dt = 0.02
    ens = sample_iid(uniform_product(1), 32, 2024)
    ker = Kernel.affine(1.0, 0.5)
    traj = simulate(ens, ker, dt, 0.5, observer_stride=1)
    frames = advect_in_reference_field(ens, traj.frames, ker, dt)
    end_c, end_a = traj.frames[-1], frames[-1]
    dev = np.abs(end_c.x - end_a.x).sum(1) + np.abs(end_c.v - end_a.v).sum(1)
    assert dev.mean() <= 0.1 * dt


def test_advect_validates_lengths(rng):
    ens = ParticleEnsemble(rng.normal(size=(3, 1)), rng.normal(size=(3, 1)))
    with pytest.raises(ValueError):
        advect_in_reference_field(ens, [], Kernel.constant(1.0), 0.1)
    with pytest.raises(ValueError):
        advect_in_reference_field(ens, [ens, ens], Kernel.constant(1.0), 0.1, times=[0.0])


# ------------------------------------------------------- deviation estimate


def test_chaos_initial_deviation_is_zero_and_curves_sane():
    res = chaos_experiment(
        [4, 8], 16, 2, uniform_product(1), Kernel.affine(1.0, 0.5), 0.1, 0.3, 77
    )
    assert [r.n for r in res] == [4, 8]
    for r in res:
        assert isinstance(r, ChaosRunResult)
        assert r.times[0] == 0.0 and r.times[-1] == pytest.approx(0.3)
        assert r.d_n_estimate[0] == 0.0
        assert all(v >= 0.0 for v in r.d_n_estimate)
        assert all(np.isfinite(v) for v in r.w1_marginal)
        assert r.w1_marginal[0] == 0.0
        assert r.trials == 2 and not r.truncated
        assert np.isfinite(r.s2_covariance)
        assert r.per_trial_mean_dev.shape[0] == 2


def test_chaos_deviation_grows_from_zero():
    res = chaos_experiment(
        [8], 64, 3, uniform_product(1), Kernel.affine(1.0, 0.5), 0.05, 0.5, 31
    )
    curve = res[0].d_n_estimate
    assert curve[-1] > 0.0
    assert max(curve) <= 1.0


def test_chaos_wall_clock_cap_truncates():
    res = chaos_experiment(
        [4], 8, 5, uniform_product(1), Kernel.constant(1.0), 0.1, 0.2, 5,
        max_seconds=0.0,
    )
    assert res[0].truncated and res[0].trials == 1


def test_chaos_validates_arguments():
    with pytest.raises(ValueError):
        chaos_experiment([32], 16, 2, uniform_product(1), Kernel.constant(1.0), 0.1, 0.2, 1)
    with pytest.raises(ValueError):
        chaos_experiment([4], 16, 0, uniform_product(1), Kernel.constant(1.0), 0.1, 0.2, 1)


def test_chaos_thread_count_does_not_change_results():
    kw = dict(dt=0.1, t_final=0.2, rng_seed=11)
    a = chaos_experiment([4, 8], 16, 3, uniform_product(1), Kernel.affine(1.0, 0.5), **kw)
    b = chaos_experiment(
        [4, 8], 16, 3, uniform_product(1), Kernel.affine(1.0, 0.5), threads=3, **kw
    )
    for ra, rb in zip(a, b):
        assert ra.d_n_estimate == rb.d_n_estimate
        assert ra.delta_estimate == rb.delta_estimate
        assert ra.w1_marginal == rb.w1_marginal
