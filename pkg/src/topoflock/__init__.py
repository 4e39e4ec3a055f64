"""Rank-weighted (topological) flocking: particle simulation, mean-field
and hydrodynamic comparisons, and seeded convergence experiments."""

from ._version import __version__
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .dynamics import IntegrationError, Trajectory, simulate, step_rk4, step_times
from .ensemble import (
    ParticleEnsemble,
    RankProfile,
    SupportBox,
    rank_profile,
    support_box,
)
from .euler import (
    CFLError,
    EulerState1D,
    EulerTrajectory,
    ShockError,
    alignment_field,
    euler_solve,
    euler_step,
    l1_density_distance,
)
from .experiments import (
    FitResult,
    euler_vs_particles,
    fit_rate,
    run_chaos,
    run_euler_compare,
    run_fournier,
    run_metrics_selftest,
    run_simulate,
)
from .forces import accel_at, available_backends, backend_name, topological_rhs, use_backend
from .kernels import Kernel
from .meanfield import (
    ChaosRunResult,
    MollifierSpec,
    MonokineticDatum,
    ProductDatum,
    advect_in_reference_field,
    chaos_experiment,
    mean_field_force,
    mollified_monokinetic_sample,
    sample_iid,
)
from .measures import EmpiricalMeasure, GridDensity1D, ball_mass
from .metrics import (
    Dw1Report,
    RateReport,
    check_dw1,
    discrepancy_1d,
    discrepancy_candidates,
    fournier_rate,
    wasserstein1_1d,
    wasserstein1_assignment,
)

__all__ = [
    "__version__",
    "Kernel",
    "ParticleEnsemble",
    "SupportBox",
    "RankProfile",
    "rank_profile",
    "support_box",
    "EmpiricalMeasure",
    "GridDensity1D",
    "ball_mass",
    "accel_at",
    "topological_rhs",
    "available_backends",
    "backend_name",
    "use_backend",
    "IntegrationError",
    "Trajectory",
    "simulate",
    "step_rk4",
    "step_times",
    "wasserstein1_1d",
    "wasserstein1_assignment",
    "discrepancy_1d",
    "discrepancy_candidates",
    "check_dw1",
    "fournier_rate",
    "Dw1Report",
    "RateReport",
    "MollifierSpec",
    "ProductDatum",
    "MonokineticDatum",
    "sample_iid",
    "mollified_monokinetic_sample",
    "mean_field_force",
    "advect_in_reference_field",
    "chaos_experiment",
    "ChaosRunResult",
    "EulerState1D",
    "EulerTrajectory",
    "ShockError",
    "CFLError",
    "alignment_field",
    "euler_step",
    "euler_solve",
    "l1_density_distance",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "FitResult",
    "fit_rate",
    "run_simulate",
    "run_fournier",
    "run_chaos",
    "run_euler_compare",
    "run_metrics_selftest",
    "euler_vs_particles",
]
