//! Time evolution: deterministic Schrödinger integration, quantum-jump
//! trajectories with heating, and thermal ensembles.

mod ensemble;
mod integrator;
mod mcwf;

pub use ensemble::{ensemble_member, neumaier, run_ensemble, run_trajectories, EnsembleOptions, EnsembleResult};
pub use integrator::{
    integrate_piecewise_exponential, integrate_schrodinger, uniform_grid, Dopri5, IntegratorOptions, StepStats,
};
pub use mcwf::{
    mcwf_trajectory, mcwf_trajectory_with, trajectory_rng, JumpDirection, JumpOperator, JumpOperatorSet, JumpRecord,
    Observable, TrajectoryOptions, TrajectoryResult,
};
