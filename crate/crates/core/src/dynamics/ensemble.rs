//! Thermal Monte Carlo ensembles of heating trajectories.

use nalgebra::Vector4;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::mcwf::{mcwf_trajectory_with, trajectory_rng, JumpOperatorSet, Observable, TrajectoryOptions, TrajectoryResult};
use crate::error::Result;
use crate::hamiltonians::{build, HamiltonianKind};
use crate::hilbert::StateVector;
use crate::model::{thermal_sample, ChainConfig};

#[derive(Clone, Debug)]
pub struct EnsembleOptions {
    pub kind: HamiltonianKind,
    pub grid: Vec<f64>,
    pub trajectory: TrajectoryOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub mean: Vec<Vec<f64>>,
    /// Sample standard deviation over √n_traj.
    pub stderr: Vec<Vec<f64>>,
    pub n_traj: usize,
    pub master_seed: u64,
    pub jump_counts: Vec<usize>,
    pub initial_fock: Vec<Vec<usize>>,
    pub leakage: Vec<f64>,
    pub flagged: Vec<bool>,
}

impl EnsembleResult {
    pub fn flagged_fraction(&self) -> f64 {
        if self.n_traj == 0 {
            return 0.0;
        }
        self.flagged.iter().filter(|f| **f).count() as f64 / self.n_traj as f64
    }

    pub fn mean_jumps(&self) -> f64 {
        neumaier(self.jump_counts.iter().map(|&c| c as f64)) / self.n_traj.max(1) as f64
    }

    pub fn curve(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|k| self.mean[k].as_slice())
    }
}

/// Compensated sum, evaluated in iteration order.
pub fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

/// Run trajectory `index` of an ensemble: its own stream draws the initial
/// Fock numbers first, then drives the jump process.
pub fn ensemble_member(
    cfg: &ChainConfig,
    ham: &dyn crate::hamiltonians::Hamiltonian,
    jumps: &JumpOperatorSet,
    internal: &Vector4<C64>,
    observables: &[Observable],
    opts: &EnsembleOptions,
    master_seed: u64,
    index: u64,
) -> Result<(Vec<usize>, TrajectoryResult)> {
    let mut rng = trajectory_rng(master_seed, index);
    let fock: Vec<usize> = cfg.modes.iter().map(|m| thermal_sample(m.nbar, m.n_max, &mut rng)).collect();
    let psi0 = StateVector::product(ham.layout(), internal, &fock)?;
    let mut res = mcwf_trajectory_with(ham, &psi0, jumps, &opts.grid, observables, &opts.trajectory, &mut rng)?;
    res.seed = master_seed;
    res.stream = index;
    Ok((fock, res))
}

/// All trajectories of an ensemble, in index order.
pub fn run_trajectories(
    cfg: &ChainConfig,
    internal: &Vector4<C64>,
    n_traj: usize,
    master_seed: u64,
    observables: &[Observable],
    opts: &EnsembleOptions,
) -> Result<Vec<(Vec<usize>, TrajectoryResult)>> {
    cfg.validate_structure()?;
    let ham = build(opts.kind, cfg)?;
    let jumps = JumpOperatorSet::from_config(cfg, ham.layout())?;
    (0..n_traj as u64)
        .into_par_iter()
        .map(|i| ensemble_member(cfg, ham.as_ref(), &jumps, internal, observables, opts, master_seed, i))
        .collect()
}

/// Thermal ensemble average of the observables. The result depends only on
/// the inputs, not on how rayon schedules the trajectories.
pub fn run_ensemble(
    cfg: &ChainConfig,
    internal: &Vector4<C64>,
    n_traj: usize,
    master_seed: u64,
    observables: &[Observable],
    opts: &EnsembleOptions,
) -> Result<EnsembleResult> {
    let runs = run_trajectories(cfg, internal, n_traj, master_seed, observables, opts)?;
    Ok(reduce(&runs, observables, opts, master_seed))
}

fn reduce(
    runs: &[(Vec<usize>, TrajectoryResult)],
    observables: &[Observable],
    opts: &EnsembleOptions,
    master_seed: u64,
) -> EnsembleResult {
    let n = runs.len();
    let nt = opts.grid.len();
    let mut mean = vec![vec![0.0; nt]; observables.len()];
    let mut stderr = vec![vec![0.0; nt]; observables.len()];
    for k in 0..observables.len() {
        for i in 0..nt {
            let m = neumaier(runs.iter().map(|(_, r)| r.samples[k][i])) / n.max(1) as f64;
            mean[k][i] = m;
            if n > 1 {
                let var = neumaier(runs.iter().map(|(_, r)| (r.samples[k][i] - m).powi(2))) / (n - 1) as f64;
                stderr[k][i] = (var / n as f64).sqrt();
            }
        }
    }
    EnsembleResult {
        times: opts.grid.clone(),
        names: observables.iter().map(|o| o.name.clone()).collect(),
        mean,
        stderr,
        n_traj: n,
        master_seed,
        jump_counts: runs.iter().map(|(_, r)| r.jumps.len()).collect(),
        initial_fock: runs.iter().map(|(f, _)| f.clone()).collect(),
        leakage: runs.iter().map(|(_, r)| r.leakage).collect(),
        flagged: runs.iter().map(|(_, r)| r.flagged).collect(),
    }
}
