//! Monte Carlo wavefunction trajectories with motional heating.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::integrator::{stop_times, Dopri5, IntegratorOptions};
use crate::error::{Error, Result};
use crate::hamiltonians::Hamiltonian;
use crate::hilbert::{annihilator, creator, SparseOperator, SpaceLayout, StateVector, I, ZERO};
use crate::model::ChainConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpDirection {
    /// √(Γ n̄) a
    Lowering,
    /// √(Γ (n̄+1)) a†
    Raising,
}

impl fmt::Display for JumpDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JumpDirection::Lowering => "lowering",
            JumpDirection::Raising => "raising",
        })
    }
}

#[derive(Clone, Debug)]
pub struct JumpOperator {
    pub mode: usize,
    pub direction: JumpDirection,
    pub rate: f64,
    /// √rate times the ladder operator, on the full space.
    pub op: SparseOperator,
}

/// Heating jump operators together with the diagonal of Σ C†C.
#[derive(Clone, Debug)]
pub struct JumpOperatorSet {
    ops: Vec<JumpOperator>,
    decay: Vec<f64>,
}

impl JumpOperatorSet {
    pub fn from_config(cfg: &ChainConfig, layout: &SpaceLayout) -> Result<Self> {
        if layout.mode_count() != cfg.mode_count() {
            return Err(Error::DimensionMismatch {
                expected: cfg.mode_count(),
                found: layout.mode_count(),
            });
        }
        let mut ops = Vec::new();
        for (p, m) in cfg.modes.iter().enumerate() {
            if m.gamma <= 0.0 {
                continue;
            }
            let down = m.gamma * m.nbar;
            let up = m.gamma * (m.nbar + 1.0);
            if down > 0.0 {
                let a = annihilator(p, layout)?.scale(C64::new(down.sqrt(), 0.0));
                ops.push(JumpOperator {
                    mode: p,
                    direction: JumpDirection::Lowering,
                    rate: down,
                    op: SparseOperator::from_operator(&a),
                });
            }
            let ad = creator(p, layout)?.scale(C64::new(up.sqrt(), 0.0));
            ops.push(JumpOperator {
                mode: p,
                direction: JumpDirection::Raising,
                rate: up,
                op: SparseOperator::from_operator(&ad),
            });
        }
        Ok(Self::from_operators(layout.total_dim(), ops))
    }

    /// Every ladder operator has at most one entry per column, so Σ C†C is
    /// diagonal with entries equal to the squared column norms.
    fn from_operators(dim: usize, ops: Vec<JumpOperator>) -> Self {
        let mut decay = vec![0.0; dim];
        for j in &ops {
            let dense = j.op.to_dense();
            for c in 0..dim {
                decay[c] += dense.column(c).iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
        }
        Self { ops, decay }
    }

    pub fn none(dim: usize) -> Self {
        Self { ops: Vec::new(), decay: vec![0.0; dim] }
    }

    pub fn operators(&self) -> &[JumpOperator] {
        &self.ops
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Diagonal of Σ_k C_k†C_k.
    pub fn decay_diagonal(&self) -> &[f64] {
        &self.decay
    }
}

/// A named scalar function of (t, normalized state).
#[derive(Clone)]
pub struct Observable {
    pub name: String,
    f: Arc<dyn Fn(f64, &StateVector) -> f64 + Send + Sync>,
}

impl Observable {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, &StateVector) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, t: f64, psi: &StateVector) -> f64 {
        (self.f)(t, psi)
    }
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observable({})", self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpRecord {
    pub time: f64,
    pub mode: usize,
    pub direction: JumpDirection,
}

#[derive(Clone, Debug)]
pub struct TrajectoryOptions {
    pub integrator: IntegratorOptions,
    /// Bisection tolerance on jump times.
    pub jump_tolerance: f64,
    /// Top-Fock-level population above which the run is flagged.
    pub leakage_threshold: f64,
    /// Keep the normalized state at each grid time.
    pub keep_states: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        let integrator = IntegratorOptions { norm_tol: None, ..IntegratorOptions::default() };
        Self {
            integrator,
            jump_tolerance: 1e-3,
            leakage_threshold: 1e-3,
            keep_states: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    /// samples[k][i]: observable k at times[i].
    pub samples: Vec<Vec<f64>>,
    pub jumps: Vec<JumpRecord>,
    /// Largest top-Fock-level population seen.
    pub leakage: f64,
    pub flagged: bool,
    pub seed: u64,
    pub stream: u64,
    pub states: Vec<StateVector>,
}

/// Seed a trajectory stream: ChaCha8 keyed by the master seed, with the
/// trajectory index selecting the stream.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            return r;
        }
    }
}

fn norm_sq(y: &[C64]) -> f64 {
    y.iter().map(|a| a.norm_sqr()).sum()
}

/// One quantum-jump trajectory with a caller-supplied generator.
///
/// The unnormalized state evolves under H − (i/2)Σ C†C until its squared norm
/// reaches a pre-drawn uniform r; the crossing is located by bisection and a
/// jump chosen with probability ∝ ‖C_k ψ‖² is applied.
pub fn mcwf_trajectory_with<R: Rng + ?Sized>(
    ham: &dyn Hamiltonian,
    psi0: &StateVector,
    jumps: &JumpOperatorSet,
    grid: &[f64],
    observables: &[Observable],
    opts: &TrajectoryOptions,
    rng: &mut R,
) -> Result<TrajectoryResult> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("time grid must be non-empty and increasing".into()));
    }
    let layout = psi0.layout().clone();
    let dim = layout.total_dim();
    if jumps.decay.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: jumps.decay.len() });
    }
    let decay = &jumps.decay;
    let drive = ham.drive().clone();
    let mut y: Vec<C64> = psi0.normalized().as_slice().to_vec();
    let mut stepper = Dopri5::new(dim, opts.integrator.clone());
    let mut probe = vec![ZERO; dim];
    let mut scratch = vec![ZERO; dim];

    let mut res = TrajectoryResult {
        times: grid.to_vec(),
        samples: vec![Vec::with_capacity(grid.len()); observables.len()],
        jumps: Vec::new(),
        leakage: 0.0,
        flagged: false,
        seed: 0,
        stream: 0,
        states: Vec::new(),
    };
    let mut r = open_unit(rng);
    let stops = stop_times(grid, ham, opts.integrator.respect_breakpoints);
    let mut t = stops[0].0;

    let record = |y: &[C64], t: f64, res: &mut TrajectoryResult| -> Result<()> {
        let mut psi = StateVector::new(layout.clone(), DVector::from_column_slice(y))?;
        psi.normalize();
        res.leakage = res.leakage.max(psi.top_level_population().clamp(0.0, 1.0));
        for (k, o) in observables.iter().enumerate() {
            res.samples[k].push(o.eval(t, &psi));
        }
        if opts.keep_states {
            res.states.push(psi);
        }
        Ok(())
    };

    for &(stop, is_output) in &stops {
        if stop > t {
            let sign = drive.echo_sign(0.5 * (t + stop));
            let respect = opts.integrator.respect_breakpoints;
            let mut f = |tt: f64, x: &[C64], dx: &mut [C64]| {
                if respect {
                    ham.apply_signed(tt, sign, x, dx);
                } else {
                    ham.apply(tt, x, dx);
                }
                for ((d, xi), g) in dx.iter_mut().zip(x).zip(decay) {
                    *d = -I * *d - *xi * (0.5 * g);
                }
            };
            stepper.reset();
            let eps = 1e-14 * stop.abs().max(1.0);
            while stop - t > eps {
                let h = stepper.try_step(&mut f, t, stop - t, &y)?;
                if norm_sq(stepper.proposed()) > r {
                    stepper.commit(&mut y);
                    t = if stop - (t + h) <= eps { stop } else { t + h };
                    continue;
                }
                // bisection on the crossing ‖ψ‖² = r within [t, t + h]
                let (mut lo, mut hi) = (0.0, h);
                probe.copy_from_slice(stepper.proposed());
                while hi - lo > opts.jump_tolerance {
                    let mid = 0.5 * (lo + hi);
                    stepper.plain_step(&mut f, t, mid, &y, &mut scratch);
                    if norm_sq(&scratch) < r {
                        hi = mid;
                        probe.copy_from_slice(&scratch);
                    } else {
                        lo = mid;
                    }
                }
                let t_jump = t + hi;
                y.copy_from_slice(&probe);
                stepper.reset();

                let weights: Vec<f64> = jumps
                    .ops
                    .iter()
                    .map(|j| norm_sq(&j.op.apply(&y)))
                    .collect();
                let total: f64 = weights.iter().sum();
                if total > 0.0 {
                    let mut pick = rng.random::<f64>() * total;
                    let mut chosen = weights.len() - 1;
                    for (k, w) in weights.iter().enumerate() {
                        if pick < *w {
                            chosen = k;
                            break;
                        }
                        pick -= w;
                    }
                    let jop = &jumps.ops[chosen];
                    y = jop.op.apply(&y);
                    let n = norm_sq(&y).sqrt();
                    y.iter_mut().for_each(|a| *a /= n);
                    if res.jumps.last().is_none_or(|last| t_jump > last.time) {
                        res.jumps.push(JumpRecord { time: t_jump, mode: jop.mode, direction: jop.direction });
                    } else {
                        // two jumps inside one tolerance window; keep times strictly increasing
                        let prev = res.jumps.last().unwrap().time;
                        res.jumps.push(JumpRecord {
                            time: prev + f64::EPSILON * prev.abs().max(1.0),
                            mode: jop.mode,
                            direction: jop.direction,
                        });
                    }
                    let top = StateVector::new(layout.clone(), DVector::from_column_slice(&y))?.top_level_population();
                    res.leakage = res.leakage.max(top.clamp(0.0, 1.0));
                } else {
                    let n = norm_sq(&y).sqrt();
                    y.iter_mut().for_each(|a| *a /= n);
                }
                r = open_unit(rng);
                t = t_jump.min(stop);
            }
            t = stop;
        }
        if is_output {
            record(&y, stop, &mut res)?;
        }
    }
    res.flagged = res.leakage > opts.leakage_threshold;
    Ok(res)
}

/// One trajectory drawn from the stream `trajectory_rng(seed, 0)`.
pub fn mcwf_trajectory(
    ham: &dyn Hamiltonian,
    psi0: &StateVector,
    jumps: &JumpOperatorSet,
    grid: &[f64],
    observables: &[Observable],
    opts: &TrajectoryOptions,
    seed: u64,
) -> Result<TrajectoryResult> {
    let mut rng = trajectory_rng(seed, 0);
    let mut res = mcwf_trajectory_with(ham, psi0, jumps, grid, observables, opts, &mut rng)?;
    res.seed = seed;
    Ok(res)
}
