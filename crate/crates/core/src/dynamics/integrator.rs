//! Time stepping for linear complex ODEs dψ/dt = K(t) ψ.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonians::Hamiltonian;
use crate::hilbert::{StateVector, I, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Allowed |‖ψ‖ − 1| for unitary evolution; `None` disables the check.
    pub norm_tol: Option<f64>,
    /// Stop and restart at every phase inversion. Turning this off lets steps
    /// straddle the discontinuities and exists only as a regression guard.
    pub respect_breakpoints: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: 1e-2,
            h_min: 1e-12,
            h_max: 0.5,
            norm_tol: Some(1e-6),
            respect_breakpoints: true,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Counters for one integration call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Adaptive Dormand–Prince integrator with reusable stage storage.
pub struct Dopri5 {
    pub opts: IntegratorOptions,
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    ynew: Vec<C64>,
    /// Suggested size of the next step.
    pub h: f64,
    fsal_valid: bool,
    pub stats: StepStats,
}

impl Dopri5 {
    pub fn new(dim: usize, opts: IntegratorOptions) -> Self {
        let h = opts.h_init;
        Self {
            k: std::array::from_fn(|_| vec![ZERO; dim]),
            ytmp: vec![ZERO; dim],
            ynew: vec![ZERO; dim],
            h,
            fsal_valid: false,
            stats: StepStats::default(),
            opts,
        }
    }

    /// Forget the cached derivative; required after the right-hand side changes
    /// discontinuously or the state is modified externally.
    pub fn reset(&mut self) {
        self.fsal_valid = false;
    }

    fn stages<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[C64])
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        if !self.fsal_valid {
            f(t, y, &mut self.k[0]);
        }
        for s in 1..7 {
            for i in 0..y.len() {
                let mut acc = ZERO;
                for (r, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += self.k[r][i] * *a;
                    }
                }
                self.ytmp[i] = y[i] + acc * h;
            }
            f(t + C[s] * h, &self.ytmp, &mut self.k[s]);
            if s == 6 {
                self.ynew.copy_from_slice(&self.ytmp);
            }
        }
    }

    fn error_norm(&self, h: f64, y: &[C64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..y.len() {
            let mut err = ZERO;
            for (s, e) in E.iter().enumerate() {
                if *e != 0.0 {
                    err += self.k[s][i] * *e;
                }
            }
            let sc = self.opts.atol + self.opts.rtol * y[i].norm().max(self.ynew[i].norm());
            acc += (err.norm() * h / sc).powi(2);
        }
        (acc / y.len() as f64).sqrt()
    }

    /// One accepted step of size at most `h_cap`; returns the step taken and
    /// leaves the proposed state in `self.proposed()` without touching `y`.
    pub fn try_step<F>(&mut self, f: &mut F, t: f64, h_cap: f64, y: &[C64]) -> Result<f64>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        loop {
            let free = self.h.min(self.opts.h_max);
            let h = free.min(h_cap);
            if h < self.opts.h_min && h < h_cap {
                return Err(Error::StepUnderflow { t, h });
            }
            self.stages(f, t, h, y);
            let err = self.error_norm(h, y);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 || h <= self.opts.h_min {
                self.stats.accepted += 1;
                // a step clipped by h_cap says little about the natural size
                if h == free || fac < 1.0 {
                    self.h = h * fac;
                }
                return Ok(h);
            }
            self.stats.rejected += 1;
            self.fsal_valid = true;
            self.h = h * fac;
        }
    }

    /// State produced by the last `try_step`.
    pub fn proposed(&self) -> &[C64] {
        &self.ynew
    }

    /// Commit the last proposal into `y`, enabling first-same-as-last reuse.
    pub fn commit(&mut self, y: &mut [C64]) {
        y.copy_from_slice(&self.ynew);
        self.k.swap(0, 6);
        self.fsal_valid = true;
    }

    /// Single 5th-order step of exactly `h` without error control, into `out`.
    pub fn plain_step<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[C64], out: &mut [C64])
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        self.fsal_valid = false;
        self.stages(f, t, h, y);
        out.copy_from_slice(&self.ynew);
    }

    /// Integrate `y` from `t0` to `t1` exactly.
    pub fn advance<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut [C64]) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let mut t = t0;
        while t1 - t > 1e-14 * t1.abs().max(1.0) {
            let h = self.try_step(f, t, t1 - t, y)?;
            self.commit(y);
            t = if t1 - (t + h) <= 1e-14 * t1.abs().max(1.0) { t1 } else { t + h };
        }
        Ok(())
    }
}

/// Sorted union of output times and interior phase-inversion times.
pub(crate) fn stop_times(grid: &[f64], ham: &dyn Hamiltonian, respect_breakpoints: bool) -> Vec<(f64, bool)> {
    let mut stops: Vec<(f64, bool)> = grid.iter().map(|&t| (t, true)).collect();
    if respect_breakpoints && grid.len() > 1 {
        let (t0, t1) = (grid[0], grid[grid.len() - 1]);
        for tb in ham.drive().inversion_times(t0, t1) {
            if !grid.iter().any(|&g| (g - tb).abs() <= 1e-12 * tb.abs().max(1.0)) {
                stops.push((tb, false));
            }
        }
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));
    stops
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(Error::InvalidConfig("time grid must be non-empty, increasing and non-negative".into()));
    }
    Ok(())
}

/// Uniform grid 0, dt, 2dt, … up to and including `t_max`.
pub fn uniform_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt + 1e-9).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    if t_max - g[n] > 1e-9 * dt {
        g.push(t_max);
    }
    g
}

/// Schrödinger evolution under `ham`, returning the state at every grid time.
///
/// Steps never straddle a phase inversion: each inversion time is a mandatory
/// stop and the drive sign is held fixed between stops.
pub fn integrate_schrodinger(
    ham: &dyn Hamiltonian,
    psi0: &StateVector,
    grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<StateVector>> {
    check_grid(grid)?;
    let layout = psi0.layout().clone();
    let mut y: Vec<C64> = psi0.as_slice().to_vec();
    let mut stepper = Dopri5::new(y.len(), opts.clone());
    let mut out = Vec::with_capacity(grid.len());
    let stops = stop_times(grid, ham, opts.respect_breakpoints);
    let drive = ham.drive().clone();
    let mut prev = stops[0].0;
    let norm0 = psi0.norm_squared().sqrt();
    for &(t, is_output) in &stops {
        if t > prev {
            if opts.respect_breakpoints {
                let sign = drive.echo_sign(0.5 * (prev + t));
                let mut f = |tt: f64, x: &[C64], dx: &mut [C64]| {
                    ham.apply_signed(tt, sign, x, dx);
                    dx.iter_mut().for_each(|v| *v *= -I);
                };
                stepper.reset();
                stepper.advance(&mut f, prev, t, &mut y)?;
            } else {
                let mut f = |tt: f64, x: &[C64], dx: &mut [C64]| {
                    ham.apply(tt, x, dx);
                    dx.iter_mut().for_each(|v| *v *= -I);
                };
                stepper.advance(&mut f, prev, t, &mut y)?;
            }
            prev = t;
        }
        if let Some(tol) = opts.norm_tol {
            let n: f64 = y.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if (n - norm0).abs() > tol {
                return Err(Error::NormDrift { t, drift: n - norm0 });
            }
        }
        if is_output {
            out.push(StateVector::new(layout.clone(), nalgebra::DVector::from_column_slice(&y))?);
        }
    }
    Ok(out)
}

/// exp(−i H dt) ψ by a Taylor series summed to machine precision.
fn exp_apply(ham: &dyn Hamiltonian, t: f64, sign: f64, dt: f64, psi: &mut [C64], term: &mut Vec<C64>, tmp: &mut Vec<C64>) {
    term.copy_from_slice(psi);
    for k in 1..60 {
        ham.apply_signed(t, sign, term, tmp);
        let c = -I * (dt / k as f64);
        let mut norm = 0.0;
        for (a, b) in term.iter_mut().zip(tmp.iter()) {
            *a = *b * c;
            norm += a.norm_sqr();
        }
        for (p, a) in psi.iter_mut().zip(term.iter()) {
            *p += *a;
        }
        if norm < 1e-34 {
            break;
        }
    }
}

/// Fixed-step exponential midpoint integration: on each step of length `dt` the
/// Hamiltonian is frozen at the step midpoint and exponentiated exactly.
/// Serves as an independent check of the adaptive integrator.
pub fn integrate_piecewise_exponential(
    ham: &dyn Hamiltonian,
    psi0: &StateVector,
    grid: &[f64],
    dt: f64,
) -> Result<Vec<StateVector>> {
    check_grid(grid)?;
    let layout = psi0.layout().clone();
    let mut y: Vec<C64> = psi0.as_slice().to_vec();
    let mut term = vec![ZERO; y.len()];
    let mut tmp = vec![ZERO; y.len()];
    let drive = ham.drive().clone();
    let stops = stop_times(grid, ham, true);
    let mut out = Vec::with_capacity(grid.len());
    let mut prev = stops[0].0;
    for &(t, is_output) in &stops {
        if t > prev {
            let sign = drive.echo_sign(0.5 * (prev + t));
            let n = ((t - prev) / dt).ceil().max(1.0) as usize;
            let h = (t - prev) / n as f64;
            for k in 0..n {
                let mid = prev + (k as f64 + 0.5) * h;
                exp_apply(ham, mid, sign, h, &mut y, &mut term, &mut tmp);
            }
            prev = t;
        }
        if is_output {
            out.push(StateVector::new(layout.clone(), nalgebra::DVector::from_column_slice(&y))?);
        }
    }
    Ok(out)
}
