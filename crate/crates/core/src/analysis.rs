//! Gate-level observables: Bell overlaps, concurrence, the carrier reference
//! evolution and parameter scans.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{integrate_schrodinger, uniform_grid, IntegratorOptions, Observable};
use crate::effective::{build_effective, ideal_internal_propagator};
use crate::error::Result;
use crate::hamiltonians::{build, dressed_frame_local, HamiltonianKind};
use crate::hilbert::{kets, partial_trace_internal, SpaceLayout, StateVector, ONE, ZERO};
use crate::model::{detuning_margin, lamb_dicke_margin, ChainConfig, LaserDrive, DEFAULT_DETUNING_FACTOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BellSign {
    Plus,
    Minus,
}

impl BellSign {
    pub fn ket(self) -> Vector4<C64> {
        match self {
            BellSign::Plus => kets::bell(1.0),
            BellSign::Minus => kets::bell(-1.0),
        }
    }
}

/// ⟨φ|ρ|φ⟩ for an internal density matrix.
pub fn expectation(rho: &Matrix4<C64>, phi: &Vector4<C64>) -> f64 {
    (phi.adjoint() * rho * phi)[(0, 0)].re
}

pub fn bell_overlap_rho(rho: &Matrix4<C64>, which: BellSign) -> f64 {
    expectation(rho, &which.ket()).clamp(0.0, 1.0)
}

/// ⟨β|ρ_int|β⟩ with ρ_int the reduced internal state of `psi`.
pub fn bell_overlap(psi: &StateVector, which: BellSign) -> f64 {
    bell_overlap_rho(&partial_trace_internal(psi), which)
}

/// (β₊ overlap, β₋ overlap).
pub fn bell_overlaps(psi: &StateVector) -> (f64, f64) {
    let rho = partial_trace_internal(psi);
    (bell_overlap_rho(&rho, BellSign::Plus), bell_overlap_rho(&rho, BellSign::Minus))
}

fn spin_flip() -> Matrix4<C64> {
    // σ_y ⊗ σ_y
    let mut m = Matrix4::from_element(ZERO);
    m[(0, 3)] = -ONE;
    m[(3, 0)] = -ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence(rho: &Matrix4<C64>) -> f64 {
    let herm = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut sqrt_rho = Matrix4::from_element(ZERO);
    for k in 0..4 {
        let v = eig.eigenvectors.column(k);
        let l = chop(eig.eigenvalues[k]).sqrt();
        sqrt_rho += v * v.adjoint() * C64::new(l, 0.0);
    }
    let yy = spin_flip();
    let tilde = yy * rho.conjugate() * yy;
    let m = sqrt_rho * tilde * sqrt_rho;
    let m = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut s: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().map(|&l| chop(l).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    (s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0)
}

// Round-off eigenvalues would otherwise contribute ~1e-8 after the square root.
fn chop(l: f64) -> f64 {
    if l < 64.0 * f64::EPSILON { 0.0 } else { l }
}

/// Concurrence |⟨ψ|σ_y⊗σ_y|ψ*⟩| of a pure two-qubit state.
pub fn concurrence_pure(psi: &Vector4<C64>) -> f64 {
    let n = psi.norm_squared();
    if n == 0.0 {
        return 0.0;
    }
    let c = (psi.adjoint() * spin_flip() * psi.conjugate())[(0, 0)].norm() / n;
    c.clamp(0.0, 1.0)
}

/// ∫₀ᵗ s(t′) dt′ for the drive's inversion schedule.
pub fn signed_time(drive: &LaserDrive, t: f64) -> f64 {
    let mut acc = 0.0;
    let mut prev = 0.0;
    for tb in drive.inversion_times(0.0, t).into_iter().chain(std::iter::once(t)) {
        acc += drive.echo_sign(0.5 * (prev + tb)) * (tb - prev);
        prev = tb;
    }
    acc
}

/// Internal-space propagator of the bare carrier, V†(t)V(0) when the echo is
/// off. Inverted intervals rotate backwards, so the accumulated angle is Ω
/// times the signed time.
pub fn reference_internal(cfg: &ChainConfig, t: f64) -> Matrix4<C64> {
    let theta = cfg.drive.omega * signed_time(&cfg.drive, t);
    let local = |phase: f64| -> Matrix2<C64> {
        dressed_frame_local(theta, 1.0, 1.0, phase).adjoint() * dressed_frame_local(0.0, 1.0, 1.0, phase)
    };
    local(cfg.drive.base_phases[0]).kronecker(&local(cfg.drive.base_phases[1]))
}

/// Applies the reference propagator to the internal factor of `psi0`.
pub fn reference_evolution(cfg: &ChainConfig, t: f64, psi0: &StateVector) -> StateVector {
    apply_internal(&reference_internal(cfg, t), psi0)
}

/// u ⊗ 1_motion acting on a full-space state.
pub fn apply_internal(u: &Matrix4<C64>, psi: &StateVector) -> StateVector {
    let layout = psi.layout();
    let m = layout.motional_dim();
    let src = psi.as_slice();
    let mut out = psi.clone();
    let dst = out.amplitudes_mut();
    for k in 0..m {
        for a in 0..4 {
            let mut acc = ZERO;
            for b in 0..4 {
                acc += u[(a, b)] * src[b * m + k];
            }
            dst[a * m + k] = acc;
        }
    }
    out
}

/// ⟨φ_ref(t)|ρ_int(t)|φ_ref(t)⟩, φ_ref(t) the reference evolution of the
/// internal input `phi0`. Insensitive to the motional state, so it survives
/// heating jumps.
pub fn reference_overlap(cfg: &ChainConfig, t: f64, phi0: &Vector4<C64>, psi: &StateVector) -> f64 {
    let target = reference_internal(cfg, t) * phi0;
    expectation(&partial_trace_internal(psi), &target).clamp(0.0, 1.0)
}

/// The standard observable set: both Bell overlaps, the reference overlap for
/// `phi0`, the |++⟩ and |−−⟩ populations and the top-Fock-level population.
pub fn standard_observables(cfg: &ChainConfig, phi0: &Vector4<C64>) -> Vec<Observable> {
    let pp = kets::pair(&kets::plus(), &kets::plus());
    let mm = kets::pair(&kets::minus(), &kets::minus());
    let c = cfg.clone();
    let phi0 = *phi0;
    vec![
        Observable::new("bell_plus", |_, psi| bell_overlap(psi, BellSign::Plus)),
        Observable::new("bell_minus", |_, psi| bell_overlap(psi, BellSign::Minus)),
        Observable::new("ref_overlap", move |t, psi| reference_overlap(&c, t, &phi0, psi)),
        Observable::new("pop_pp", move |_, psi| expectation(&partial_trace_internal(psi), &pp)),
        Observable::new("pop_mm", move |_, psi| expectation(&partial_trace_internal(psi), &mm)),
        Observable::new("leakage", |_, psi| psi.top_level_population()),
    ]
}

/// Internal input (|++⟩ + |−−⟩)/√2, insensitive to the gate's flip-flop term.
pub fn plus_plus_minus_minus() -> Vector4<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (kets::pair(&kets::plus(), &kets::plus()) + kets::pair(&kets::minus(), &kets::minus())) * C64::new(s, 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub omega: f64,
    pub eta: f64,
    /// ν₁τ₁; absent when the row is invalid or ω = 0.
    pub tau1: Option<f64>,
    pub margin: Option<f64>,
    pub pass: bool,
    pub valid: bool,
}

/// Gate time and detuning margin over an (Ω, η₁₁) grid for the two-ion
/// defaults. Rows are ordered Ω-major.
pub fn gate_time_scan(omegas: &[f64], etas: &[f64], factor: f64) -> Vec<ScanRow> {
    let points: Vec<(f64, f64)> = omegas.iter().flat_map(|&o| etas.iter().map(move |&e| (o, e))).collect();
    points
        .par_iter()
        .map(|&(omega, eta)| scan_point(omega, eta, factor))
        .collect()
}

fn scan_point(omega: f64, eta: f64, factor: f64) -> ScanRow {
    let invalid = ScanRow { omega, eta, tau1: None, margin: None, pass: false, valid: false };
    let mut cfg = match ChainConfig::two_ion_defaults(0.0, omega) {
        Ok(c) => c,
        Err(_) => return invalid,
    };
    let r = 3f64.powf(0.25);
    cfg.eta = [vec![eta, eta / r], vec![eta, -eta / r]];
    let margin = match detuning_margin(&cfg, factor) {
        Ok(m) => m,
        Err(_) => return invalid,
    };
    let tau1 = build_effective(&cfg).ok().and_then(|m| m.gate_time().ok());
    ScanRow {
        omega,
        eta,
        tau1,
        margin: Some(margin.min_ratio),
        pass: margin.pass && tau1.is_some(),
        valid: true,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EchoScanRow {
    pub freq: f64,
    pub min_ref_overlap: f64,
    pub final_ref_overlap: f64,
}

/// Deterministic (heating-free) evolution to `t_end` for each echo frequency,
/// reporting the minimum and final reference overlap for input `phi0 ⊗ |fock⟩`.
pub fn echo_frequency_scan(
    cfg: &ChainConfig,
    freqs: &[f64],
    phi0: &Vector4<C64>,
    fock: &[usize],
    kind: HamiltonianKind,
    t_end: f64,
    dt: f64,
) -> Result<Vec<EchoScanRow>> {
    freqs
        .par_iter()
        .map(|&f| {
            let c = cfg.clone().without_heating().with_echo(f);
            let ham = build(kind, &c)?;
            let psi0 = StateVector::product(ham.layout(), phi0, fock)?;
            let grid = uniform_grid(t_end, dt);
            let opts = IntegratorOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() };
            let states = integrate_schrodinger(ham.as_ref(), &psi0, &grid, &opts)?;
            let overlaps: Vec<f64> =
                grid.iter().zip(&states).map(|(&t, s)| reference_overlap(&c, t, phi0, s)).collect();
            Ok(EchoScanRow {
                freq: f,
                min_ref_overlap: overlaps.iter().copied().fold(f64::INFINITY, f64::min),
                final_ref_overlap: *overlaps.last().unwrap(),
            })
        })
        .collect()
}

/// The four standard-basis inputs |ee⟩, |eg⟩, |ge⟩, |gg⟩.
pub fn basis_inputs() -> [Vector4<C64>; 4] {
    std::array::from_fn(|k| {
        let mut v = Vector4::from_element(ZERO);
        v[k] = ONE;
        v
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulatedGate {
    pub kind: String,
    pub fock: Vec<usize>,
    pub times: Vec<f64>,
    pub bell_plus: Vec<f64>,
    pub bell_minus: Vec<f64>,
    /// max over β± at the grid point nearest τ₁.
    pub overlap_at_tau1: f64,
    /// Best overlap over the run and where it occurs.
    pub peak_overlap: f64,
    pub peak_time: f64,
    /// Concurrences of the reduced internal states at 2τ₁ for the basis inputs.
    pub concurrences: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateReport {
    pub tau1: f64,
    pub omega_gate: f64,
    /// Ideal-propagator concurrences at 2τ₁ for |ee⟩, |eg⟩, |ge⟩, |gg⟩.
    pub ideal_concurrences: [f64; 4],
    pub min_ideal_concurrence: f64,
    pub ld_margins: Vec<f64>,
    pub detuning_min_ratio: f64,
    pub detuning_binding_mode: usize,
    pub simulated: Option<SimulatedGate>,
}

/// Ideal-propagator entangling check at 2τ₁ plus validity margins.
pub fn cnot_equivalence_report(cfg: &ChainConfig) -> Result<GateReport> {
    let model = build_effective(cfg)?;
    let tau1 = model.gate_time()?;
    let u = ideal_internal_propagator(cfg, 2.0 * tau1, cfg.drive.echo_enabled())?;
    let conc = basis_inputs().map(|v| concurrence_pure(&(u * v)));
    let dm = detuning_margin(cfg, DEFAULT_DETUNING_FACTOR)?;
    Ok(GateReport {
        tau1,
        omega_gate: model.omega_gate,
        ideal_concurrences: conc,
        min_ideal_concurrence: conc.iter().copied().fold(1.0, f64::min),
        ld_margins: lamb_dicke_margin(cfg),
        detuning_min_ratio: dm.min_ratio,
        detuning_binding_mode: dm.binding.0,
        simulated: None,
    })
}

/// Heating-free simulation of the gate from |+−⟩ ⊗ |fock⟩ up to 2τ₁ on a grid
/// of spacing `dt`, plus the basis-input concurrences at 2τ₁.
pub fn simulate_gate(cfg: &ChainConfig, kind: HamiltonianKind, fock: &[usize], dt: f64) -> Result<SimulatedGate> {
    let c = cfg.clone().without_heating();
    let tau1 = build_effective(&c)?.gate_time()?;
    let ham = build(kind, &c)?;
    let layout: SpaceLayout = ham.layout().clone();
    // 2τ₁ spans ~1500 carrier cycles; the default tolerance drifts past the norm guard
    let opts = IntegratorOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() };
    let t_end = 2.0 * tau1;
    let grid = uniform_grid(t_end, dt);
    let pm = kets::pair(&kets::plus(), &kets::minus());
    let states = integrate_schrodinger(ham.as_ref(), &StateVector::product(&layout, &pm, fock)?, &grid, &opts)?;
    let (bp, bm): (Vec<f64>, Vec<f64>) = states.iter().map(bell_overlaps).unzip();
    let near = grid
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - tau1).abs().total_cmp(&(b.1 - tau1).abs()))
        .map(|(i, _)| i)
        .unwrap();
    let (mut peak, mut peak_time) = (0.0, 0.0);
    for (i, &t) in grid.iter().enumerate() {
        let v = bp[i].max(bm[i]);
        if v > peak {
            peak = v;
            peak_time = t;
        }
    }
    let mut concurrences = [0.0; 4];
    for (k, v) in basis_inputs().iter().enumerate() {
        let psi0 = StateVector::product(&layout, v, fock)?;
        let out = integrate_schrodinger(ham.as_ref(), &psi0, &[0.0, t_end], &opts)?;
        concurrences[k] = concurrence(&partial_trace_internal(&out[1]));
    }
    Ok(SimulatedGate {
        kind: format!("{kind:?}").to_lowercase(),
        fock: fock.to_vec(),
        overlap_at_tau1: bp[near].max(bm[near]),
        peak_overlap: peak,
        peak_time,
        times: grid,
        bell_plus: bp,
        bell_minus: bm,
        concurrences,
    })
}

/// Index of the first point that is the largest value within `window` samples
/// on either side and at least `floor`. The window suppresses sampling noise
/// on ensemble curves.
pub fn first_maximum(curve: &[f64], floor: f64, window: usize) -> Option<usize> {
    (0..curve.len()).find(|&i| {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(curve.len());
        curve[i] >= floor && i + window < curve.len() && curve[lo..hi].iter().all(|&v| v <= curve[i])
    })
}
