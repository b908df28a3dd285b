//! Time-averaged effective model of the gate in the dressed picture.
//!
//! In the dressed basis (internal index 0 = |e′e′⟩, 1 = |e′g′⟩, 2 = |g′e′⟩,
//! 3 = |g′g′⟩) the effective Hamiltonian is
//!
//! ```text
//! H′_eff = −ω (|e′g′⟩⟨g′e′| + h.c.) + Σ_p b_p B′_p
//! B′_p   = (n_p + ½) [ S_p (|g′g′⟩⟨g′g′| − |e′e′⟩⟨e′e′|) + D_p (|g′e′⟩⟨g′e′| − |e′g′⟩⟨e′g′|) ]
//! ```
//!
//! with S_p = η₁p² + η₂p², D_p = η₁p² − η₂p² and b_p = Ω³ / (2(Ω² − ν_p²)).
//! The constant energy offsets of the commutators are dropped.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonians::dressed_frame_local;
use crate::hilbert::{OperatorMatrix, SpaceLayout};
use crate::model::{detuning_margin, is_resonant, ChainConfig, DetuningMargin, DEFAULT_DETUNING_FACTOR};

const EG: usize = 1;
const GE: usize = 2;
const EE: usize = 0;
const GG: usize = 3;

/// Per-mode combinations of the two illuminated ions' couplings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaSums {
    /// η₁p² + η₂p²
    pub sum_sq: f64,
    /// η₁p² − η₂p²
    pub diff_sq: f64,
    /// η₁p η₂p
    pub product: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveModel {
    pub rabi: f64,
    /// Gate frequency ω.
    pub omega_gate: f64,
    /// Δ_p = Ω − ν_p.
    pub delta: Vec<f64>,
    /// γ_p = Ω + ν_p.
    pub gamma_sum: Vec<f64>,
    /// Mode-resolved contributions to ω; they sum to `omega_gate`.
    pub a_coeff: Vec<f64>,
    /// b_p = Ω³ / (2(Ω² − ν_p²)).
    pub b_coeff: Vec<f64>,
    pub eta_sums: Vec<EtaSums>,
    /// Detuning condition at the default factor; the model is built regardless.
    pub validity: DetuningMargin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Motion-dependent B′ terms dropped.
    Ideal,
    /// B′ terms kept (diagonal in the Fock occupations).
    WithB,
}

pub fn build_effective(cfg: &ChainConfig) -> Result<EffectiveModel> {
    cfg.validate_structure()?;
    let validity = detuning_margin(cfg, DEFAULT_DETUNING_FACTOR)?;
    let omega = cfg.drive.omega;
    let mut model = EffectiveModel {
        rabi: omega,
        omega_gate: 0.0,
        delta: Vec::new(),
        gamma_sum: Vec::new(),
        a_coeff: Vec::new(),
        b_coeff: Vec::new(),
        eta_sums: Vec::new(),
        validity,
    };
    for (p, mode) in cfg.modes.iter().enumerate() {
        let (e1, e2) = (cfg.eta[0][p], cfg.eta[1][p]);
        let delta = omega - mode.nu;
        let gamma = omega + mode.nu;
        let sums = EtaSums {
            sum_sq: e1 * e1 + e2 * e2,
            diff_sq: e1 * e1 - e2 * e2,
            product: e1 * e2,
        };
        // The 1/Δ channel contributes (B′ − A′)/Δ and the 1/γ channel (B′ + A′)/γ,
        // both weighted by Ω²/4. The A′ weight is −ω_p.
        let quarter = omega * omega / 4.0;
        let a_weight = quarter * (-1.0 / delta + 1.0 / gamma);
        let b_weight = quarter * (1.0 / delta + 1.0 / gamma);
        model.a_coeff.push(-a_weight * sums.product);
        model.b_coeff.push(b_weight);
        model.delta.push(delta);
        model.gamma_sum.push(gamma);
        model.eta_sums.push(sums);
    }
    model.omega_gate = model.a_coeff.iter().sum();
    Ok(model)
}

/// ω = (Ω²/2) Σ_p η₁p η₂p ν_p / (Ω² − ν_p²).
pub fn gate_frequency(cfg: &ChainConfig) -> Result<f64> {
    let omega = cfg.drive.omega;
    let mut acc = 0.0;
    for (p, mode) in cfg.modes.iter().enumerate() {
        if is_resonant(omega, mode.nu) {
            return Err(Error::Resonance { mode: p, nu: mode.nu });
        }
        acc += cfg.eta[0][p] * cfg.eta[1][p] * mode.nu / (omega * omega - mode.nu * mode.nu);
    }
    Ok(0.5 * omega * omega * acc)
}

/// τ₁ = |π / 4ω|, the Bell-state creation time.
pub fn gate_time(cfg: &ChainConfig) -> Result<f64> {
    let w = gate_frequency(cfg)?;
    if w == 0.0 {
        return Err(Error::ZeroGateFrequency);
    }
    Ok((std::f64::consts::PI / (4.0 * w)).abs())
}

impl EffectiveModel {
    /// ω recomputed from the stored η combinations.
    pub fn closed_form_omega(&self, nu: &[f64]) -> f64 {
        let o2 = self.rabi * self.rabi;
        0.5 * o2
            * self
                .eta_sums
                .iter()
                .zip(nu)
                .map(|(s, &n)| s.product * n / (o2 - n * n))
                .sum::<f64>()
    }

    pub fn gate_time(&self) -> Result<f64> {
        if self.omega_gate == 0.0 {
            return Err(Error::ZeroGateFrequency);
        }
        Ok((std::f64::consts::PI / (4.0 * self.omega_gate)).abs())
    }

    /// Dressed-picture block Hamiltonian for one Fock occupation vector.
    ///
    /// `sign = −1` is the inverted-phase interval: Ω → −Ω leaves ω unchanged
    /// and flips every b_p, which is the same as interchanging |e′⟩ and |g′⟩.
    pub fn block_hamiltonian(&self, occupations: &[usize], variant: Variant, sign: f64) -> Matrix4<C64> {
        let mut h = Matrix4::<C64>::zeros();
        h[(EG, GE)] = C64::new(-self.omega_gate, 0.0);
        h[(GE, EG)] = C64::new(-self.omega_gate, 0.0);
        if variant == Variant::WithB {
            for (p, &n) in occupations.iter().enumerate() {
                let w = sign * self.b_coeff[p] * (n as f64 + 0.5);
                let s = self.eta_sums[p];
                h[(GG, GG)] += w * s.sum_sq;
                h[(EE, EE)] -= w * s.sum_sq;
                h[(GE, GE)] += w * s.diff_sq;
                h[(EG, EG)] -= w * s.diff_sq;
            }
        }
        h
    }

    /// Energy of |g′g′⟩ from the B′ terms, Σ_p b_p S_p (n_p + ½).
    pub fn b_shift(&self, occupations: &[usize]) -> f64 {
        occupations
            .iter()
            .enumerate()
            .map(|(p, &n)| self.b_coeff[p] * self.eta_sums[p].sum_sq * (n as f64 + 0.5))
            .sum()
    }
}

fn expm_hermitian(h: &Matrix4<C64>, t: f64) -> Matrix4<C64> {
    // exp(−i t H)
    let eig = SymmetricEigen::new(*h);
    let q = eig.eigenvectors;
    let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * t)));
    q * d * q.adjoint()
}

fn frame_pair(t: f64, sign: f64, cfg: &ChainConfig) -> Matrix4<C64> {
    let v1 = dressed_frame_local(t, sign, cfg.drive.omega, cfg.drive.base_phases[0]);
    let v2 = dressed_frame_local(t, sign, cfg.drive.omega, cfg.drive.base_phases[1]);
    kron2(&v1, &v2)
}

fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Piecewise-constant drive signs over [0, t].
fn segments(cfg: &ChainConfig, t: f64, echo: bool) -> Vec<(f64, f64, f64)> {
    if !echo || !cfg.drive.echo_enabled() {
        return vec![(0.0, t, 1.0)];
    }
    let mut cuts = vec![0.0];
    cuts.extend(cfg.drive.inversion_times(0.0, t));
    cuts.push(t);
    cuts.windows(2)
        .map(|w| (w[0], w[1], cfg.drive.echo_sign(0.5 * (w[0] + w[1]))))
        .filter(|(a, b, _)| b > a)
        .collect()
}

/// Standard-picture internal propagator for one Fock block,
/// U = Π_k V_{s_k}†(t_{k+1}) exp(−i(t_{k+1} − t_k) H′_{s_k}) V_{s_k}(t_k).
pub fn block_propagator(
    model: &EffectiveModel,
    cfg: &ChainConfig,
    t: f64,
    occupations: &[usize],
    variant: Variant,
    echo: bool,
) -> Matrix4<C64> {
    let mut u = Matrix4::<C64>::identity();
    for (a, b, s) in segments(cfg, t, echo) {
        let h = model.block_hamiltonian(occupations, variant, s);
        let step = frame_pair(b, s, cfg).adjoint() * expm_hermitian(&h, b - a) * frame_pair(a, s, cfg);
        u = step * u;
    }
    u
}

/// Effective propagator on the full space of `cfg.layout()`.
pub fn effective_propagator(t: f64, cfg: &ChainConfig, variant: Variant, echo: bool) -> Result<OperatorMatrix> {
    let model = build_effective(cfg)?;
    let layout = cfg.layout();
    Ok(effective_propagator_with(&model, cfg, &layout, t, variant, echo))
}

pub fn effective_propagator_with(
    model: &EffectiveModel,
    cfg: &ChainConfig,
    layout: &SpaceLayout,
    t: f64,
    variant: Variant,
    echo: bool,
) -> OperatorMatrix {
    let m_dim = layout.motional_dim();
    let dim = layout.total_dim();
    let mut full = DMatrix::<C64>::zeros(dim, dim);
    let ideal = (variant == Variant::Ideal).then(|| block_propagator(model, cfg, t, &[], variant, echo));
    for m in 0..m_dim {
        let u = match &ideal {
            Some(u) => *u,
            None => block_propagator(model, cfg, t, &layout.fock_numbers(m), variant, echo),
        };
        for r in 0..4 {
            for c in 0..4 {
                full[(r * m_dim + m, c * m_dim + m)] = u[(r, c)];
            }
        }
    }
    OperatorMatrix::new(layout.clone(), full).expect("dimensions match layout")
}

/// min_φ ‖A − e^{iφ} B‖_max, with φ = arg tr(B†A).
pub fn phase_insensitive_distance(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    let tr = (b.adjoint() * a).trace();
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { C64::new(1.0, 0.0) };
    (a - b * phase).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EchoResidual {
    pub duration: f64,
    /// (occupations, residual) for every Fock block of the layout.
    pub blocks: Vec<(Vec<usize>, f64)>,
    pub max: f64,
}

/// Distance between the B-including and ideal evolutions after `t`, per Fock block.
pub fn echo_residual(cfg: &ChainConfig, t: f64, echo: bool) -> Result<EchoResidual> {
    let model = build_effective(cfg)?;
    let layout = cfg.layout();
    let ideal = block_propagator(&model, cfg, t, &[], Variant::Ideal, echo);
    let blocks: Vec<(Vec<usize>, f64)> = (0..layout.motional_dim())
        .map(|m| {
            let occ = layout.fock_numbers(m);
            let with_b = block_propagator(&model, cfg, t, &occ, Variant::WithB, echo);
            let r = phase_insensitive_distance(&with_b, &ideal);
            (occ, r)
        })
        .collect();
    let max = blocks.iter().map(|b| b.1).fold(0.0, f64::max);
    Ok(EchoResidual {
        duration: t,
        blocks,
        max,
    })
}

/// Residual of the B′ terms after one inversion pair (duration 2/F).
pub fn echo_cancellation_check(cfg: &ChainConfig) -> Result<EchoResidual> {
    if !cfg.drive.echo_enabled() {
        return Err(Error::InvalidConfig("echo_cancellation_check needs echo_freq > 0".into()));
    }
    let t = cfg.drive.echo_origin + 2.0 / cfg.drive.echo_freq;
    echo_residual(cfg, t, true)
}

/// Relative phase of |++⟩ versus |−−⟩ between the B-including and ideal
/// evolutions without echo, together with the prediction 2 t Σ_p b_p S_p (n_p + ½).
pub fn b_phase_error(cfg: &ChainConfig, t: f64, occupations: &[usize]) -> Result<(f64, f64)> {
    let model = build_effective(cfg)?;
    let ideal = block_propagator(&model, cfg, t, occupations, Variant::Ideal, false);
    let with_b = block_propagator(&model, cfg, t, occupations, Variant::WithB, false);
    let rel = ideal.adjoint() * with_b;
    let pp = crate::hilbert::kets::pair(&crate::hilbert::kets::plus(), &crate::hilbert::kets::plus());
    let mm = crate::hilbert::kets::pair(&crate::hilbert::kets::minus(), &crate::hilbert::kets::minus());
    let amp = |v: &Vector4<C64>| v.dotc(&(rel * v));
    let measured = (amp(&pp) * amp(&mm).conj()).arg();
    Ok((measured, 2.0 * t * model.b_shift(occupations)))
}

/// Internal-space ideal propagator (motion factored out).
pub fn ideal_internal_propagator(cfg: &ChainConfig, t: f64, echo: bool) -> Result<Matrix4<C64>> {
    let model = build_effective(cfg)?;
    Ok(block_propagator(&model, cfg, t, &[], Variant::Ideal, echo))
}

#[cfg(test)]
fn zero4() -> Matrix4<C64> {
    Matrix4::from_element(crate::hilbert::ZERO)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::kets;
    use approx::assert_abs_diff_eq;

    fn bench() -> ChainConfig {
        ChainConfig::thermal_benchmark()
    }

    /// ω evaluated by hand, term by term.
    fn hand_omega(omega: f64, eta11: f64) -> f64 {
        let r = 3f64.powf(0.25);
        let nu2 = 3f64.sqrt();
        let t1 = eta11 * eta11 * 1.0 / (omega * omega - 1.0);
        let t2 = -(eta11 / r) * (eta11 / r) * nu2 / (omega * omega - 3.0);
        0.5 * omega * omega * (t1 + t2)
    }

    #[test]
    fn gate_frequency_benchmark() {
        let w = gate_frequency(&bench()).unwrap();
        assert!((w - hand_omega(1.5, 0.025)).abs() <= 1e-12 * w.abs());
        assert_abs_diff_eq!(w, 1.5e-3, epsilon = 1e-9);
        let tau = gate_time(&bench()).unwrap();
        assert_abs_diff_eq!(tau, 523.60, epsilon = 5e-3);
        let m = build_effective(&bench()).unwrap();
        // contributions before the Ω²/2 factor: 5.000e-4 and 8.333e-4
        let o2 = 0.5 * 1.5 * 1.5;
        assert_abs_diff_eq!(m.a_coeff[0] / o2, 5.0e-4, epsilon = 1e-9);
        assert_abs_diff_eq!(m.a_coeff[1] / o2, 8.3333e-4, epsilon = 1e-8);
    }

    #[test]
    fn destructive_regime_above_breathing_mode() {
        let cfg = ChainConfig::two_ion_defaults(0.025, 2.0).unwrap();
        let w = gate_frequency(&cfg).unwrap();
        assert_abs_diff_eq!(w, -8.3333e-4, epsilon = 1e-8);
        assert!((w - hand_omega(2.0, 0.025)).abs() < 1e-15);
    }

    #[test]
    fn constructive_window_terms_share_sign() {
        for k in 1..20 {
            let omega = 1.0 + k as f64 * (3f64.sqrt() - 1.0) / 20.0;
            let m = build_effective(&ChainConfig::two_ion_defaults(0.01, omega).unwrap()).unwrap();
            assert!(m.a_coeff[0] > 0.0 && m.a_coeff[1] > 0.0, "Omega = {omega}");
        }
        let m = build_effective(&ChainConfig::two_ion_defaults(0.01, 0.8).unwrap()).unwrap();
        assert!(m.a_coeff[0] * m.a_coeff[1] < 0.0);
    }

    #[test]
    fn model_fields_benchmark() {
        let m = build_effective(&bench()).unwrap();
        assert_abs_diff_eq!(m.b_coeff[0], 1.35, epsilon = 1e-12);
        assert_abs_diff_eq!(m.b_coeff[1], -2.25, epsilon = 1e-12);
        for s in &m.eta_sums {
            assert_abs_diff_eq!(s.diff_sq, 0.0, epsilon = 1e-18);
        }
        let nu: Vec<f64> = bench().modes.iter().map(|m| m.nu).collect();
        assert!((m.omega_gate - m.closed_form_omega(&nu)).abs() <= 1e-12 * m.omega_gate.abs());
        assert!((m.omega_gate - gate_frequency(&bench()).unwrap()).abs() <= 1e-15);
        assert!(!m.validity.pass);
    }

    #[test]
    fn resonance_and_zero_coupling() {
        let cfg = ChainConfig::two_ion_defaults(0.025, 3f64.sqrt()).unwrap();
        assert!(matches!(build_effective(&cfg), Err(Error::Resonance { mode: 1, .. })));
        assert!(gate_frequency(&cfg).is_err());
        let zero = ChainConfig::two_ion_defaults(0.0, 1.5).unwrap();
        assert_eq!(gate_frequency(&zero).unwrap(), 0.0);
        assert!(matches!(gate_time(&zero), Err(Error::ZeroGateFrequency)));
        let m = build_effective(&zero).unwrap();
        let h = m.block_hamiltonian(&[3, 1], Variant::WithB, 1.0);
        assert_eq!(h, zero4());
    }

    #[test]
    fn scaling_laws() {
        let w1 = gate_frequency(&ChainConfig::two_ion_defaults(0.01, 1.5).unwrap()).unwrap();
        let w2 = gate_frequency(&ChainConfig::two_ion_defaults(0.02, 1.5).unwrap()).unwrap();
        assert_abs_diff_eq!(w2 / w1, 4.0, epsilon = 1e-12);
        let t1 = gate_time(&ChainConfig::two_ion_defaults(0.01, 1.5).unwrap()).unwrap();
        let t2 = gate_time(&ChainConfig::two_ion_defaults(0.02, 1.5).unwrap()).unwrap();
        assert_abs_diff_eq!(t1 / t2, 4.0, epsilon = 1e-12);
        // pole at Ω → ν₁
        let near = gate_frequency(&ChainConfig::two_ion_defaults(0.01, 1.0001).unwrap()).unwrap();
        assert!(near.abs() > 100.0 * w1.abs());
    }

    #[test]
    fn swapping_ion_rows_leaves_omega() {
        let mut cfg = bench();
        cfg.eta = [vec![0.02, 0.013], vec![0.03, -0.011]];
        let a = gate_frequency(&cfg).unwrap();
        cfg.eta.swap(0, 1);
        assert_eq!(a, gate_frequency(&cfg).unwrap());
    }

    #[test]
    fn ideal_propagator_creates_bell_state() {
        let cfg = bench();
        let tau = gate_time(&cfg).unwrap();
        let u = ideal_internal_propagator(&cfg, tau, false).unwrap();
        let pm = kets::pair(&kets::plus(), &kets::minus());
        let out = u * pm;
        let best = [1.0, -1.0]
            .iter()
            .map(|&s| kets::bell(s).dotc(&out).norm_sqr())
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(best, 1.0, epsilon = 1e-12);
        let u0 = ideal_internal_propagator(&cfg, 0.0, true).unwrap();
        assert!((u0 - Matrix4::identity()).norm() < 1e-15);
    }

    #[test]
    fn ideal_propagator_swaps_at_twice_gate_time() {
        let cfg = bench();
        let tau = gate_time(&cfg).unwrap();
        let u = ideal_internal_propagator(&cfg, 2.0 * tau, false).unwrap();
        let pm = kets::pair(&kets::plus(), &kets::minus());
        let mp = kets::pair(&kets::minus(), &kets::plus());
        assert_abs_diff_eq!(mp.dotc(&(u * pm)).norm_sqr(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pm.dotc(&(u * mp)).norm_sqr(), 1.0, epsilon = 1e-12);
        let amp = mp.dotc(&(u * pm));
        assert_abs_diff_eq!(amp.re, 0.0, epsilon = 1e-12);
        // |±±⟩ pick up only phases
        for v in [kets::pair(&kets::plus(), &kets::plus()), kets::pair(&kets::minus(), &kets::minus())] {
            assert_abs_diff_eq!(v.dotc(&(u * v)).norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bell_overlap_is_sinusoidal() {
        let cfg = bench();
        let w = gate_frequency(&cfg).unwrap();
        let pm = kets::pair(&kets::plus(), &kets::minus());
        for k in 0..40 {
            let t = 37.3 * k as f64;
            let out = ideal_internal_propagator(&cfg, t, true).unwrap() * pm;
            let plus = kets::bell(1.0).dotc(&out).norm_sqr();
            let minus = kets::bell(-1.0).dotc(&out).norm_sqr();
            let s = (2.0 * w * t).sin();
            assert!(((plus - (1.0 + s) / 2.0).abs()).min((plus - (1.0 - s) / 2.0).abs()) < 1e-9);
            assert_abs_diff_eq!(plus + minus, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn propagators_unitary() {
        let cfg = bench().with_truncation(&[3, 2]);
        for variant in [Variant::Ideal, Variant::WithB] {
            for echo in [false, true] {
                let u = effective_propagator(321.0, &cfg, variant, echo).unwrap();
                assert!(u.unitarity_defect() < 1e-10);
            }
        }
    }

    #[test]
    fn echo_cancels_b_terms_exactly() {
        for f in [1.0 / 200.0, 1.0 / 50.0, 1.0 / 10.0] {
            let cfg = bench().with_truncation(&[6, 3]).with_echo(f);
            let r = echo_cancellation_check(&cfg).unwrap();
            assert!(r.max <= 1e-10, "F = {f}: {}", r.max);
            assert_eq!(r.blocks.len(), 7 * 4);
        }
        assert!(echo_cancellation_check(&bench().with_echo(0.0)).is_err());
    }

    #[test]
    fn without_echo_residual_grows() {
        let cfg = bench().with_truncation(&[3, 1]);
        let r1 = echo_residual(&cfg, 20.0, false).unwrap();
        let r2 = echo_residual(&cfg, 40.0, false).unwrap();
        assert!(r1.max > 1e-3);
        assert!(r2.max > 1.5 * r1.max);
    }

    #[test]
    fn asymmetric_couplings_need_fast_echo() {
        let mut cfg = bench().with_truncation(&[3, 1]);
        cfg.eta = [vec![0.03, 0.02], vec![0.02, -0.012]];
        let slow = echo_cancellation_check(&cfg.clone().with_echo(1.0 / 400.0)).unwrap();
        let fast = echo_cancellation_check(&cfg.clone().with_echo(1.0 / 10.0)).unwrap();
        assert!(slow.max > 1e-6);
        assert!(fast.max < slow.max);
    }

    #[test]
    fn b_phase_matches_prediction() {
        let cfg = bench();
        for occ in [[0usize, 0usize], [1, 0], [3, 1]] {
            for k in 1..=10 {
                let t = 20.0 * k as f64;
                let (got, want) = b_phase_error(&cfg, t, &occ).unwrap();
                assert!((got - want).abs() <= 0.05 * want.abs() + 1e-12, "{occ:?} t={t}: {got} vs {want}");
            }
        }
    }
}
