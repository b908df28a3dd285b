//! Physical configuration of the illuminated ion pair.
//!
//! Units: ħ = 1 and the first mode frequency ν₁ = 1, so times are in 1/ν₁ and
//! every rate or frequency is in units of ν₁.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::SpaceLayout;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_LD_THRESHOLD: f64 = 0.1;
pub const DEFAULT_DETUNING_FACTOR: f64 = 10.0;

/// One retained collective mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub nu: f64,
    pub n_max: usize,
    #[serde(default)]
    pub nbar: f64,
    #[serde(default)]
    pub gamma: f64,
}

impl ModeSpec {
    pub fn new(nu: f64, n_max: usize) -> Self {
        Self {
            nu,
            n_max,
            nbar: 0.0,
            gamma: 0.0,
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("mode {p}: {what}")));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad("nu must be positive");
        }
        if self.n_max < 1 {
            return bad("n_max must be at least 1");
        }
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return bad("nbar must be non-negative");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be non-negative");
        }
        Ok(())
    }
}

/// Resonant carrier drive with optional π phase inversions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserDrive {
    pub omega: f64,
    #[serde(default)]
    pub base_phases: [f64; 2],
    /// Inversion frequency F; zero disables the echo.
    #[serde(default)]
    pub echo_freq: f64,
    #[serde(default)]
    pub echo_origin: f64,
}

impl LaserDrive {
    pub fn new(omega: f64) -> Self {
        Self {
            omega,
            base_phases: [0.0; 2],
            echo_freq: 0.0,
            echo_origin: 0.0,
        }
    }

    pub fn echo_enabled(&self) -> bool {
        self.echo_freq > 0.0
    }

    fn time_of(&self, k: i64) -> f64 {
        self.echo_origin + k as f64 / self.echo_freq
    }

    fn slack(t: f64) -> f64 {
        1e-12 * t.abs().max(1.0)
    }

    /// Number of inversions in (echo_origin, t].
    pub fn inversion_count(&self, t: f64) -> u64 {
        if !self.echo_enabled() || t <= self.echo_origin {
            return 0;
        }
        let mut k = ((t - self.echo_origin) * self.echo_freq).floor() as i64;
        let slack = Self::slack(t);
        while self.time_of(k + 1) <= t + slack {
            k += 1;
        }
        while k > 0 && self.time_of(k) > t + slack {
            k -= 1;
        }
        k.max(0) as u64
    }

    /// +1 on even intervals of the schedule, −1 after an odd number of inversions.
    pub fn echo_sign(&self, t: f64) -> f64 {
        if self.inversion_count(t) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// (φ₁(t), φ₂(t)).
    pub fn phase_at(&self, t: f64) -> [f64; 2] {
        let shift = if self.echo_sign(t) < 0.0 { PI } else { 0.0 };
        [self.base_phases[0] + shift, self.base_phases[1] + shift]
    }

    /// Inversion times strictly inside (t0, t1).
    pub fn inversion_times(&self, t0: f64, t1: f64) -> Vec<f64> {
        if !self.echo_enabled() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut k = self.inversion_count(t0) as i64 + 1;
        loop {
            let tk = self.time_of(k);
            if tk >= t1 - Self::slack(t1) {
                break;
            }
            if tk > t0 + Self::slack(t0) {
                out.push(tk);
            }
            k += 1;
        }
        out
    }

    /// Echo frequency giving `m` inversions over a pulse of length `total`.
    pub fn echo_freq_for(total: f64, m: u32) -> f64 {
        m as f64 / total
    }
}

fn default_ld_threshold() -> f64 {
    DEFAULT_LD_THRESHOLD
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// Illuminated ion pair, its retained modes and the drive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub n_ions: usize,
    pub modes: Vec<ModeSpec>,
    /// η_jp: row j ∈ {0, 1} is the illuminated ion, column p the mode.
    pub eta: [Vec<f64>; 2],
    pub drive: LaserDrive,
    #[serde(default = "default_ld_threshold")]
    pub ld_threshold: f64,
}

impl ChainConfig {
    /// Two-ion crystal: centre-of-mass mode at ν₁ = 1 and breathing mode at √3,
    /// with η₁₁ = η₂₁ = 3^{1/4} η₁₂ = −3^{1/4} η₂₂.
    pub fn two_ion_defaults(eta11: f64, omega: f64) -> Result<Self> {
        let r = 3f64.powf(0.25);
        let cfg = Self {
            schema_version: SCHEMA_VERSION,
            n_ions: 2,
            modes: vec![ModeSpec::new(1.0, 15), ModeSpec::new(3f64.sqrt(), 7)],
            eta: [vec![eta11, eta11 / r], vec![eta11, -eta11 / r]],
            drive: LaserDrive::new(omega),
            ld_threshold: DEFAULT_LD_THRESHOLD,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The thermal heating benchmark: η₁₁ = 0.025, Ω = 1.5, F = 1/50,
    /// n̄ = (1, 0.1), Γ = (10⁻³, 10⁻⁴).
    pub fn thermal_benchmark() -> Self {
        Self::two_ion_defaults(0.025, 1.5)
            .expect("benchmark parameters are within the Lamb-Dicke limit")
            .with_thermal(&[1.0, 0.1], &[1e-3, 1e-4])
            .with_echo(1.0 / 50.0)
    }

    pub fn with_thermal(mut self, nbar: &[f64], gamma: &[f64]) -> Self {
        for (m, (&n, &g)) in self.modes.iter_mut().zip(nbar.iter().zip(gamma)) {
            m.nbar = n;
            m.gamma = g;
        }
        self
    }

    pub fn with_echo(mut self, freq: f64) -> Self {
        self.drive.echo_freq = freq;
        self
    }

    pub fn with_truncation(mut self, n_max: &[usize]) -> Self {
        for (m, &n) in self.modes.iter_mut().zip(n_max) {
            m.n_max = n;
        }
        self
    }

    /// Per-mode truncation from `recommended_truncation`, never below the
    /// current value.
    pub fn with_recommended_truncation(mut self, horizon: f64, tail: f64) -> Self {
        for m in &mut self.modes {
            m.n_max = m.n_max.max(recommended_truncation(m, horizon, tail));
        }
        self
    }

    pub fn without_heating(mut self) -> Self {
        for m in &mut self.modes {
            m.gamma = 0.0;
        }
        self
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn layout(&self) -> SpaceLayout {
        let n_max: Vec<usize> = self.modes.iter().map(|m| m.n_max).collect();
        SpaceLayout::two_qubits(&n_max)
    }

    /// Structural checks plus the Lamb-Dicke condition at `ld_threshold`.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        for (p, &margin) in lamb_dicke_margin(self).iter().enumerate() {
            if margin >= self.ld_threshold {
                return Err(Error::LambDicke {
                    mode: p,
                    margin,
                    threshold: self.ld_threshold,
                });
            }
        }
        Ok(())
    }

    pub fn validate_structure(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        if self.n_ions < 2 {
            return Err(Error::InvalidConfig("need at least two ions".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidConfig("need at least one mode".into()));
        }
        for (p, m) in self.modes.iter().enumerate() {
            m.validate(p)?;
        }
        for row in &self.eta {
            if row.len() != self.modes.len() {
                return Err(Error::InvalidConfig(format!(
                    "eta rows must have one entry per mode ({}), found {}",
                    self.modes.len(),
                    row.len()
                )));
            }
            if row.iter().any(|e| !e.is_finite()) {
                return Err(Error::InvalidConfig("eta entries must be finite".into()));
            }
        }
        let d = &self.drive;
        if !(d.omega > 0.0 && d.omega.is_finite()) {
            return Err(Error::InvalidConfig("drive.omega must be positive".into()));
        }
        if !(d.echo_freq >= 0.0 && d.echo_freq.is_finite()) {
            return Err(Error::InvalidConfig("drive.echo_freq must be non-negative".into()));
        }
        if !(self.ld_threshold > 0.0) {
            return Err(Error::InvalidConfig("ld_threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate_structure()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// η_p √(n̄_p + 1) for each mode, with η_p the larger of the two ions' couplings.
pub fn lamb_dicke_margin(cfg: &ChainConfig) -> Vec<f64> {
    cfg.modes
        .iter()
        .enumerate()
        .map(|(p, m)| {
            let eta = cfg.eta[0][p].abs().max(cfg.eta[1][p].abs());
            eta * (m.nbar + 1.0).sqrt()
        })
        .collect()
}

/// Outcome of the detuning condition |Δ_p| ≫ |η_jp| Ω at factor k.
#[derive(Clone, Debug, PartialEq)]
pub struct DetuningMargin {
    /// ratios[p][j] = |Ω − ν_p| / (|η_jp| Ω); infinite when η_jp = 0.
    pub ratios: Vec<[f64; 2]>,
    pub min_ratio: f64,
    /// (mode, ion) attaining the minimum.
    pub binding: (usize, usize),
    pub factor: f64,
    pub pass: bool,
}

pub(crate) fn is_resonant(omega: f64, nu: f64) -> bool {
    (omega - nu).abs() <= 1e-12 * nu.max(1.0)
}

pub fn detuning_margin(cfg: &ChainConfig, factor: f64) -> Result<DetuningMargin> {
    let omega = cfg.drive.omega;
    let mut ratios = Vec::with_capacity(cfg.modes.len());
    let mut min_ratio = f64::INFINITY;
    let mut binding = (0, 0);
    for (p, m) in cfg.modes.iter().enumerate() {
        if is_resonant(omega, m.nu) {
            return Err(Error::Resonance { mode: p, nu: m.nu });
        }
        let delta = (omega - m.nu).abs();
        let mut row = [f64::INFINITY; 2];
        for j in 0..2 {
            let coupling = cfg.eta[j][p].abs() * omega;
            if coupling > 0.0 {
                row[j] = delta / coupling;
            }
            if row[j] < min_ratio {
                min_ratio = row[j];
                binding = (p, j);
            }
        }
        ratios.push(row);
    }
    Ok(DetuningMargin {
        ratios,
        min_ratio,
        binding,
        factor,
        pass: min_ratio >= factor,
    })
}

/// Truncated thermal occupation probabilities P(n) ∝ n̄ⁿ/(n̄+1)ⁿ⁺¹, n = 0..=n_max.
pub fn thermal_distribution(nbar: f64, n_max: usize) -> Vec<f64> {
    if nbar <= 0.0 {
        let mut p = vec![0.0; n_max + 1];
        p[0] = 1.0;
        return p;
    }
    let q = nbar / (nbar + 1.0);
    let raw: Vec<f64> = (0..=n_max).map(|n| q.powi(n as i32) / (nbar + 1.0)).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / z).collect()
}

/// Draws a Fock number from the truncated thermal distribution.
pub fn thermal_sample<R: Rng + ?Sized>(nbar: f64, n_max: usize, rng: &mut R) -> usize {
    if nbar <= 0.0 {
        return 0;
    }
    let probs = thermal_distribution(nbar, n_max);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (n, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return n;
        }
    }
    n_max
}

/// Smallest truncation keeping the thermal tail above n_max below `tail`, with
/// the mean occupation grown by heating over `horizon` and two buffer levels.
pub fn recommended_truncation(mode: &ModeSpec, horizon: f64, tail: f64) -> usize {
    // ⟨n⟩ obeys d⟨n⟩/dt = Γ(⟨n⟩ + n̄ + 1) under the two heating channels.
    let grown = (mode.nbar + 1.0) * (mode.gamma * horizon).exp() - 1.0;
    let n_eff = grown.max(mode.nbar);
    if n_eff <= 0.0 {
        return 3;
    }
    let q = n_eff / (n_eff + 1.0);
    // P(n > N) = q^{N+1}
    let n = (tail.ln() / q.ln()).ceil() as usize;
    n.max(1) + 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_ion_eta_matrix() {
        let cfg = ChainConfig::two_ion_defaults(0.025, 1.5).unwrap();
        assert_abs_diff_eq!(cfg.eta[0][1], 0.018996, epsilon = 5e-7);
        assert_abs_diff_eq!(cfg.eta[1][1], -0.018996, epsilon = 5e-7);
        assert_eq!(cfg.eta[0][0], 0.025);
        assert_eq!(cfg.eta[1][0], 0.025);
        assert_abs_diff_eq!(cfg.modes[1].nu, 3f64.sqrt(), epsilon = 1e-15);
        assert!(cfg.eta[0][0] * cfg.eta[1][0] > 0.0);
        assert!(cfg.eta[0][1] * cfg.eta[1][1] < 0.0);
    }

    #[test]
    fn benchmark_configuration() {
        let cfg = ChainConfig::thermal_benchmark();
        assert_eq!(cfg.drive.omega, 1.5);
        assert_eq!(cfg.drive.echo_freq, 0.02);
        assert_eq!(cfg.modes[0].nbar, 1.0);
        assert_eq!(cfg.modes[1].nbar, 0.1);
        assert_eq!(cfg.modes[0].gamma, 1e-3);
        assert_eq!(cfg.modes[1].gamma, 1e-4);
    }

    #[test]
    fn lamb_dicke_violation_rejected() {
        let err = ChainConfig::two_ion_defaults(0.2, 1.5).unwrap_err();
        assert!(matches!(err, Error::LambDicke { mode: 0, .. }));
        let mut cfg = ChainConfig::two_ion_defaults(0.05, 1.5).unwrap();
        cfg.modes[0].nbar = 10.0;
        assert!(cfg.validate().is_err());
        cfg.ld_threshold = 0.2;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn lamb_dicke_margins() {
        let cfg = ChainConfig::thermal_benchmark();
        let m = lamb_dicke_margin(&cfg);
        assert_abs_diff_eq!(m[0], 0.025 * 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(m[0], 0.03536, epsilon = 5e-6);
        assert_abs_diff_eq!(m[1], 0.019923, epsilon = 5e-6);
        let cold = ChainConfig::two_ion_defaults(0.025, 1.5).unwrap();
        assert_eq!(lamb_dicke_margin(&cold)[0], 0.025);
    }

    #[test]
    fn detuning_margin_benchmark() {
        let cfg = ChainConfig::thermal_benchmark();
        let d = detuning_margin(&cfg, 10.0).unwrap();
        assert_abs_diff_eq!(d.ratios[0][0], 0.5 / 0.0375, epsilon = 1e-12);
        assert_abs_diff_eq!(d.ratios[1][0], 8.1438, epsilon = 1e-3);
        assert_abs_diff_eq!(d.min_ratio, 8.14, epsilon = 0.01);
        assert_eq!(d.binding.0, 1);
        assert!(!d.pass);
        assert!(detuning_margin(&cfg, 8.0).unwrap().pass);
    }

    #[test]
    fn detuning_resonance_and_decoupled_limit() {
        let cfg = ChainConfig::two_ion_defaults(0.025, 1.0).unwrap();
        assert!(matches!(detuning_margin(&cfg, 10.0), Err(Error::Resonance { mode: 0, .. })));
        let cfg = ChainConfig::two_ion_defaults(0.0, 1.5).unwrap();
        let d = detuning_margin(&cfg, 1e300).unwrap();
        assert!(d.min_ratio.is_infinite());
        assert!(d.pass);
    }

    #[test]
    fn thermal_law() {
        let p = thermal_distribution(1.0, 200);
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 0.125, epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| thermal_sample(0.0, 10, &mut rng) == 0));
    }

    #[test]
    fn thermal_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mean = (0..n).map(|_| thermal_sample(1.0, 15, &mut rng) as f64).sum::<f64>() / n as f64;
        let probs = thermal_distribution(1.0, 15);
        let exact: f64 = probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        assert!((mean - exact).abs() < 0.02);
    }

    #[test]
    fn thermal_sample_chi_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (nbar, n_max, draws) = (1.0, 15, 100_000);
        let mut counts = vec![0usize; n_max + 1];
        for _ in 0..draws {
            counts[thermal_sample(nbar, n_max, &mut rng)] += 1;
        }
        let probs = thermal_distribution(nbar, n_max);
        // pool the tail so every expected count is at least 5
        let mut chi2 = 0.0;
        let mut bins = 0;
        let (mut tail_obs, mut tail_exp) = (0.0, 0.0);
        for (c, p) in counts.iter().zip(&probs) {
            let e = p * draws as f64;
            if e >= 50.0 {
                chi2 += (*c as f64 - e).powi(2) / e;
                bins += 1;
            } else {
                tail_obs += *c as f64;
                tail_exp += e;
            }
        }
        chi2 += (tail_obs - tail_exp).powi(2) / tail_exp;
        bins += 1;
        // 1% critical values of chi-square for 9..=11 degrees of freedom
        let critical = match bins - 1 {
            9 => 21.67,
            10 => 23.21,
            11 => 24.72,
            dof => panic!("unexpected dof {dof}"),
        };
        assert!(chi2 < critical, "chi2 = {chi2} with {bins} bins");
    }

    #[test]
    fn phase_schedule() {
        let mut d = LaserDrive::new(1.5);
        assert_eq!(d.phase_at(123.0), [0.0, 0.0]);
        d.echo_freq = 1.0 / 50.0;
        assert_eq!(d.phase_at(0.0), [0.0, 0.0]);
        assert_eq!(d.phase_at(49.999), [0.0, 0.0]);
        assert_eq!(d.phase_at(50.0), [PI, PI]);
        assert_eq!(d.phase_at(99.9), [PI, PI]);
        assert_eq!(d.phase_at(100.0), [0.0, 0.0]);
        assert_eq!(d.phase_at(150.0), [PI, PI]);
        assert_eq!(d.inversion_times(0.0, 160.0), vec![50.0, 100.0, 150.0]);
        assert_eq!(d.inversion_times(50.0, 100.0), Vec::<f64>::new());
    }

    #[test]
    fn exactly_m_inversions() {
        for &(tau, m) in &[(523.5987755982989, 10u32), (1100.0, 22), (1047.2, 21), (3.3, 7)] {
            let mut d = LaserDrive::new(1.5);
            d.echo_freq = LaserDrive::echo_freq_for(tau, m);
            assert_eq!(d.inversion_count(tau), m as u64, "tau = {tau}, M = {m}");
            assert_eq!(d.inversion_times(0.0, tau + 1e-6).len(), m as usize);
        }
    }

    #[test]
    fn json_round_trip() {
        let cfg = ChainConfig::thermal_benchmark();
        let s = cfg.to_json_pretty();
        assert_eq!(ChainConfig::from_json_str(&s).unwrap(), cfg);
        assert!(ChainConfig::from_json_str("{\"n_ions\": 2}").is_err());
        let bad = s.replace("\"n_max\": 15", "\"n_max\": 0");
        assert!(ChainConfig::from_json_str(&bad).is_err());
    }

    #[test]
    fn truncation_recommendation_grows_with_heating() {
        let cold = ModeSpec::new(1.0, 5);
        assert_eq!(recommended_truncation(&cold, 1000.0, 1e-3), 3);
        let mut warm = ModeSpec::new(1.0, 5);
        warm.nbar = 1.0;
        let a = recommended_truncation(&warm, 0.0, 1e-3);
        warm.gamma = 1e-3;
        let b = recommended_truncation(&warm, 1100.0, 1e-3);
        assert!(b > a);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn phase_takes_two_values(t in 0.0f64..5000.0, f in 0.0f64..0.5, origin in 0.0f64..10.0) {
                let mut d = LaserDrive::new(1.5);
                d.echo_freq = f;
                d.echo_origin = origin;
                let p = d.phase_at(t);
                prop_assert_eq!(p[0], p[1]);
                prop_assert!(p[0] == 0.0 || p[0] == PI);
            }

            #[test]
            fn thermal_distribution_normalized(nbar in 0.0f64..20.0, n_max in 1usize..40) {
                let p = thermal_distribution(nbar, n_max);
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(p.windows(2).all(|w| w[1] <= w[0] + 1e-15));
            }
        }
    }
}
