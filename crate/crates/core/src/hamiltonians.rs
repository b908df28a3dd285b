//! Interaction-picture Hamiltonians of the carrier-driven ion pair.
//!
//! Three builders are provided: the first-order Lamb-Dicke expansion, the
//! all-orders form with the full displacement factor per mode, and the
//! dressed-picture Hamiltonian obtained with the frame operator `V(t)`.
//!
//! A π shift of both laser phases flips the sign of the whole Hamiltonian, so
//! every builder takes (or derives from the echo schedule) a drive sign
//! `s = ±1`. Builders are pure functions of `t` and the schedule; integrators
//! are expected to evaluate a whole step with one sign.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    apply_on_factor, kron_factors, ops, OperatorMatrix, Slot, SpaceLayout, SparseOperator, I, ONE,
    ZERO,
};
use crate::model::{ChainConfig, LaserDrive};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// First order in the Lamb-Dicke parameters.
    Ld1,
    /// All orders in the Lamb-Dicke parameters.
    Full,
    /// Dressed picture (diagnostic).
    Dressed,
}

impl std::str::FromStr for HamiltonianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ld1" => Ok(Self::Ld1),
            "full" => Ok(Self::Full),
            "dressed" => Ok(Self::Dressed),
            other => Err(Error::InvalidConfig(format!("unknown Hamiltonian kind `{other}`"))),
        }
    }
}

/// A time-dependent Hamiltonian that can be applied to flat state vectors.
pub trait Hamiltonian: Send + Sync {
    fn layout(&self) -> &SpaceLayout;

    fn drive(&self) -> &LaserDrive;

    /// `out = s·H₊(t) ψ`, where `H₊` is the Hamiltonian with uninverted phases.
    fn apply_signed(&self, t: f64, sign: f64, psi: &[C64], out: &mut [C64]);

    fn matrix_signed(&self, t: f64, sign: f64) -> OperatorMatrix;

    /// `out = H(t) ψ` with the sign taken from the echo schedule at `t`.
    fn apply(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        self.apply_signed(t, self.drive().echo_sign(t), psi, out)
    }

    fn matrix(&self, t: f64) -> OperatorMatrix {
        self.matrix_signed(t, self.drive().echo_sign(t))
    }
}

pub fn build(kind: HamiltonianKind, cfg: &ChainConfig) -> Result<Box<dyn Hamiltonian>> {
    Ok(match kind {
        HamiltonianKind::Ld1 => Box::new(Ld1Hamiltonian::new(cfg)?),
        HamiltonianKind::Full => Box::new(FullHamiltonian::new(cfg)?),
        HamiltonianKind::Dressed => Box::new(DressedHamiltonian::new(cfg)?),
    })
}

fn check_layout(cfg: &ChainConfig, layout: &SpaceLayout) -> Result<()> {
    cfg.validate_structure()?;
    if layout.qubit_count() != 2 || layout.mode_count() != cfg.mode_count() {
        return Err(Error::InvalidLayout(format!(
            "layout has {} qubits and {} modes, config has {} modes",
            layout.qubit_count(),
            layout.mode_count(),
            cfg.mode_count()
        )));
    }
    Ok(())
}

fn carrier_coeff(cfg: &ChainConfig, j: usize, sign: f64) -> C64 {
    C64::from_polar(0.5 * cfg.drive.omega * sign, cfg.drive.base_phases[j])
}

/// Dense first-order Hamiltonian with an explicit drive sign.
pub fn h_ld1_signed(t: f64, sign: f64, cfg: &ChainConfig, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    check_layout(cfg, layout)?;
    let mut h = OperatorMatrix::zeros(layout);
    let sp = ops::sigma_plus();
    for j in 0..2 {
        // σ_j+ [1 + Σ_p iη_jp (a_p† e^{iν_p t} + a_p e^{−iν_p t})]
        let mut term = kron_factors(layout, &[(Slot::Qubit(j), &sp)])?;
        for (p, mode) in cfg.modes.iter().enumerate() {
            let d = layout.mode_dims()[p];
            let x = ops::raising(d) * C64::from_polar(1.0, mode.nu * t)
                + ops::lowering(d) * C64::from_polar(1.0, -mode.nu * t);
            let side = kron_factors(layout, &[(Slot::Qubit(j), &sp), (Slot::Mode(p), &x)])?;
            term = term.add(&side.scale(I * cfg.eta[j][p]));
        }
        let part = term.scale(carrier_coeff(cfg, j, sign));
        h = h.add(&part).add(&part.adjoint());
    }
    Ok(h)
}

/// First-order Lamb-Dicke Hamiltonian at time `t`.
pub fn h_ld1(t: f64, cfg: &ChainConfig, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    h_ld1_signed(t, cfg.drive.echo_sign(t), cfg, layout)
}

/// exp(iη(a† + a)) on a truncated mode of dimension `dim`.
pub fn displacement_generator_exp(eta: f64, dim: usize) -> DMatrix<C64> {
    let x = DMatrix::<f64>::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            (c as f64).sqrt()
        } else if r == c + 1 {
            (r as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(x);
    let q = eig.eigenvectors.map(|v| C64::new(v, 0.0));
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, eta * l)));
    &q * phases * q.transpose()
}

/// E_p(t) = exp[iη(a† e^{iνt} + a e^{−iνt})] from its t = 0 value.
fn rotate_local(d0: &DMatrix<C64>, nu: f64, t: f64) -> DMatrix<C64> {
    let dim = d0.nrows();
    DMatrix::from_fn(dim, dim, |r, c| d0[(r, c)] * C64::from_polar(1.0, nu * t * (r as f64 - c as f64)))
}

/// Dense all-orders Hamiltonian with an explicit drive sign.
pub fn h_full_signed(t: f64, sign: f64, cfg: &ChainConfig, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    check_layout(cfg, layout)?;
    let mut h = OperatorMatrix::zeros(layout);
    let sp = ops::sigma_plus();
    for j in 0..2 {
        let locals: Vec<DMatrix<C64>> = cfg
            .modes
            .iter()
            .enumerate()
            .map(|(p, m)| {
                let d0 = displacement_generator_exp(cfg.eta[j][p], layout.mode_dims()[p]);
                rotate_local(&d0, m.nu, t)
            })
            .collect();
        let mut factors: Vec<(Slot, &DMatrix<C64>)> = vec![(Slot::Qubit(j), &sp)];
        factors.extend(locals.iter().enumerate().map(|(p, m)| (Slot::Mode(p), m)));
        let part = kron_factors(layout, &factors)?.scale(carrier_coeff(cfg, j, sign));
        h = h.add(&part).add(&part.adjoint());
    }
    Ok(h)
}

/// All-orders Hamiltonian at time `t`.
pub fn h_full(t: f64, cfg: &ChainConfig, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    h_full_signed(t, cfg.drive.echo_sign(t), cfg, layout)
}

/// Rotation R = (1/√2)[[1, 1], [−1, 1]].
pub fn dressing_rotation() -> Matrix2<C64> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Matrix2::new(h, h, -h, h)
}

fn z_rotation(angle: f64) -> Matrix2<C64> {
    // exp(i·angle·σ_z/2)
    Matrix2::new(
        C64::from_polar(1.0, angle / 2.0),
        ZERO,
        ZERO,
        C64::from_polar(1.0, -angle / 2.0),
    )
}

/// Single-ion frame operator exp(isΩtσ_z/2)·R·exp(−iφσ_z/2).
///
/// The trailing phase factor absorbs a non-zero base laser phase; with φ = 0 it
/// is the identity.
pub fn dressed_frame_local(t: f64, sign: f64, omega: f64, phase: f64) -> Matrix2<C64> {
    z_rotation(sign * omega * t) * dressing_rotation() * z_rotation(-phase)
}

fn to_dmatrix(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_iterator(2, 2, m.iter().copied())
}

pub fn dressed_v_signed(t: f64, sign: f64, cfg: &ChainConfig, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    check_layout(cfg, layout)?;
    let v: Vec<DMatrix<C64>> = (0..2)
        .map(|j| to_dmatrix(&dressed_frame_local(t, sign, cfg.drive.omega, cfg.drive.base_phases[j])))
        .collect();
    kron_factors(layout, &[(Slot::Qubit(0), &v[0]), (Slot::Qubit(1), &v[1])])
}

/// Dressed-picture frame operator V(t) (unitary).
pub fn dressed_v(t: f64, cfg: &ChainConfig, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    dressed_v_signed(t, cfg.drive.echo_sign(t), cfg, layout)
}

/// dV/dt within the current echo interval.
pub fn dressed_v_derivative(t: f64, cfg: &ChainConfig, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    check_layout(cfg, layout)?;
    let sign = cfg.drive.echo_sign(t);
    let omega = cfg.drive.omega;
    let half = C64::new(0.0, 0.5 * sign * omega);
    let sz = Matrix2::new(ONE, ZERO, ZERO, -ONE);
    let v: Vec<Matrix2<C64>> = (0..2)
        .map(|j| dressed_frame_local(t, sign, omega, cfg.drive.base_phases[j]))
        .collect();
    let dv: Vec<DMatrix<C64>> = v.iter().map(|m| to_dmatrix(&(sz * m * half))).collect();
    let v: Vec<DMatrix<C64>> = v.iter().map(to_dmatrix).collect();
    let a = kron_factors(layout, &[(Slot::Qubit(0), &dv[0]), (Slot::Qubit(1), &v[1])])?;
    let b = kron_factors(layout, &[(Slot::Qubit(0), &v[0]), (Slot::Qubit(1), &dv[1])])?;
    Ok(a.add(&b))
}

pub fn h_dressed_signed(t: f64, sign: f64, cfg: &ChainConfig, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    check_layout(cfg, layout)?;
    let omega = sign * cfg.drive.omega;
    let sp = ops::sigma_plus();
    let mut h = OperatorMatrix::zeros(layout);
    for (p, mode) in cfg.modes.iter().enumerate() {
        let d = layout.mode_dims()[p];
        let delta = omega - mode.nu;
        let gamma = omega + mode.nu;
        let x = ops::lowering(d) * C64::from_polar(1.0, delta * t)
            + ops::raising(d) * C64::from_polar(1.0, gamma * t);
        for j in 0..2 {
            let term = kron_factors(layout, &[(Slot::Qubit(j), &sp), (Slot::Mode(p), &x)])?
                .scale(I * (0.5 * omega * cfg.eta[j][p]));
            h = h.add(&term).add(&term.adjoint());
        }
    }
    Ok(h)
}

/// Dressed-picture Hamiltonian H′(t) = V H V† + i V̇ V†.
pub fn h_dressed(t: f64, cfg: &ChainConfig, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    h_dressed_signed(t, cfg.drive.echo_sign(t), cfg, layout)
}

/// Sparse first-order Hamiltonian for the integrators.
pub struct Ld1Hamiltonian {
    layout: SpaceLayout,
    drive: LaserDrive,
    eta: [Vec<f64>; 2],
    nu: Vec<f64>,
    carrier: [SparseOperator; 2],
    /// [ion][mode] → (σ₊a†, σ₊a)
    sidebands: [Vec<(SparseOperator, SparseOperator)>; 2],
    carrier_dag: [SparseOperator; 2],
    sidebands_dag: [Vec<(SparseOperator, SparseOperator)>; 2],
}

impl Ld1Hamiltonian {
    pub fn new(cfg: &ChainConfig) -> Result<Self> {
        let layout = cfg.layout();
        check_layout(cfg, &layout)?;
        let sp = ops::sigma_plus();
        let mk = |j: usize| -> Result<(SparseOperator, Vec<(SparseOperator, SparseOperator)>)> {
            let c = kron_factors(&layout, &[(Slot::Qubit(j), &sp)])?;
            let mut side = Vec::new();
            for p in 0..cfg.mode_count() {
                let d = layout.mode_dims()[p];
                let up = kron_factors(&layout, &[(Slot::Qubit(j), &sp), (Slot::Mode(p), &ops::raising(d))])?;
                let down = kron_factors(&layout, &[(Slot::Qubit(j), &sp), (Slot::Mode(p), &ops::lowering(d))])?;
                side.push((SparseOperator::from_operator(&up), SparseOperator::from_operator(&down)));
            }
            Ok((SparseOperator::from_operator(&c), side))
        };
        let (c0, s0) = mk(0)?;
        let (c1, s1) = mk(1)?;
        let dag = |v: &Vec<(SparseOperator, SparseOperator)>| -> Vec<(SparseOperator, SparseOperator)> {
            v.iter().map(|(u, d)| (u.adjoint(), d.adjoint())).collect()
        };
        Ok(Self {
            drive: cfg.drive.clone(),
            eta: cfg.eta.clone(),
            nu: cfg.modes.iter().map(|m| m.nu).collect(),
            carrier_dag: [c0.adjoint(), c1.adjoint()],
            sidebands_dag: [dag(&s0), dag(&s1)],
            carrier: [c0, c1],
            sidebands: [s0, s1],
            layout,
        })
    }
}

impl Hamiltonian for Ld1Hamiltonian {
    fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    fn drive(&self) -> &LaserDrive {
        &self.drive
    }

    fn apply_signed(&self, t: f64, sign: f64, psi: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        let rot: Vec<C64> = self.nu.iter().map(|&nu| C64::from_polar(1.0, nu * t)).collect();
        for j in 0..2 {
            let c = C64::from_polar(0.5 * self.drive.omega * sign, self.drive.base_phases[j]);
            let cc = c.conj();
            self.carrier[j].apply_add(c, psi, out);
            self.carrier_dag[j].apply_add(cc, psi, out);
            for (p, r) in rot.iter().enumerate() {
                let k = c * I * self.eta[j][p];
                let (up, down) = &self.sidebands[j][p];
                up.apply_add(k * r, psi, out);
                down.apply_add(k * r.conj(), psi, out);
                let (up_d, down_d) = &self.sidebands_dag[j][p];
                up_d.apply_add(k.conj() * r.conj(), psi, out);
                down_d.apply_add(k.conj() * r, psi, out);
            }
        }
    }

    fn matrix_signed(&self, t: f64, sign: f64) -> OperatorMatrix {
        let cfg = ChainConfig {
            schema_version: crate::model::SCHEMA_VERSION,
            n_ions: 2,
            modes: self
                .nu
                .iter()
                .enumerate()
                .map(|(p, &nu)| crate::model::ModeSpec::new(nu, self.layout.n_max(p)))
                .collect(),
            eta: self.eta.clone(),
            drive: self.drive.clone(),
            ld_threshold: f64::INFINITY,
        };
        h_ld1_signed(t, sign, &cfg, &self.layout).expect("layout checked at construction")
    }
}

/// All-orders Hamiltonian applied factor by factor.
///
/// Uses E_p(t) = R_p(t) E_p(0) R_p(t)† with R_p(t) = exp(iν_p t a_p†a_p), so the
/// displacement factors are exponentiated once.
pub struct FullHamiltonian {
    cfg: ChainConfig,
    layout: SpaceLayout,
    /// [ion][mode] → (E_jp(0), E_jp(0)†)
    displacements: [Vec<(DMatrix<C64>, DMatrix<C64>)>; 2],
    /// Σ_p ν_p n_p for each motional index.
    motional_energy: Vec<f64>,
    strides: Vec<usize>,
    qubit_strides: [usize; 2],
}

impl FullHamiltonian {
    pub fn new(cfg: &ChainConfig) -> Result<Self> {
        let layout = cfg.layout();
        check_layout(cfg, &layout)?;
        let mk = |j: usize| -> Vec<(DMatrix<C64>, DMatrix<C64>)> {
            (0..cfg.mode_count())
                .map(|p| {
                    let d = displacement_generator_exp(cfg.eta[j][p], layout.mode_dims()[p]);
                    let dd = d.adjoint();
                    (d, dd)
                })
                .collect()
        };
        let motional_energy = (0..layout.motional_dim())
            .map(|m| {
                layout
                    .fock_numbers(m)
                    .iter()
                    .zip(&cfg.modes)
                    .map(|(&n, mode)| n as f64 * mode.nu)
                    .sum()
            })
            .collect();
        let strides = (0..cfg.mode_count())
            .map(|p| layout.stride(Slot::Mode(p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            displacements: [mk(0), mk(1)],
            motional_energy,
            strides,
            qubit_strides: [layout.stride(Slot::Qubit(0))?, layout.stride(Slot::Qubit(1))?],
            cfg: cfg.clone(),
            layout,
        })
    }

    fn apply_modes(&self, j: usize, adjoint: bool, x: &[C64], scratch: &mut [C64], out: &mut [C64]) {
        out.copy_from_slice(x);
        for (p, (d, dd)) in self.displacements[j].iter().enumerate() {
            let m = if adjoint { dd } else { d };
            scratch.copy_from_slice(out);
            apply_on_factor(m, self.strides[p], self.layout.mode_dims()[p], scratch, out);
        }
    }
}

impl Hamiltonian for FullHamiltonian {
    fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    fn drive(&self) -> &LaserDrive {
        &self.cfg.drive
    }

    fn apply_signed(&self, t: f64, sign: f64, psi: &[C64], out: &mut [C64]) {
        let dim = psi.len();
        let m_dim = self.layout.motional_dim();
        let rot: Vec<C64> = self
            .motional_energy
            .iter()
            .map(|&e| C64::from_polar(1.0, e * t))
            .collect();
        let w: Vec<C64> = psi
            .iter()
            .enumerate()
            .map(|(i, a)| a * rot[i % m_dim].conj())
            .collect();
        let mut acc = vec![ZERO; dim];
        let mut u = vec![ZERO; dim];
        let mut scratch = vec![ZERO; dim];
        for j in 0..2 {
            let c = carrier_coeff(&self.cfg, j, sign);
            let stride = self.qubit_strides[j];
            // σ₊ = |e⟩⟨g| moves amplitude from the g half (bit set) to the e half.
            self.apply_modes(j, false, &w, &mut scratch, &mut u);
            for i in 0..dim {
                if (i / stride) % 2 == 0 {
                    acc[i] += c * u[i + stride];
                }
            }
            self.apply_modes(j, true, &w, &mut scratch, &mut u);
            for i in 0..dim {
                if (i / stride) % 2 == 1 {
                    acc[i] += c.conj() * u[i - stride];
                }
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = acc[i] * rot[i % m_dim];
        }
    }

    fn matrix_signed(&self, t: f64, sign: f64) -> OperatorMatrix {
        h_full_signed(t, sign, &self.cfg, &self.layout).expect("layout checked at construction")
    }
}

/// Dressed-picture Hamiltonian applied densely; diagnostic use only.
pub struct DressedHamiltonian {
    cfg: ChainConfig,
    layout: SpaceLayout,
}

impl DressedHamiltonian {
    pub fn new(cfg: &ChainConfig) -> Result<Self> {
        let layout = cfg.layout();
        check_layout(cfg, &layout)?;
        Ok(Self {
            cfg: cfg.clone(),
            layout,
        })
    }
}

impl Hamiltonian for DressedHamiltonian {
    fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    fn drive(&self) -> &LaserDrive {
        &self.cfg.drive
    }

    fn apply_signed(&self, t: f64, sign: f64, psi: &[C64], out: &mut [C64]) {
        let h = self.matrix_signed(t, sign);
        let y = h.entries() * nalgebra::DVector::from_column_slice(psi);
        out.copy_from_slice(y.as_slice());
    }

    fn matrix_signed(&self, t: f64, sign: f64) -> OperatorMatrix {
        h_dressed_signed(t, sign, &self.cfg, &self.layout).expect("layout checked at construction")
    }
}
