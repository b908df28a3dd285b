#![allow(dead_code)]

use lightshift::dynamics::{Dopri5, IntegratorOptions, JumpOperatorSet};
use lightshift::hamiltonians::Hamiltonian;
use lightshift::hilbert::{SpaceLayout, StateVector, I, ZERO};
use lightshift::model::LaserDrive;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Direct integration of the Lindblad equation
/// dρ/dt = −i[H, ρ] + Σ_k C_k ρ C_k† − ½{Σ_k C_k†C_k, ρ},
/// stopping at every phase inversion like the wavefunction integrators.
pub fn master_equation(
    ham: &dyn Hamiltonian,
    jumps: &JumpOperatorSet,
    rho0: &DMatrix<C64>,
    grid: &[f64],
) -> Vec<DMatrix<C64>> {
    let n = rho0.nrows();
    let cs: Vec<DMatrix<C64>> = jumps.operators().iter().map(|j| j.op.to_dense()).collect();
    let cds: Vec<DMatrix<C64>> = cs.iter().map(|c| c.adjoint()).collect();
    let decay = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        jumps.decay_diagonal().iter().map(|&d| C64::new(d, 0.0)),
    ));
    let drive = ham.drive().clone();
    let opts = IntegratorOptions { rtol: 1e-9, atol: 1e-12, norm_tol: None, ..Default::default() };
    let mut stepper = Dopri5::new(n * n, opts);
    let mut y: Vec<C64> = rho0.as_slice().to_vec();
    let mut stops: Vec<(f64, bool)> = grid.iter().map(|&t| (t, true)).collect();
    for tb in drive.inversion_times(grid[0], grid[grid.len() - 1]) {
        stops.push((tb, false));
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut prev = stops[0].0;
    for (t, is_output) in stops {
        if t > prev {
            let sign = drive.echo_sign(0.5 * (prev + t));
            let mut f = |tt: f64, x: &[C64], dx: &mut [C64]| {
                let rho = DMatrix::from_column_slice(n, n, x);
                let h = ham.matrix_signed(tt, sign).into_entries();
                let mut d = (&h * &rho - &rho * &h) * (-I);
                for (c, cd) in cs.iter().zip(&cds) {
                    d += c * &rho * cd;
                }
                d -= (&decay * &rho + &rho * &decay) * C64::new(0.5, 0.0);
                dx.copy_from_slice(d.as_slice());
            };
            stepper.reset();
            stepper.advance(&mut f, prev, t, &mut y).expect("master equation step");
            prev = t;
        }
        if is_output {
            out.push(DMatrix::from_column_slice(n, n, &y));
        }
    }
    out
}

pub fn projector(psi: &StateVector) -> DMatrix<C64> {
    let v = psi.amplitudes();
    v * v.adjoint()
}

/// Half the trace norm of a Hermitian difference.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let d = a - b;
    let d = (&d + d.adjoint()) * C64::new(0.5, 0.0);
    0.5 * d.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>()
}

pub fn state_distance(a: &StateVector, b: &StateVector) -> f64 {
    (a.amplitudes() - b.amplitudes()).norm()
}

/// H = Σ_i E_i |i⟩⟨i|, constant in time.
pub struct DiagonalHamiltonian {
    pub layout: SpaceLayout,
    pub drive: LaserDrive,
    pub energies: Vec<f64>,
}

impl Hamiltonian for DiagonalHamiltonian {
    fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    fn drive(&self) -> &LaserDrive {
        &self.drive
    }

    fn apply_signed(&self, _t: f64, sign: f64, psi: &[C64], out: &mut [C64]) {
        for ((o, p), e) in out.iter_mut().zip(psi).zip(&self.energies) {
            *o = *p * (sign * e);
        }
    }

    fn matrix_signed(&self, _t: f64, sign: f64) -> lightshift::hilbert::OperatorMatrix {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|e| C64::new(sign * e, 0.0)),
        ));
        lightshift::hilbert::OperatorMatrix::new(self.layout.clone(), d).unwrap()
    }
}

pub fn zero_vec(n: usize) -> Vec<C64> {
    vec![ZERO; n]
}
