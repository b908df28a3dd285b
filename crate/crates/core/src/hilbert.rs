//! Tensor-product Hilbert space for two qubits and a set of truncated
//! bosonic modes.
//!
//! Basis ordering is fixed: qubit 1 ⊗ qubit 2 ⊗ mode 1 ⊗ … ⊗ mode N, row-major,
//! so the last mode index varies fastest. Within a qubit factor index 0 is
//! `|e⟩` and index 1 is `|g⟩` (that is, `|e⟩ = (1, 0)ᵀ`).

use nalgebra::{DMatrix, DVector, Matrix4, Vector2, Vector4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A tensor factor of the space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Qubit(usize),
    Mode(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceLayout {
    qubit_count: usize,
    mode_dims: Vec<usize>,
    total_dim: usize,
}

impl SpaceLayout {
    pub fn new(qubit_count: usize, mode_dims: Vec<usize>) -> Result<Self> {
        if mode_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidLayout("mode dimension must be at least 1".into()));
        }
        let total_dim = (1usize << qubit_count) * mode_dims.iter().product::<usize>();
        Ok(Self {
            qubit_count,
            mode_dims,
            total_dim,
        })
    }

    /// Two qubits plus one mode per entry of `n_max` (dimension `n_max + 1`).
    pub fn two_qubits(n_max: &[usize]) -> Self {
        Self::new(2, n_max.iter().map(|n| n + 1).collect()).expect("non-zero dims")
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn mode_count(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn n_max(&self, mode: usize) -> usize {
        self.mode_dims[mode] - 1
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn internal_dim(&self) -> usize {
        1 << self.qubit_count
    }

    pub fn motional_dim(&self) -> usize {
        self.mode_dims.iter().product()
    }

    fn slot_position(&self, slot: Slot) -> Result<usize> {
        match slot {
            Slot::Qubit(q) if q < self.qubit_count => Ok(q),
            Slot::Mode(m) if m < self.mode_dims.len() => Ok(self.qubit_count + m),
            _ => Err(Error::SlotOutOfRange(format!("{slot:?}"))),
        }
    }

    fn factor_dims(&self) -> Vec<usize> {
        let mut dims = vec![2; self.qubit_count];
        dims.extend_from_slice(&self.mode_dims);
        dims
    }

    pub fn slot_dim(&self, slot: Slot) -> Result<usize> {
        let pos = self.slot_position(slot)?;
        Ok(self.factor_dims()[pos])
    }

    /// Distance in the flat index between consecutive levels of `slot`.
    pub fn stride(&self, slot: Slot) -> Result<usize> {
        let pos = self.slot_position(slot)?;
        Ok(self.factor_dims()[pos + 1..].iter().product())
    }

    /// Flat index of `|q₁ q₂ …⟩ ⊗ |n₁ n₂ …⟩`.
    pub fn index(&self, qubits: &[usize], fock: &[usize]) -> usize {
        debug_assert_eq!(qubits.len(), self.qubit_count);
        debug_assert_eq!(fock.len(), self.mode_dims.len());
        let mut idx = 0;
        for &q in qubits {
            idx = idx * 2 + q;
        }
        for (&n, &d) in fock.iter().zip(&self.mode_dims) {
            idx = idx * d + n;
        }
        idx
    }

    /// Fock occupations of every mode for a flat index.
    pub fn fock_numbers(&self, index: usize) -> Vec<usize> {
        let mut rest = index % self.motional_dim();
        let mut out = vec![0; self.mode_dims.len()];
        for (k, &d) in self.mode_dims.iter().enumerate().rev() {
            out[k] = rest % d;
            rest /= d;
        }
        out
    }

    /// Flat motional index of an occupation vector.
    pub fn motional_index(&self, fock: &[usize]) -> usize {
        fock.iter()
            .zip(&self.mode_dims)
            .fold(0, |acc, (&n, &d)| acc * d + n)
    }
}

/// Single-factor operators in the local basis of their slot.
pub mod ops {
    use super::*;

    /// σ₊ = |e⟩⟨g|.
    pub fn sigma_plus() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
    }

    pub fn sigma_minus() -> DMatrix<C64> {
        sigma_plus().adjoint()
    }

    pub fn sigma_z() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    pub fn sigma_x() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn identity(dim: usize) -> DMatrix<C64> {
        DMatrix::identity(dim, dim)
    }

    /// Truncated lowering operator: √n on the superdiagonal, so a|n⟩ = √n|n−1⟩.
    pub fn lowering(dim: usize) -> DMatrix<C64> {
        let mut a = DMatrix::zeros(dim, dim);
        for n in 1..dim {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        a
    }

    /// Truncated raising operator; a†|n_max⟩ = 0.
    pub fn raising(dim: usize) -> DMatrix<C64> {
        lowering(dim).adjoint()
    }

    pub fn number(dim: usize) -> DMatrix<C64> {
        DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                C64::new(r as f64, 0.0)
            } else {
                ZERO
            }
        })
    }
}

/// Single-qubit and two-qubit kets in the internal basis.
pub mod kets {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn e() -> Vector2<C64> {
        Vector2::new(ONE, ZERO)
    }

    pub fn g() -> Vector2<C64> {
        Vector2::new(ZERO, ONE)
    }

    /// |+⟩ = (|g⟩ + |e⟩)/√2.
    pub fn plus() -> Vector2<C64> {
        (g() + e()) * C64::new(FRAC_1_SQRT_2, 0.0)
    }

    /// |−⟩ = (|g⟩ − |e⟩)/√2.
    pub fn minus() -> Vector2<C64> {
        (g() - e()) * C64::new(FRAC_1_SQRT_2, 0.0)
    }

    pub fn pair(a: &Vector2<C64>, b: &Vector2<C64>) -> Vector4<C64> {
        Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    }

    /// β± = (|+−⟩ ± i|−+⟩)/√2.
    pub fn bell(sign: f64) -> Vector4<C64> {
        (pair(&plus(), &minus()) + pair(&minus(), &plus()) * C64::new(0.0, sign))
            * C64::new(FRAC_1_SQRT_2, 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: SpaceLayout,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(layout: SpaceLayout, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { layout, amplitudes })
    }

    /// Internal two-qubit state times a motional Fock state |n₁ n₂ …⟩.
    pub fn product(layout: &SpaceLayout, internal: &Vector4<C64>, fock: &[usize]) -> Result<Self> {
        if layout.qubit_count() != 2 {
            return Err(Error::InvalidLayout("product states need two qubits".into()));
        }
        if fock.len() != layout.mode_count() {
            return Err(Error::DimensionMismatch {
                expected: layout.mode_count(),
                found: fock.len(),
            });
        }
        for (m, &n) in fock.iter().enumerate() {
            if n > layout.n_max(m) {
                return Err(Error::SlotOutOfRange(format!("Fock level {n} in mode {m}")));
            }
        }
        let mut amps = DVector::zeros(layout.total_dim());
        let m_dim = layout.motional_dim();
        let m_idx = layout.motional_index(fock);
        for (k, &c) in internal.iter().enumerate() {
            amps[k * m_dim + m_idx] = c;
        }
        Ok(Self {
            layout: layout.clone(),
            amplitudes: amps,
        })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn normalize(&mut self) {
        let n = self.amplitudes.norm();
        if n > 0.0 {
            self.amplitudes.unscale_mut(n);
        }
    }

    pub fn normalized(&self) -> Self {
        let mut s = self.clone();
        s.normalize();
        s
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Population in states where any mode sits at its top retained level.
    pub fn top_level_population(&self) -> f64 {
        let layout = &self.layout;
        let mut worst: f64 = 0.0;
        for mode in 0..layout.mode_count() {
            let top = layout.n_max(mode);
            let pop: f64 = self
                .amplitudes
                .iter()
                .enumerate()
                .filter(|(i, _)| layout.fock_numbers(*i)[mode] == top)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            worst = worst.max(pop);
        }
        worst / self.norm_squared().max(f64::MIN_POSITIVE)
    }

    /// Mean occupation of `mode`.
    pub fn mean_phonons(&self, mode: usize) -> f64 {
        let n2 = self.norm_squared();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| self.layout.fock_numbers(i)[mode] as f64 * a.norm_sqr())
            .sum::<f64>()
            / n2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    layout: SpaceLayout,
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(layout: SpaceLayout, entries: DMatrix<C64>) -> Result<Self> {
        let d = layout.total_dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: entries.nrows(),
            });
        }
        Ok(Self { layout, entries })
    }

    pub fn zeros(layout: &SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self {
            layout: layout.clone(),
            entries: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(layout: &SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self {
            layout: layout.clone(),
            entries: DMatrix::identity(d, d),
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: self.entries.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: &self.entries * c,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: &self.entries + &other.entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: &self.entries - &other.entries,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            layout: self.layout.clone(),
            entries: &self.entries * &other.entries,
        }
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        StateVector {
            layout: psi.layout.clone(),
            amplitudes: &self.entries * &psi.amplitudes,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// ‖H − H†‖_max.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.entries[(r, c)] - self.entries[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// ‖U†U − I‖_max.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.entries.adjoint() * &self.entries;
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((prod[(r, c)] - target).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }
}

/// Kronecker product of per-slot local operators; slots not listed get identities.
pub fn kron_factors(layout: &SpaceLayout, factors: &[(Slot, &DMatrix<C64>)]) -> Result<OperatorMatrix> {
    let dims = layout.factor_dims();
    let mut locals: Vec<Option<&DMatrix<C64>>> = vec![None; dims.len()];
    for &(slot, op) in factors {
        let pos = layout.slot_position(slot)?;
        if op.nrows() != dims[pos] || op.ncols() != dims[pos] {
            return Err(Error::DimensionMismatch {
                expected: dims[pos],
                found: op.nrows(),
            });
        }
        locals[pos] = Some(op);
    }
    let mut acc = DMatrix::<C64>::identity(1, 1);
    for (pos, &d) in dims.iter().enumerate() {
        acc = match locals[pos] {
            Some(op) => acc.kronecker(op),
            None => acc.kronecker(&DMatrix::<C64>::identity(d, d)),
        };
    }
    OperatorMatrix::new(layout.clone(), acc)
}

/// `I ⊗ … ⊗ local_op ⊗ … ⊗ I` with `local_op` on `slot`.
pub fn embed(local_op: &DMatrix<C64>, slot: Slot, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    kron_factors(layout, &[(slot, local_op)])
}

pub fn annihilator(mode: usize, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    let d = layout.slot_dim(Slot::Mode(mode))?;
    embed(&ops::lowering(d), Slot::Mode(mode), layout)
}

pub fn creator(mode: usize, layout: &SpaceLayout) -> Result<OperatorMatrix> {
    Ok(annihilator(mode, layout)?.adjoint())
}

/// Reduced two-qubit density matrix of a pure state (normalized on the fly).
pub fn partial_trace_internal(psi: &StateVector) -> Matrix4<C64> {
    let m = psi.layout.motional_dim();
    let a = &psi.amplitudes;
    let mut rho = Matrix4::zeros();
    for i in 0..4 {
        for j in i..4 {
            let mut acc = ZERO;
            for k in 0..m {
                acc += a[i * m + k] * a[j * m + k].conj();
            }
            rho[(i, j)] = acc;
            rho[(j, i)] = acc.conj();
        }
    }
    let tr = rho.trace().re;
    if tr > 0.0 {
        rho.unscale_mut(tr);
    }
    rho
}

/// Density operator on the full space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: SpaceLayout,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(layout: SpaceLayout, entries: DMatrix<C64>) -> Result<Self> {
        let d = layout.total_dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: entries.nrows(),
            });
        }
        Ok(Self { layout, entries })
    }

    pub fn pure(psi: &StateVector) -> Self {
        let p = psi.normalized();
        Self {
            layout: p.layout.clone(),
            entries: &p.amplitudes * p.amplitudes.adjoint(),
        }
    }

    pub fn zeros(layout: &SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self {
            layout: layout.clone(),
            entries: DMatrix::zeros(d, d),
        }
    }

    /// Adds `weight · |ψ⟩⟨ψ|` with ψ normalized.
    pub fn accumulate(&mut self, psi: &StateVector, weight: f64) {
        let n2 = psi.norm_squared();
        let w = weight / n2;
        let a = &psi.amplitudes;
        let d = a.len();
        for c in 0..d {
            let ac = a[c].conj() * w;
            if ac == ZERO {
                continue;
            }
            for r in 0..d {
                self.entries[(r, c)] += a[r] * ac;
            }
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn partial_trace_internal(&self) -> Matrix4<C64> {
        let m = self.layout.motional_dim();
        let mut rho = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = ZERO;
                for k in 0..m {
                    acc += self.entries[(i * m + k, j * m + k)];
                }
                rho[(i, j)] = acc;
            }
        }
        rho
    }

    /// ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.entries - &other.entries;
        let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::new(herm);
        0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>()
    }
}

/// Compressed-row complex matrix for repeated matrix-vector products.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != ZERO {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_operator(op: &OperatorMatrix) -> Self {
        Self::from_dense(&op.entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// out += coef · M x
    #[inline]
    pub fn apply_add(&self, coef: C64, x: &[C64], out: &mut [C64]) {
        for r in 0..self.dim {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            if lo == hi {
                continue;
            }
            let mut acc = ZERO;
            for k in lo..hi {
                acc += self.vals[k] * x[self.cols[k]];
            }
            out[r] += coef * acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        self.apply_add(ONE, x, &mut out);
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_dense(&self.to_dense().adjoint())
    }
}

/// Applies a square `local` matrix on one tensor factor of a flat vector.
pub(crate) fn apply_on_factor(
    local: &DMatrix<C64>,
    stride: usize,
    dim: usize,
    x: &[C64],
    out: &mut [C64],
) {
    let block = stride * dim;
    let total = x.len();
    for base in (0..total).step_by(block) {
        for inner in 0..stride {
            let off = base + inner;
            for r in 0..dim {
                let mut acc = ZERO;
                for c in 0..dim {
                    let m = local[(r, c)];
                    if m != ZERO {
                        acc += m * x[off + c * stride];
                    }
                }
                out[off + r * stride] = acc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn layout22() -> SpaceLayout {
        SpaceLayout::two_qubits(&[3, 2])
    }

    #[test]
    fn layout_dims() {
        let l = layout22();
        assert_eq!(l.total_dim(), 4 * 4 * 3);
        assert_eq!(l.motional_dim(), 12);
        assert_eq!(l.stride(Slot::Qubit(0)).unwrap(), 24);
        assert_eq!(l.stride(Slot::Mode(1)).unwrap(), 1);
        let idx = l.index(&[1, 0], &[2, 1]);
        assert_eq!(l.fock_numbers(idx), vec![2, 1]);
        assert!(SpaceLayout::new(2, vec![3, 0]).is_err());
    }

    #[test]
    fn embed_identity_is_identity() {
        let l = layout22();
        let op = embed(&ops::identity(2), Slot::Qubit(0), &l).unwrap();
        assert_eq!(op, OperatorMatrix::identity(&l));
    }

    #[test]
    fn sigma_plus_raises_first_qubit() {
        let l = layout22();
        let sp = embed(&ops::sigma_plus(), Slot::Qubit(0), &l).unwrap();
        let gg00 = StateVector::product(&l, &kets::pair(&kets::g(), &kets::g()), &[0, 0]).unwrap();
        let eg00 = StateVector::product(&l, &kets::pair(&kets::e(), &kets::g()), &[0, 0]).unwrap();
        let out = sp.apply(&gg00);
        assert_abs_diff_eq!((out.inner(&eg00) - ONE).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.norm_squared(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn creation_matrix_element() {
        let l = layout22();
        let ad = creator(0, &l).unwrap();
        let gg = kets::pair(&kets::g(), &kets::g());
        let s1 = StateVector::product(&l, &gg, &[1, 0]).unwrap();
        let s2 = StateVector::product(&l, &gg, &[2, 0]).unwrap();
        let out = ad.apply(&s1);
        assert_abs_diff_eq!(out.inner(&s2).re, 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(out.norm_squared(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn ladder_truncation() {
        let a = ops::lowering(5);
        assert_eq!(a[(0, 1)], ONE);
        let ad = ops::raising(5);
        let top = DVector::from_fn(5, |i, _| if i == 4 { ONE } else { ZERO });
        assert_eq!((&ad * top).norm(), 0.0);
        // [a, a†] = I except the top level, where it is −n_max.
        let comm = &a * &ad - &ad * &a;
        for n in 0..4 {
            assert_abs_diff_eq!((comm[(n, n)] - ONE).norm(), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(comm[(4, 4)].re, -4.0, epsilon = 1e-14);
        let off: f64 = (0..5)
            .flat_map(|r| (0..5).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| comm[(r, c)].norm())
            .sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn embed_errors() {
        let l = layout22();
        assert!(matches!(
            embed(&ops::identity(3), Slot::Qubit(0), &l),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            embed(&ops::identity(2), Slot::Qubit(2), &l),
            Err(Error::SlotOutOfRange(_))
        ));
        assert!(annihilator(2, &l).is_err());
    }

    #[test]
    fn same_slot_products_and_commuting_slots() {
        let l = layout22();
        let a = ops::lowering(4);
        let ad = ops::raising(4);
        let lhs = embed(&a, Slot::Mode(0), &l).unwrap().mul(&embed(&ad, Slot::Mode(0), &l).unwrap());
        let rhs = embed(&(&a * &ad), Slot::Mode(0), &l).unwrap();
        assert!(lhs.sub(&rhs).max_abs() < 1e-12);

        let s = embed(&ops::sigma_plus(), Slot::Qubit(1), &l).unwrap();
        let b = annihilator(1, &l).unwrap();
        assert!(s.mul(&b).sub(&b.mul(&s)).max_abs() < 1e-12);
    }

    #[test]
    fn trace_of_product_state() {
        let l = layout22();
        let pm = kets::pair(&kets::plus(), &kets::minus());
        let psi = StateVector::product(&l, &pm, &[0, 0]).unwrap();
        let rho = partial_trace_internal(&psi);
        let expected = pm * pm.adjoint();
        assert!((rho - expected).norm() < 1e-14);
    }

    #[test]
    fn orthogonal_motional_flags_give_mixture() {
        let l = layout22();
        let pm = kets::pair(&kets::plus(), &kets::minus());
        let mp = kets::pair(&kets::minus(), &kets::plus());
        let a = StateVector::product(&l, &pm, &[0, 0]).unwrap();
        let b = StateVector::product(&l, &mp, &[1, 0]).unwrap();
        let psi = StateVector::new(
            l.clone(),
            (a.amplitudes() + b.amplitudes()) * C64::new(0.5f64.sqrt(), 0.0),
        )
        .unwrap();
        let rho = partial_trace_internal(&psi);
        let expected = (pm * pm.adjoint() + mp * mp.adjoint()) * C64::new(0.5, 0.0);
        assert!((rho - expected).norm() < 1e-14);
    }

    #[test]
    fn thermal_mixture_of_bell_state_traces_to_pure() {
        let l = layout22();
        let beta = kets::bell(-1.0);
        let mut rho = DensityMatrix::zeros(&l);
        let (p1, p2) = ([0.5, 0.25, 0.125, 0.125], [0.9, 0.09, 0.01]);
        for (n1, w1) in p1.iter().enumerate() {
            for (n2, w2) in p2.iter().enumerate() {
                let psi = StateVector::product(&l, &beta, &[n1, n2]).unwrap();
                rho.accumulate(&psi, w1 * w2);
            }
        }
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
        let red = rho.partial_trace_internal();
        assert!((red - beta * beta.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn sparse_matches_dense() {
        let l = layout22();
        let op = embed(&ops::sigma_plus(), Slot::Qubit(0), &l)
            .unwrap()
            .mul(&annihilator(0, &l).unwrap());
        let sp = SparseOperator::from_operator(&op);
        let x: Vec<C64> = (0..l.total_dim()).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let dense = op.entries() * DVector::from_column_slice(&x);
        let got = sp.apply(&x);
        for (a, b) in got.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((sp.adjoint().to_dense() - op.adjoint().into_entries()).norm() < 1e-14);
    }

    #[test]
    fn factor_application_matches_embedding() {
        let l = layout22();
        let local = ops::lowering(4) + ops::raising(4) * C64::new(0.3, 0.2);
        let full = embed(&local, Slot::Mode(0), &l).unwrap();
        let x: Vec<C64> = (0..l.total_dim()).map(|k| C64::new((k as f64).sin(), (k as f64).cos())).collect();
        let mut out = vec![ZERO; x.len()];
        apply_on_factor(&local, l.stride(Slot::Mode(0)).unwrap(), 4, &x, &mut out);
        let expect = full.entries() * DVector::from_column_slice(&x);
        for (a, b) in out.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
