use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use nalgebra::{DMatrix, DVector};
use once_cell::race::OnceBox;

use super::state::StateVector;
use super::{max_abs, TensorProduct, C64, DEGENERACY_TOL, HERMITIAN_TOL, MAX_COMPOSITE_DIM};
use crate::error::{Error, Result};

/// Eigendecomposition with eigenvalues ascending and orthonormal
/// eigenvectors in the matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

/// A group of (numerically) equal eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    /// Columns of [`Spectrum::vectors`] spanning the eigenspace.
    pub columns: Range<usize>,
}

/// One outcome of an ideal measurement and its Born probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornWeight {
    pub eigenvalue: f64,
    pub probability: f64,
}

/// Dense Hermitian matrix. Immutable; the spectrum is computed on first
/// use and shared by every later call.
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
    spectrum: OnceBox<Spectrum>,
}

impl HermitianOperator {
    /// Validates Hermiticity and stores the exactly symmetrized matrix.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Validation(format!(
                "operator must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() > MAX_COMPOSITE_DIM {
            return Err(Error::Sizing(format!("operator dimension {} too large", matrix.nrows())));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("operator has non-finite entries".into()));
        }
        let scale = max_abs(&matrix).max(1.0);
        let asym = max_abs(&(&matrix - matrix.adjoint()));
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::Validation(format!("operator is not Hermitian (|A - A^dagger| = {asym:e})")));
        }
        let sym = (&matrix + matrix.adjoint()).unscale(2.0);
        Ok(Self::from_matrix_unchecked(sym))
    }

    /// Real symmetric matrix given row-major.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Self::new(DMatrix::from_row_iterator(dim, dim, entries.iter().map(|&x| C64::new(x, 0.0))))
    }

    /// Operator with a known spectral decomposition `V diag(values) V^dagger`.
    /// The columns of `vectors` must be orthonormal.
    pub fn from_spectrum(values: Vec<f64>, vectors: DMatrix<C64>) -> Result<Self> {
        let d = values.len();
        if vectors.nrows() != d || vectors.ncols() != d || d == 0 {
            return Err(Error::DimensionMismatch { expected: d, found: vectors.ncols() });
        }
        let gram = vectors.adjoint() * &vectors;
        let dev = max_abs(&(gram - DMatrix::<C64>::identity(d, d)));
        if dev > 1e-10 {
            return Err(Error::Validation(format!("eigenvectors not orthonormal (deviation {dev:e})")));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let vectors = DMatrix::from_fn(d, d, |r, c| vectors[(r, order[c])]);
        let scaled = DMatrix::from_fn(d, d, |r, c| vectors[(r, c)] * values[c]);
        let m = &scaled * vectors.adjoint();
        let op = Self::from_matrix_unchecked((&m + m.adjoint()).unscale(2.0));
        let _ = op.spectrum.set(Box::new(Spectrum { values, vectors }));
        Ok(op)
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix, spectrum: OnceBox::new() }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::identity(dim, dim))
    }

    /// Real diagonal operator.
    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let vectors = DMatrix::identity(d, d);
        let matrix = DMatrix::from_diagonal(&DVector::from_iterator(d, values.iter().map(|&v| C64::new(v, 0.0))));
        let op = Self::from_matrix_unchecked(matrix);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted = order.iter().map(|&i| values[i]).collect();
        let vectors = DMatrix::from_fn(d, d, |r, c| vectors[(r, order[c])]);
        let _ = op.spectrum.set(Box::new(Spectrum { values: sorted, vectors }));
        op
    }

    pub fn pauli_x() -> Self {
        Self::spin_along([1.0, 0.0, 0.0])
    }

    pub fn pauli_y() -> Self {
        Self::spin_along([0.0, 1.0, 0.0])
    }

    pub fn pauli_z() -> Self {
        Self::spin_along([0.0, 0.0, 1.0])
    }

    /// `sigma . n` for a (not necessarily unit) 3-vector `n`.
    pub fn spin_along(n: [f64; 3]) -> Self {
        let [x, y, z] = n;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(z, 0.0), C64::new(x, -y), C64::new(x, y), C64::new(-z, 0.0)],
        );
        Self::from_matrix_unchecked(m)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Cached eigendecomposition, eigenvalues ascending.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| Box::new(decompose(&self.matrix)))
    }

    /// Alias of [`spectrum`](Self::spectrum) returning `(eigenvalues, eigenvectors)`.
    pub fn eigendecompose(&self) -> (&[f64], &DMatrix<C64>) {
        let s = self.spectrum();
        (&s.values, &s.vectors)
    }

    pub fn spectral_range(&self) -> f64 {
        let v = &self.spectrum().values;
        v[v.len() - 1] - v[0]
    }

    /// Largest |eigenvalue|.
    pub fn spectral_radius(&self) -> f64 {
        let v = &self.spectrum().values;
        v[0].abs().max(v[v.len() - 1].abs())
    }

    /// Eigenvalues grouped into levels; values closer than
    /// `DEGENERACY_TOL * range` to the first member of a group are merged.
    pub fn eigenspaces(&self) -> Vec<Eigenspace> {
        let values = &self.spectrum().values;
        let tol = DEGENERACY_TOL * (values[values.len() - 1] - values[0]);
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=values.len() {
            if i == values.len() || values[i] - values[start] > tol {
                let value = values[start..i].iter().sum::<f64>() / (i - start) as f64;
                out.push(Eigenspace { value, columns: start..i });
                start = i;
            }
        }
        out
    }

    /// `<psi|A|psi>`; the imaginary residual is discarded.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        self.check_dim(state.dim())?;
        let a = state.amplitudes();
        Ok(a.dotc(&(&self.matrix * a)).re)
    }

    /// Outcome probabilities of an ideal measurement of this operator.
    /// Outcomes with probability below 1e-14 are omitted.
    pub fn born_weights(&self, state: &StateVector) -> Result<Vec<BornWeight>> {
        self.check_dim(state.dim())?;
        let spectrum = self.spectrum();
        let projections = spectrum.vectors.adjoint() * state.amplitudes();
        Ok(self
            .eigenspaces()
            .into_iter()
            .map(|space| BornWeight {
                eigenvalue: space.value,
                probability: space.columns.map(|c| projections[c].norm_sqr()).sum(),
            })
            .filter(|w| w.probability >= 1e-14)
            .collect())
    }

    /// `A |psi>` as raw amplitudes.
    pub fn apply(&self, state: &StateVector) -> Result<DVector<C64>> {
        self.check_dim(state.dim())?;
        Ok(&self.matrix * state.amplitudes())
    }

    /// `exp(-i t A)`.
    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        self.function(|x| C64::from_polar(1.0, -x * t))
    }

    /// `V f(diag) V^dagger`.
    pub fn function(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let s = self.spectrum();
        let d = self.dim();
        let scaled = DMatrix::from_fn(d, d, |r, c| s.vectors[(r, c)] * f(s.values[c]));
        scaled * s.vectors.adjoint()
    }

    /// `e^{-i t A} |psi>`.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        self.check_dim(state.dim())?;
        let s = self.spectrum();
        let mut coeffs = s.vectors.adjoint() * state.amplitudes();
        for (c, &v) in coeffs.iter_mut().zip(s.values.iter()) {
            *c *= C64::from_polar(1.0, -v * t);
        }
        StateVector::from_unitary_image(&s.vectors * coeffs, state.dims().to_vec(), 1e-10)
    }

    /// `alpha A + beta B`.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.check_dim(other.dim())?;
        Ok(Self::from_matrix_unchecked(
            self.matrix.map(|z| z * alpha) + other.matrix.map(|z| z * beta),
        ))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self::from_matrix_unchecked(self.matrix.map(|z| z * alpha))
    }

    /// Largest entry of `|AB - BA|`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(max_abs(&(&self.matrix * &other.matrix - &other.matrix * &self.matrix)))
    }

    /// Matrix in the basis given by the columns of `basis`: `B^dagger A B`.
    pub fn in_basis(&self, basis: &DMatrix<C64>) -> DMatrix<C64> {
        basis.adjoint() * &self.matrix * basis
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: d });
        }
        Ok(())
    }
}

impl TensorProduct for HermitianOperator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let d = self.dim().saturating_mul(other.dim());
        if d > MAX_COMPOSITE_DIM {
            return Err(Error::Sizing(format!(
                "composite dimension {d} exceeds the limit {MAX_COMPOSITE_DIM}"
            )));
        }
        Ok(Self::from_matrix_unchecked(self.matrix.kronecker(&other.matrix)))
    }
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        let op = Self::from_matrix_unchecked(self.matrix.clone());
        if let Some(s) = self.spectrum.get() {
            let _ = op.spectrum.set(Box::new(s.clone()));
        }
        op
    }
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianOperator")
            .field("dim", &self.dim())
            .field("matrix", &self.matrix)
            .finish()
    }
}

fn decompose(matrix: &DMatrix<C64>) -> Spectrum {
    let d = matrix.nrows();
    let eig = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    for mut col in vectors.column_iter_mut() {
        let n = col.norm();
        col.unscale_mut(n);
    }
    Spectrum { values, vectors }
}
