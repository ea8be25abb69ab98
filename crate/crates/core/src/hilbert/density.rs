use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{max_abs, StateVector, C64, HERMITIAN_TOL};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Positive semidefinite, unit-trace Hermitian matrix over a composite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
    dims: Vec<usize>,
}

/// Reduction of a composite state to one of its factors.
pub trait PartialTrace {
    /// Traces out every factor except `keep`.
    fn partial_trace(&self, keep: usize) -> Result<DensityOperator>;
}

impl DensityOperator {
    pub fn new(matrix: DMatrix<C64>, dims: Vec<usize>) -> Result<Self> {
        let d = matrix.nrows();
        if !matrix.is_square() || d == 0 || dims.iter().product::<usize>() != d {
            return Err(Error::DimensionMismatch { expected: dims.iter().product(), found: d });
        }
        let scale = max_abs(&matrix).max(1.0);
        if max_abs(&(&matrix - matrix.adjoint())) > HERMITIAN_TOL * scale {
            return Err(Error::Validation("density matrix is not Hermitian".into()));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::Validation(format!("density matrix trace {trace} != 1")));
        }
        let rho = Self { matrix: (&matrix + matrix.adjoint()).unscale(2.0), dims };
        let min = rho.eigenvalues()[0];
        if min < -1e-10 {
            return Err(Error::Validation(format!("density matrix has negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// `|psi><psi|`.
    pub fn pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        Self { matrix: a * a.adjoint(), dims: state.dims().to_vec() }
    }

    /// `I / d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim).unscale(dim as f64),
            dims: alloc::vec![dim],
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Von Neumann entropy in nats, eigenvalues clipped to `[0, 1]`.
    pub fn von_neumann_entropy(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .map(|l| l.clamp(0.0, 1.0))
            .filter(|&l| l > 0.0)
            .map(|l| -l * l.ln())
            .sum()
    }

    /// `<target|rho|target>`, clipped to `[0, 1]`.
    pub fn fidelity_pure(&self, target: &StateVector) -> Result<f64> {
        if target.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: target.dim() });
        }
        let t = target.amplitudes();
        Ok(t.dotc(&(&self.matrix * t)).re.clamp(0.0, 1.0))
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn dominant_eigenvector(&self) -> StateVector {
        let eig = self.matrix.clone().symmetric_eigen();
        let best = eig.eigenvalues.imax();
        let col: DVector<C64> = eig.eigenvectors.column(best).into_owned();
        let n = col.norm();
        StateVector::from_parts_unchecked(col.unscale(n), self.dims.clone())
    }
}

impl PartialTrace for StateVector {
    fn partial_trace(&self, keep: usize) -> Result<DensityOperator> {
        let (left, mid, right) = split_dims(self.dims(), keep)?;
        let a = self.amplitudes();
        let mut rho = DMatrix::<C64>::zeros(mid, mid);
        for l in 0..left {
            for r in 0..right {
                for i in 0..mid {
                    let ai = a[(l * mid + i) * right + r];
                    if ai.norm_sqr() == 0.0 {
                        continue;
                    }
                    for j in 0..mid {
                        rho[(i, j)] += ai * a[(l * mid + j) * right + r].conj();
                    }
                }
            }
        }
        Ok(DensityOperator { matrix: rho, dims: alloc::vec![mid] })
    }
}

impl PartialTrace for DensityOperator {
    fn partial_trace(&self, keep: usize) -> Result<DensityOperator> {
        let (left, mid, right) = split_dims(&self.dims, keep)?;
        let mut rho = DMatrix::<C64>::zeros(mid, mid);
        for l in 0..left {
            for r in 0..right {
                for i in 0..mid {
                    for j in 0..mid {
                        rho[(i, j)] += self.matrix[((l * mid + i) * right + r, (l * mid + j) * right + r)];
                    }
                }
            }
        }
        Ok(DensityOperator { matrix: rho, dims: alloc::vec![mid] })
    }
}

fn split_dims(dims: &[usize], keep: usize) -> Result<(usize, usize, usize)> {
    if dims.len() < 2 {
        return Err(Error::Validation("partial trace needs at least two factors".into()));
    }
    if keep >= dims.len() {
        return Err(Error::Validation(format!("factor index {keep} out of range for {} factors", dims.len())));
    }
    Ok((dims[..keep].iter().product(), dims[keep], dims[keep + 1..].iter().product()))
}
