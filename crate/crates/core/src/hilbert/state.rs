use alloc::vec::Vec;
use alloc::{format, vec};

use nalgebra::DVector;

use super::{C64, MAX_COMPOSITE_DIM};
#[cfg(test)]
use super::NORM_TOL;
use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Normalized amplitude vector over a composite basis.
///
/// Amplitudes are stored row-major over the factors: for dims `[d0, d1]`
/// the amplitude of `|i> (x) |j>` sits at `i * d1 + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    dims: Vec<usize>,
}

/// Kronecker product of two objects of the same kind.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl StateVector {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let mut v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Validation(format!("cannot normalize state of norm {norm}")));
        }
        v.unscale_mut(norm);
        Ok(Self { amplitudes: v, dims })
    }

    /// Single-factor state from amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let d = amplitudes.len();
        Self::new(amplitudes, vec![d])
    }

    /// Basis state `|index>` of a single factor of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Validation(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(amps, vec![dim])
    }

    /// Qubit state `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        let amps = vec![
            C64::new((theta / 2.0).cos(), 0.0),
            C64::from_polar((theta / 2.0).sin(), phi),
        ];
        Self { amplitudes: DVector::from_vec(amps), dims: vec![2] }
    }

    /// Wraps amplitudes produced by a unitary map, checking the norm.
    pub(crate) fn from_unitary_image(amplitudes: DVector<C64>, dims: Vec<usize>, tol: f64) -> Result<Self> {
        let drift = (amplitudes.norm() - 1.0).abs();
        if drift > tol {
            return Err(Error::Validation(format!("norm drifted by {drift:e} under a unitary map")));
        }
        Ok(Self { amplitudes, dims })
    }

    pub(crate) fn from_parts_unchecked(amplitudes: DVector<C64>, dims: Vec<usize>) -> Self {
        debug_assert_eq!(amplitudes.len(), dims.iter().product::<usize>());
        Self { amplitudes, dims }
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        self.inner(other).map(|z| z.norm_sqr())
    }

    /// Same amplitudes viewed with a different factorization.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        check_dims(self.dim(), &dims)?;
        Ok(Self { amplitudes: self.amplitudes.clone(), dims })
    }

    /// Probability of each basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Largest elementwise amplitude difference.
    pub fn max_amplitude_difference(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm())))
    }
}

impl TensorProduct for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let d = self.dim().saturating_mul(other.dim());
        if d > MAX_COMPOSITE_DIM {
            return Err(Error::Sizing(format!(
                "composite dimension {d} exceeds the limit {MAX_COMPOSITE_DIM}"
            )));
        }
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(Self { amplitudes, dims })
    }
}

fn check_dims(len: usize, dims: &[usize]) -> Result<()> {
    if len == 0 || dims.is_empty() || dims.contains(&0) {
        return Err(Error::Validation(format!("empty state or factor: len {len}, dims {dims:?}")));
    }
    if len > MAX_COMPOSITE_DIM {
        return Err(Error::Sizing(format!("dimension {len} exceeds the limit {MAX_COMPOSITE_DIM}")));
    }
    let product: usize = dims.iter().product();
    if product != len {
        return Err(Error::DimensionMismatch { expected: product, found: len });
    }
    Ok(())
}
