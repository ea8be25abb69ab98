//! Finite-dimensional Hilbert-space primitives: state vectors, Hermitian
//! operators with cached spectra, density operators and the discretized
//! pointer coordinate.

mod density;
pub mod fourier;
mod operator;
mod pointer;
mod state;

pub use density::{DensityOperator, PartialTrace};
pub use operator::{BornWeight, Eigenspace, HermitianOperator, Spectrum};
pub use pointer::PointerGrid;
pub(crate) use pointer::moments;
pub use state::{StateVector, TensorProduct};

pub use num_complex::Complex64 as C64;

/// Largest composite dimension (number of amplitudes) any constructor accepts.
pub const MAX_COMPOSITE_DIM: usize = 1 << 18;

/// Absolute tolerance on `A - A^dagger`, scaled by `max(1, max|A_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Allowed deviation of `<psi|psi>` from one.
pub const NORM_TOL: f64 = 1e-12;

/// Relative gap (in units of the spectral range) under which two
/// eigenvalues are treated as one level.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &nalgebra::DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
