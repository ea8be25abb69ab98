use crate::dynamics::{evolve_sliced, CompositeHamiltonian};
use crate::error::Result;
use crate::hilbert::StateVector;
#[allow(unused_imports)]
use num_traits::Float;

/// Step-doubling study on slice counts `n`, `2n`, `4n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceStudy {
    pub n_steps: usize,
    /// Max amplitude difference between the `n` and `2n` runs.
    pub coarse_difference: f64,
    /// Same between `2n` and `4n`.
    pub fine_difference: f64,
    /// `log2(coarse / fine)`.
    pub order: f64,
    /// Largest norm deviation among the three runs.
    pub norm_drift: f64,
}

pub fn convergence_order(h: &CompositeHamiltonian, initial: &StateVector, n_steps: usize) -> Result<ConvergenceStudy> {
    let a = evolve_sliced(h, initial, n_steps)?;
    let b = evolve_sliced(h, initial, 2 * n_steps)?;
    let c = evolve_sliced(h, initial, 4 * n_steps)?;
    let coarse = a.max_amplitude_difference(&b)?;
    let fine = b.max_amplitude_difference(&c)?;
    let norm_drift = [&a, &b, &c].iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(ConvergenceStudy {
        n_steps,
        coarse_difference: coarse,
        fine_difference: fine,
        order: (coarse / fine).log2(),
        norm_drift,
    })
}
