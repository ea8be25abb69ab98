use alloc::format;

use super::CompositeHamiltonian;
use crate::error::{Error, Result};
use crate::hilbert::{HermitianOperator, StateVector, DEGENERACY_TOL};

/// First-order adiabatic outcome of a protective run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Expected pointer displacement `<nu|Q_S|nu>`.
    pub shift: f64,
    /// Dynamical phase `-E_nu T` of the protected eigenstate.
    pub final_phase: f64,
    /// `max_{mu != nu} |<mu|Q_S|nu>| q_max / (T |E_mu - E_nu|)`, where
    /// `q_max` is the spectral radius of `Q_A`. Small means adiabatic.
    pub validity: f64,
}

/// Eigenvector `nu_index` (ascending order) of `h`, which must be
/// non-degenerate.
pub fn system_eigenstate(h: &HermitianOperator, nu_index: usize) -> Result<StateVector> {
    let spectrum = h.spectrum();
    let d = spectrum.values.len();
    if nu_index >= d {
        return Err(Error::Validation(format!("eigenstate index {nu_index} out of range for dimension {d}")));
    }
    let e = spectrum.values[nu_index];
    let tol = DEGENERACY_TOL * h.spectral_range();
    let gap = spectrum
        .values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != nu_index)
        .map(|(_, v)| (v - e).abs())
        .fold(f64::INFINITY, f64::min);
    if gap <= tol {
        return Err(Error::Precondition(format!(
            "eigenstate {nu_index} (energy {e}) is degenerate: gap {gap:e}"
        )));
    }
    StateVector::new(spectrum.vectors.column(nu_index).iter().copied().collect(), alloc::vec![d])
}

pub fn first_order_prediction(h: &CompositeHamiltonian, nu_index: usize) -> Result<Prediction> {
    let nu = system_eigenstate(h.h_system(), nu_index)?;
    let spectrum = h.h_system().spectrum();
    let total_time = h.profile().total_time();
    let q_nu = h.q_system().apply(&nu)?;
    let q_max = h.apparatus().observable_radius();
    let e_nu = spectrum.values[nu_index];
    let mut validity: f64 = 0.0;
    for (mu, &e_mu) in spectrum.values.iter().enumerate() {
        if mu == nu_index {
            continue;
        }
        let element = spectrum.vectors.column(mu).dotc(&q_nu).norm();
        validity = validity.max(element * q_max / (total_time * (e_mu - e_nu).abs()));
    }
    Ok(Prediction { shift: h.q_system().expectation(&nu)?, final_phase: -e_nu * total_time, validity })
}
