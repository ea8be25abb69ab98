use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{HermitianOperator, PointerGrid, StateVector, C64};

/// Branch packets must stay this many RMS widths inside the box.
pub const BRANCH_MARGIN_WIDTHS: f64 = 4.0;

/// Closed form of an impulsive coupling `Q_S (x) Q_A` with unit integral and
/// free Hamiltonians neglected: each `Q_S` eigencomponent of the system
/// carries the pointer translated by its eigenvalue.
pub fn impulsive_propagator(q_system: &HermitianOperator, grid: &PointerGrid, initial: &StateVector) -> Result<StateVector> {
    let ds = q_system.dim();
    let n = grid.n_points();
    if initial.dim() != ds * n {
        return Err(Error::DimensionMismatch { expected: ds * n, found: initial.dim() });
    }
    let amps = DMatrix::from_row_slice(ds, n, initial.amplitudes().as_slice());
    let spectrum = q_system.spectrum();
    let mut branches = spectrum.vectors.adjoint() * amps;

    let mut marginal = alloc::vec![0.0; n];
    for (a, m) in marginal.iter_mut().enumerate() {
        *m = (0..ds).map(|s| initial.amplitudes()[s * n + a].norm_sqr()).sum();
    }
    let (centre, width) = grid.moments(&marginal);
    let margin = BRANCH_MARGIN_WIDTHS * width;

    let plan = grid.fft();
    let mut row: Vec<C64> = alloc::vec![C64::new(0.0, 0.0); n];
    for (i, &s) in spectrum.values.iter().enumerate() {
        let weight: f64 = branches.row(i).iter().map(|z| z.norm_sqr()).sum();
        if weight < 1e-14 {
            continue;
        }
        let lo = centre + s - margin;
        let hi = centre + s + margin;
        if lo < grid.r_min() || hi > grid.r_max() {
            return Err(Error::Sizing(format!(
                "branch shifted by {s} spans [{lo}, {hi}], outside box [{}, {}]",
                grid.r_min(),
                grid.r_max()
            )));
        }
        for (a, z) in row.iter_mut().enumerate() {
            *z = branches[(i, a)];
        }
        grid.translate(&plan, &mut row, s);
        for (a, z) in row.iter().enumerate() {
            branches[(i, a)] = *z;
        }
    }
    let out = &spectrum.vectors * branches;
    let flat: Vec<C64> = (0..ds).flat_map(|s| out.row(s).iter().copied().collect::<Vec<_>>()).collect();
    StateVector::from_unitary_image(nalgebra::DVector::from_vec(flat), alloc::vec![ds, n], 1e-10)
}
