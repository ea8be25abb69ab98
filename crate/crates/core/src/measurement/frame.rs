use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::PacketSpec;
use crate::error::{Error, Result};
use crate::hilbert::{HermitianOperator, PointerGrid, StateVector, C64, DEGENERACY_TOL};
#[allow(unused_imports)]
use num_traits::Float;

/// Widths of clearance a pointer readout needs from the box edge.
pub const EDGE_MARGIN_WIDTHS: f64 = 4.0;

/// Largest tolerated pointer mass inside the edge margin.
pub const EDGE_MASS_LIMIT: f64 = 0.01;

/// Centroid and RMS width of a pointer distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub centroid: f64,
    pub width: f64,
}

/// Pointer readout of a composite state on a grid: moments of the marginal
/// `sum_s |psi(s, r)|^2`.
pub fn readout(state: &StateVector, grid: &PointerGrid) -> Result<Readout> {
    let weights = grid_marginal(state, grid.n_points())?;
    let coords = grid.r_values();
    let r = moments(&coords, &weights);
    check_edges(&coords, &weights, grid.r_min(), grid.r_max(), EDGE_MARGIN_WIDTHS * r.width)?;
    Ok(r)
}

fn grid_marginal(state: &StateVector, n: usize) -> Result<Vec<f64>> {
    if !state.dim().is_multiple_of(n) {
        return Err(Error::DimensionMismatch { expected: n, found: state.dim() });
    }
    let mut weights = vec![0.0; n];
    for (k, z) in state.amplitudes().iter().enumerate() {
        weights[k % n] += z.norm_sqr();
    }
    Ok(weights)
}

fn moments(coords: &[f64], weights: &[f64]) -> Readout {
    let (centroid, width) = crate::hilbert::moments(coords, weights);
    Readout { centroid, width }
}

fn check_edges(coords: &[f64], weights: &[f64], lo: f64, hi: f64, margin: f64) -> Result<()> {
    let total: f64 = weights.iter().sum();
    let edge_mass = coords
        .iter()
        .zip(weights)
        .filter(|(x, _)| **x < lo + margin || **x >= hi - margin)
        .map(|(_, w)| w)
        .sum::<f64>()
        / total;
    if edge_mass > EDGE_MASS_LIMIT {
        return Err(Error::Wraparound { edge_mass, margin });
    }
    Ok(())
}

/// Discrete coordinate conjugate to an apparatus observable `Y`.
///
/// With `y_j` the eigenvalues of `Y` and `|y_j>` its eigenvectors, the
/// spectrum is mapped onto a uniform ladder `k_j` of spacing
/// `delta = (y_max - y_min)/(d - 1)` and
/// `|z_m> = d^{-1/2} sum_j exp(-i k_j z_m) |y_j>`, `z_m = (m - d/2) L/d`,
/// `L = 2 pi / delta`. `exp(-i s Y)` then moves packets in `z` by `+s`
/// (exactly for an evenly spaced spectrum).
///
/// Readout happens in the interaction picture of the apparatus Hamiltonian,
/// so free phases in the `H_A` eigenbasis do not smear the packet.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateFrame {
    coords: Vec<f64>,
    length: f64,
    /// Column `m` is `|z_m>` in the apparatus basis.
    basis: DMatrix<C64>,
    free: HermitianOperator,
}

impl ConjugateFrame {
    pub fn new(y: &HermitianOperator, h_apparatus: &HermitianOperator) -> Result<Self> {
        let d = y.dim();
        if h_apparatus.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: h_apparatus.dim() });
        }
        let spectrum = y.spectrum();
        let range = y.spectral_range();
        if d < 2 || range <= DEGENERACY_TOL * y.spectral_radius().max(1.0) {
            return Err(Error::Setup(format!(
                "Y spectrum is fully degenerate (range {range:e}); no conjugate coordinate"
            )));
        }
        let delta = range / (d - 1) as f64;
        let length = 2.0 * PI / delta;
        let dz = length / d as f64;
        let coords: Vec<f64> = (0..d).map(|m| (m as f64 - (d / 2) as f64) * dz).collect();
        let mean = spectrum.values.iter().sum::<f64>() / d as f64;
        let ks: Vec<f64> = (0..d).map(|j| spectrum.values[0] + j as f64 * delta - mean).collect();
        let norm = 1.0 / (d as f64).sqrt();
        let fourier = DMatrix::from_fn(d, d, |j, m| C64::from_polar(norm, -ks[j] * coords[m]));
        Ok(Self { coords, length, basis: canonical_phases(&spectrum.vectors) * fourier, free: h_apparatus.clone() })
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coords
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.coords.len() as f64
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Gaussian packet in `z`; requires `spacing <= width <= length/8`.
    pub fn packet(&self, center: f64, width: f64) -> Result<StateVector> {
        if !(width >= self.spacing()) || !(width <= self.length / 8.0) {
            return Err(Error::Sizing(format!(
                "conjugate packet width {width} violates spacing <= width <= length/8 (spacing {}, length {})",
                self.spacing(),
                self.length
            )));
        }
        let half = self.length / 2.0;
        if !(center >= -half && center < half) {
            return Err(Error::Sizing(format!("packet centre {center} outside [{}, {half})", -half)));
        }
        let a = DVector::from_iterator(
            self.coords.len(),
            self.coords.iter().map(|z| C64::new((-(z - center).powi(2) / (4.0 * width * width)).exp(), 0.0)),
        );
        let d = self.coords.len();
        StateVector::new((&self.basis * a).iter().copied().collect(), vec![d])
    }

    /// Distribution over `z` of a composite state (system factor first)
    /// after `time` of apparatus free evolution has been undone.
    pub fn marginal(&self, state: &StateVector, time: f64) -> Result<Vec<f64>> {
        let d = self.coords.len();
        if !state.dim().is_multiple_of(d) {
            return Err(Error::DimensionMismatch { expected: d, found: state.dim() });
        }
        let undo = self.free.unitary(-time);
        let project = self.basis.adjoint() * undo;
        let mut weights = vec![0.0; d];
        for row in state.amplitudes().as_slice().chunks(d) {
            let z = &project * DVector::from_column_slice(row);
            for (w, a) in weights.iter_mut().zip(z.iter()) {
                *w += a.norm_sqr();
            }
        }
        Ok(weights)
    }

    pub fn readout(&self, state: &StateVector, time: f64) -> Result<Readout> {
        let weights = self.marginal(state, time)?;
        let r = moments(&self.coords, &weights);
        let half = self.length / 2.0;
        let margin = (EDGE_MARGIN_WIDTHS * r.width).min(self.length / 8.0);
        check_edges(&self.coords, &weights, -half, half, margin)?;
        Ok(r)
    }
}

/// Rotates each column so its largest-modulus entry is real and positive.
fn canonical_phases(vectors: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = vectors.clone();
    for mut col in out.column_iter_mut() {
        let pivot = col.iter().copied().fold(C64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
        let phase = pivot.conj() / pivot.norm();
        col.iter_mut().for_each(|z| *z *= phase);
    }
    out
}

/// Where the pointer is prepared and read.
#[derive(Debug, Clone, PartialEq)]
pub enum PointerFrame {
    Grid(PointerGrid),
    Conjugate(ConjugateFrame),
}

impl PointerFrame {
    pub fn prepare(&self, packet: &PacketSpec) -> Result<StateVector> {
        match self {
            Self::Grid(grid) => grid.gaussian_packet(packet.center, packet.width),
            Self::Conjugate(frame) => frame.packet(packet.center, packet.width),
        }
    }

    /// Readout of a composite state at time `time` after preparation.
    pub fn readout(&self, state: &StateVector, time: f64) -> Result<Readout> {
        match self {
            Self::Grid(grid) => readout(state, grid),
            Self::Conjugate(frame) => frame.readout(state, time),
        }
    }
}
