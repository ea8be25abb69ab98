use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{Apparatus, CompositeHamiltonian};
use crate::error::{Error, Result};
use crate::hilbert::fourier::FftPlan;
use crate::hilbert::{max_abs, HermitianOperator, StateVector, C64};
#[allow(unused_imports)]
use num_traits::Float;

/// Smallest slice count accepted by [`propagate`].
pub const MIN_STEPS: usize = 16;

/// Step-doubling controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Initial number of slices; doubled until the Richardson estimate
    /// drops below `tolerance`.
    pub n_steps: usize,
    /// Bound on the estimated max amplitude error of the final state.
    pub tolerance: f64,
    /// Doubling cap.
    pub max_steps: usize,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { n_steps: 64, tolerance: 1e-8, max_steps: 1 << 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationReport {
    pub n_steps: usize,
    pub step_size: f64,
    pub richardson_error_estimate: f64,
    pub norm_drift: f64,
}

/// Time-ordered evolution over `[0, T]` with error control.
///
/// Each of the `n` slices applies `exp(-i H_k dt)`, `H_k` being the
/// Hamiltonian at the slice-averaged coupling. The run with `n` slices is
/// compared against the one with `n/2`; their max amplitude difference
/// divided by 3 is the Richardson estimate of the fine run's error.
pub fn propagate(
    h: &CompositeHamiltonian,
    initial: &StateVector,
    options: &PropagationOptions,
) -> Result<(StateVector, PropagationReport)> {
    if options.n_steps < MIN_STEPS {
        return Err(Error::Validation(format!("n_steps {} below minimum {MIN_STEPS}", options.n_steps)));
    }
    let engine = Engine::build(h, initial)?;
    let mut n = options.n_steps;
    let mut coarse = engine.run(initial.amplitudes(), n / 2);
    loop {
        let fine = engine.run(initial.amplitudes(), n);
        let estimate = max_difference(&fine, &coarse) / 3.0;
        if estimate <= options.tolerance {
            let norm_drift = (fine.norm() - 1.0).abs();
            if norm_drift >= 1e-8 {
                return Err(Error::Validation(format!("norm drift {norm_drift:e} after propagation")));
            }
            let report = PropagationReport {
                n_steps: n,
                step_size: h.profile().total_time() / n as f64,
                richardson_error_estimate: estimate,
                norm_drift,
            };
            return Ok((StateVector::from_parts_unchecked(fine, engine.dims()), report));
        }
        if n.saturating_mul(2) > options.max_steps {
            return Err(Error::Convergence { estimate, n_steps: n });
        }
        coarse = fine;
        n *= 2;
    }
}

/// The bare sliced product with `n_steps` slices, no error control.
pub fn evolve_sliced(h: &CompositeHamiltonian, initial: &StateVector, n_steps: usize) -> Result<StateVector> {
    if n_steps == 0 {
        return Err(Error::Validation("n_steps must be positive".into()));
    }
    let engine = Engine::build(h, initial)?;
    let out = engine.run(initial.amplitudes(), n_steps);
    StateVector::from_unitary_image(out, engine.dims(), 1e-10)
}

fn max_difference(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

fn coupling_key(g: f64) -> i64 {
    (g * 1e12).round() as i64
}

/// Orthonormal apparatus basis in which both `H_A` (up to a coordinate
/// potential) and `Q_A` are diagonal.
enum Basis {
    Fourier(FftPlan),
    Matrix { vectors: DMatrix<C64>, adjoint: DMatrix<C64> },
}

impl Basis {
    fn to_eigen(&self, row: &mut [C64]) {
        match self {
            Basis::Fourier(plan) => plan.forward(row),
            Basis::Matrix { adjoint, .. } => {
                let c = adjoint * DVector::from_column_slice(row);
                row.copy_from_slice(c.as_slice());
            }
        }
    }

    fn to_coordinates(&self, row: &mut [C64]) {
        match self {
            Basis::Fourier(plan) => plan.inverse(row),
            Basis::Matrix { vectors, .. } => {
                let c = vectors * DVector::from_column_slice(row);
                row.copy_from_slice(c.as_slice());
            }
        }
    }
}

/// The Hamiltonian restricted to one apparatus eigenvector `j` is the
/// system matrix `H_S + g q_j Q_S + e_j`.
struct Block {
    basis: Basis,
    energies: Vec<f64>,
    charges: Vec<f64>,
}

enum Kind {
    Block(Block),
    /// Strang splitting around a potential diagonal in the pointer coordinate.
    Split { block: Block, potential: Vec<f64> },
    Dense { free: DMatrix<C64>, coupling: DMatrix<C64> },
}

struct Engine<'a> {
    h: &'a CompositeHamiltonian,
    kind: Kind,
}

impl<'a> Engine<'a> {
    fn build(h: &'a CompositeHamiltonian, initial: &StateVector) -> Result<Self> {
        if initial.dim() != h.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), found: initial.dim() });
        }
        let kind = match h.apparatus() {
            Apparatus::Grid(g) => {
                let charges = g.grid().wavenumbers();
                let mut energies = g.kinetic_energies();
                let basis = Basis::Fourier(g.grid().fft());
                match g.potential() {
                    Some(v) if !g.commutes() => {
                        Kind::Split { block: Block { basis, energies, charges }, potential: v.to_vec() }
                    }
                    Some(v) => {
                        energies.iter_mut().for_each(|e| *e += v[0]);
                        Kind::Block(Block { basis, energies, charges })
                    }
                    None => Kind::Block(Block { basis, energies, charges }),
                }
            }
            Apparatus::Levels { hamiltonian, observable } => match common_basis(hamiltonian, observable) {
                Some(block) => Kind::Block(block),
                None => {
                    let (free, coupling) = h.dense_parts();
                    Kind::Dense { free, coupling }
                }
            },
        };
        Ok(Self { h, kind })
    }

    fn dims(&self) -> Vec<usize> {
        vec![self.h.system_dim(), self.h.apparatus_dim()]
    }

    fn run(&self, initial: &DVector<C64>, n: usize) -> DVector<C64> {
        let profile = self.h.profile();
        let dt = profile.total_time() / n as f64;
        let ds = self.h.system_dim();
        let da = self.h.apparatus_dim();
        let mut psi: Vec<C64> = initial.iter().copied().collect();
        match &self.kind {
            Kind::Block(block) => {
                for row in psi.chunks_mut(da) {
                    block.basis.to_eigen(row);
                }
                let mut cache = StepCache::default();
                for k in 0..n {
                    let g = profile.step_coupling(k, n);
                    cache.refresh(g, || self.block_unitaries(block, g, dt));
                    apply_block(&cache.unitaries, &mut psi, ds, da);
                }
                for row in psi.chunks_mut(da) {
                    block.basis.to_coordinates(row);
                }
            }
            Kind::Split { block, potential } => {
                let half: Vec<C64> = potential.iter().map(|v| C64::from_polar(1.0, -v * dt / 2.0)).collect();
                let mut cache = StepCache::default();
                for k in 0..n {
                    let g = profile.step_coupling(k, n);
                    cache.refresh(g, || self.block_unitaries(block, g, dt));
                    for row in psi.chunks_mut(da) {
                        row.iter_mut().zip(&half).for_each(|(z, p)| *z *= p);
                        block.basis.to_eigen(row);
                    }
                    apply_block(&cache.unitaries, &mut psi, ds, da);
                    for row in psi.chunks_mut(da) {
                        block.basis.to_coordinates(row);
                        row.iter_mut().zip(&half).for_each(|(z, p)| *z *= p);
                    }
                }
            }
            Kind::Dense { free, coupling } => {
                let mut state = DVector::from_vec(psi);
                let mut key = None;
                let mut unitary = DMatrix::<C64>::zeros(0, 0);
                for k in 0..n {
                    let g = profile.step_coupling(k, n);
                    if key != Some(coupling_key(g)) {
                        key = Some(coupling_key(g));
                        let op = HermitianOperator::from_matrix_unchecked(free + coupling * C64::new(g, 0.0));
                        unitary = op.unitary(dt);
                    }
                    state = &unitary * state;
                }
                return state;
            }
        }
        DVector::from_vec(psi)
    }

    /// `exp(-i (H_S + g q_j Q_S + e_j) dt)` for every apparatus index `j`,
    /// each stored column-major.
    fn block_unitaries(&self, block: &Block, g: f64, dt: f64) -> Vec<C64> {
        let hs = self.h.h_system().matrix();
        let qs = self.h.q_system().matrix();
        let ds = hs.nrows();
        let mut out = Vec::with_capacity(block.charges.len() * ds * ds);
        for (&q, &e) in block.charges.iter().zip(&block.energies) {
            let m = hs + qs * C64::new(g * q, 0.0);
            let phase = C64::from_polar(1.0, -e * dt);
            out.extend(hermitian_exp(&m, dt).iter().map(|z| z * phase));
        }
        out
    }
}

#[derive(Default)]
struct StepCache {
    key: Option<i64>,
    unitaries: Vec<C64>,
}

impl StepCache {
    fn refresh(&mut self, g: f64, build: impl FnOnce() -> Vec<C64>) {
        let key = coupling_key(g);
        if self.key != Some(key) {
            self.unitaries = build();
            self.key = Some(key);
        }
    }
}

fn apply_block(unitaries: &[C64], psi: &mut [C64], ds: usize, da: usize) {
    let mut x = vec![C64::new(0.0, 0.0); ds];
    for j in 0..da {
        let u = &unitaries[j * ds * ds..(j + 1) * ds * ds];
        for (s, xs) in x.iter_mut().enumerate() {
            *xs = psi[s * da + j];
        }
        for r in 0..ds {
            let mut acc = C64::new(0.0, 0.0);
            for (c, xc) in x.iter().enumerate() {
                acc += u[c * ds + r] * xc;
            }
            psi[r * da + j] = acc;
        }
    }
}

/// `exp(-i M dt)` for Hermitian `M`; closed form for 2x2.
pub(crate) fn hermitian_exp(m: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)];
        let mean = 0.5 * (a + d);
        let z = 0.5 * (a - d);
        let omega = (z * z + b.norm_sqr()).sqrt();
        let c = (omega * dt).cos();
        let s = if omega * dt < 1e-8 { dt } else { (omega * dt).sin() / omega };
        let e = C64::from_polar(1.0, -mean * dt);
        let i = C64::new(0.0, 1.0);
        return DMatrix::from_column_slice(
            2,
            2,
            &[e * (c - i * s * z), e * (-i * s * b.conj()), e * (-i * s * b), e * (c + i * s * z)],
        );
    }
    HermitianOperator::from_matrix_unchecked(m.clone()).unitary(dt)
}

fn common_basis(h_a: &HermitianOperator, q_a: &HermitianOperator) -> Option<Block> {
    let tol = 1e-10 * max_abs(h_a.matrix()).max(max_abs(q_a.matrix())).max(1.0);
    let q_spec = q_a.spectrum();
    let h_rot = h_a.in_basis(&q_spec.vectors);
    if off_diagonal(&h_rot) <= tol {
        return Some(Block {
            basis: matrix_basis(q_spec.vectors.clone()),
            energies: h_rot.diagonal().iter().map(|z| z.re).collect(),
            charges: q_spec.values.clone(),
        });
    }
    let h_spec = h_a.spectrum();
    let q_rot = q_a.in_basis(&h_spec.vectors);
    if off_diagonal(&q_rot) <= tol {
        return Some(Block {
            basis: matrix_basis(h_spec.vectors.clone()),
            energies: h_spec.values.clone(),
            charges: q_rot.diagonal().iter().map(|z| z.re).collect(),
        });
    }
    None
}

fn matrix_basis(vectors: DMatrix<C64>) -> Basis {
    let adjoint = vectors.adjoint();
    Basis::Matrix { vectors, adjoint }
}

fn off_diagonal(m: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if r != c {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    worst
}
