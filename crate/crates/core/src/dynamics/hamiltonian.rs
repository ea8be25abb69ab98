use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::CouplingProfile;
use crate::error::{Error, Result};
use crate::hilbert::{max_abs, HermitianOperator, PointerGrid, C64};

/// Pointer on a periodic grid. `Q_A` is the grid's translation generator;
/// `H_A = Q_A^2 / 2m` (if a mass is set) plus a potential diagonal in the
/// pointer coordinate (if given).
#[derive(Debug, Clone, PartialEq)]
pub struct GridApparatus {
    grid: PointerGrid,
    mass: Option<f64>,
    potential: Option<Vec<f64>>,
}

impl GridApparatus {
    pub fn new(grid: PointerGrid, mass: Option<f64>, potential: Option<Vec<f64>>) -> Result<Self> {
        if let Some(m) = mass {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Validation(format!("pointer mass must be positive, got {m}")));
            }
        }
        if let Some(v) = &potential {
            if v.len() != grid.n_points() {
                return Err(Error::DimensionMismatch { expected: grid.n_points(), found: v.len() });
            }
        }
        Ok(Self { grid, mass, potential })
    }

    /// Pointer with no free Hamiltonian.
    pub fn free(grid: PointerGrid) -> Self {
        Self { grid, mass: None, potential: None }
    }

    pub fn grid(&self) -> &PointerGrid {
        &self.grid
    }

    pub fn mass(&self) -> Option<f64> {
        self.mass
    }

    pub fn potential(&self) -> Option<&[f64]> {
        self.potential.as_deref()
    }

    /// `H_A` restricted to its `Q_A`-diagonal part, per wavenumber (FFT order).
    pub fn kinetic_energies(&self) -> Vec<f64> {
        let ks = self.grid.wavenumbers();
        match self.mass {
            Some(m) => ks.iter().map(|k| k * k / (2.0 * m)).collect(),
            None => alloc::vec![0.0; ks.len()],
        }
    }

    /// True when `[Q_A, H_A] = 0`, i.e. the potential is absent or flat.
    pub fn commutes(&self) -> bool {
        match &self.potential {
            None => true,
            Some(v) => v.iter().all(|&x| x == v[0]),
        }
    }

    pub fn observable(&self) -> HermitianOperator {
        self.grid.translation_generator()
    }

    pub fn hamiltonian(&self) -> HermitianOperator {
        let n = self.grid.n_points();
        let q = self.grid.translation_generator();
        let mut m = match self.mass {
            Some(mass) => q.function(|k| C64::new(k * k / (2.0 * mass), 0.0)),
            None => DMatrix::zeros(n, n),
        };
        if let Some(v) = &self.potential {
            for (i, &x) in v.iter().enumerate() {
                m[(i, i)] += C64::new(x, 0.0);
            }
        }
        HermitianOperator::from_matrix_unchecked((&m + m.adjoint()).unscale(2.0))
    }
}

/// Apparatus degrees of freedom entering the composite Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub enum Apparatus {
    Grid(GridApparatus),
    Levels { hamiltonian: HermitianOperator, observable: HermitianOperator },
}

impl Apparatus {
    pub fn levels(hamiltonian: HermitianOperator, observable: HermitianOperator) -> Result<Self> {
        if hamiltonian.dim() != observable.dim() {
            return Err(Error::DimensionMismatch { expected: hamiltonian.dim(), found: observable.dim() });
        }
        Ok(Self::Levels { hamiltonian, observable })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Grid(g) => g.grid.n_points(),
            Self::Levels { hamiltonian, .. } => hamiltonian.dim(),
        }
    }

    /// Dense `H_A`.
    pub fn hamiltonian(&self) -> HermitianOperator {
        match self {
            Self::Grid(g) => g.hamiltonian(),
            Self::Levels { hamiltonian, .. } => hamiltonian.clone(),
        }
    }

    /// Dense `Q_A`.
    pub fn observable(&self) -> HermitianOperator {
        match self {
            Self::Grid(g) => g.observable(),
            Self::Levels { observable, .. } => observable.clone(),
        }
    }

    /// Largest |eigenvalue| of `Q_A`.
    pub fn observable_radius(&self) -> f64 {
        match self {
            Self::Grid(g) => g.grid.max_wavenumber(),
            Self::Levels { observable, .. } => observable.spectral_radius(),
        }
    }

    /// Whether `[Q_A, H_A]` vanishes (to `1e-10` relative for dense levels).
    pub fn commutes(&self) -> bool {
        match self {
            Self::Grid(g) => g.commutes(),
            Self::Levels { hamiltonian, observable } => {
                let scale = max_abs(hamiltonian.matrix()).max(1.0) * max_abs(observable.matrix()).max(1.0);
                hamiltonian.commutator_norm(observable).map(|c| c <= 1e-10 * scale).unwrap_or(false)
            }
        }
    }
}

/// `H(t) = H_S (x) I + I (x) H_A + g(t) Q_S (x) Q_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeHamiltonian {
    h_system: HermitianOperator,
    q_system: HermitianOperator,
    apparatus: Apparatus,
    profile: CouplingProfile,
}

impl CompositeHamiltonian {
    pub fn new(
        h_system: HermitianOperator,
        q_system: HermitianOperator,
        apparatus: Apparatus,
        profile: CouplingProfile,
    ) -> Result<Self> {
        if h_system.dim() != q_system.dim() {
            return Err(Error::DimensionMismatch { expected: h_system.dim(), found: q_system.dim() });
        }
        if let Apparatus::Levels { hamiltonian, observable } = &apparatus {
            if hamiltonian.dim() != observable.dim() {
                return Err(Error::DimensionMismatch { expected: hamiltonian.dim(), found: observable.dim() });
            }
        }
        Ok(Self { h_system, q_system, apparatus, profile })
    }

    /// Dense system and apparatus operators with the given profile.
    pub fn from_operators(
        h_system: HermitianOperator,
        h_apparatus: HermitianOperator,
        q_system: HermitianOperator,
        q_apparatus: HermitianOperator,
        profile: CouplingProfile,
    ) -> Result<Self> {
        Self::new(h_system, q_system, Apparatus::levels(h_apparatus, q_apparatus)?, profile)
    }

    pub fn h_system(&self) -> &HermitianOperator {
        &self.h_system
    }

    pub fn q_system(&self) -> &HermitianOperator {
        &self.q_system
    }

    pub fn apparatus(&self) -> &Apparatus {
        &self.apparatus
    }

    pub fn profile(&self) -> &CouplingProfile {
        &self.profile
    }

    pub fn system_dim(&self) -> usize {
        self.h_system.dim()
    }

    pub fn apparatus_dim(&self) -> usize {
        self.apparatus.dim()
    }

    pub fn dim(&self) -> usize {
        self.system_dim() * self.apparatus_dim()
    }

    /// Dense `H(t)`.
    pub fn assemble(&self, t: f64) -> Result<HermitianOperator> {
        let g = self.profile.evaluate(t)?;
        Ok(self.assemble_with_coupling(g))
    }

    /// Dense `H` at coupling value `g`.
    pub fn assemble_with_coupling(&self, g: f64) -> HermitianOperator {
        let (free, coupling) = self.dense_parts();
        HermitianOperator::from_matrix_unchecked(free + coupling * C64::new(g, 0.0))
    }

    /// `(H_S (x) I + I (x) H_A, Q_S (x) Q_A)`.
    pub(crate) fn dense_parts(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let ds = self.system_dim();
        let da = self.apparatus_dim();
        let h_a = self.apparatus.hamiltonian();
        let q_a = self.apparatus.observable();
        let free = self.h_system.matrix().kronecker(&DMatrix::identity(da, da))
            + DMatrix::<C64>::identity(ds, ds).kronecker(h_a.matrix());
        let coupling = self.q_system.matrix().kronecker(q_a.matrix());
        (free, coupling)
    }
}
