//! Covariance-matrix description of Gaussian states.
//!
//! All matrices use shot-noise units (the vacuum has the identity matrix) and
//! the interleaved quadrature ordering `(q₁, p₁, q₂, p₂, …)`. First moments are
//! not tracked: none of the key-rate formulas depend on them.

mod ops;
mod spectrum;

pub use ops::{
    apply_symplectic, beamsplitter, heterodyne_condition, homodyne_condition, is_physical,
    partial_trace, tmsv_cm,
};
pub use spectrum::{
    entropy_h, symplectic_eigenvalues, von_neumann_entropy, williamson, SymplecticSpectrum,
    Williamson, ENTROPY_ASYMPTOTIC_SWITCH, PHYSICAL_TOLERANCE,
};

pub(crate) use ops::condition_homodynes;

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};

/// Quadrature selected by a homodyne detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    pub(crate) fn offset(self) -> usize {
        match self {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        }
    }
}

/// Real symmetric `2N × 2N` second-moment matrix of an `N`-mode Gaussian state.
///
/// Construction checks shape and symmetry and stores the exactly symmetrized
/// matrix. Positive definiteness and the uncertainty principle are checked by
/// the operations that need them ([`symplectic_eigenvalues`], [`is_physical`]),
/// since states built from very large squeezing are only positive definite up
/// to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    m: DMatrix<f64>,
}

const SYMMETRY_TOLERANCE: f64 = 1e-12;

impl CovarianceMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "covariance matrix must be 2N×2N with N ≥ 1, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite covariance entry".into()));
        }
        let scale = m.amax();
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOLERANCE * scale {
            return Err(Error::InvalidState(format!(
                "matrix is not symmetric (max |V - Vᵀ| = {asym:e})"
            )));
        }
        Ok(Self::from_symmetric(m))
    }

    /// Wraps a matrix that is symmetric up to rounding, averaging away the asymmetry.
    pub(crate) fn from_symmetric(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self { m: (m + t) * 0.5 }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self {
            m: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    /// Product of `modes` identical thermal states with variance `omega ≥ 1`.
    pub fn thermal(modes: usize, omega: f64) -> Result<Self> {
        crate::error::check_domain("omega", omega, omega >= 1.0, "omega >= 1")?;
        Ok(Self {
            m: DMatrix::identity(2 * modes, 2 * modes) * omega,
        })
    }

    pub fn modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// The 2×2 block coupling modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.m.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    /// Tensor product `self ⊕ other`; the modes of `other` follow those of `self`.
    pub fn direct_sum(&self, other: &CovarianceMatrix) -> CovarianceMatrix {
        let (a, b) = (self.m.nrows(), other.m.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.m);
        m.view_mut((a, a), (b, b)).copy_from(&other.m);
        CovarianceMatrix { m }
    }

    /// Reorders modes so that new mode `k` is old mode `order[k]`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<CovarianceMatrix> {
        let n = self.modes();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} for {n} modes",
                order.len()
            )));
        }
        for &k in order {
            if k >= n || seen[k] {
                return Err(Error::ModeOutOfRange { index: k, modes: n });
            }
            seen[k] = true;
        }
        let idx = quadrature_indices(order);
        Ok(CovarianceMatrix {
            m: select(&self.m, &idx, &idx),
        })
    }
}

/// Real `2N × 2N` matrix satisfying `S Ω Sᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    m: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Checks the symplectic condition to `1e-12` relative to `max(1, |S|²)`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "symplectic matrix must be 2N×2N, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let deviation = symplectic_deviation(&m);
        let scale = m.amax().powi(2).max(1.0);
        if deviation > 1e-12 * scale {
            return Err(Error::NotSymplectic { deviation });
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self { m }
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            m: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn inverse(&self) -> SymplecticMatrix {
        // S⁻¹ = -Ω Sᵀ Ω
        let omega = symplectic_form(self.modes());
        SymplecticMatrix {
            m: -(&omega * self.m.transpose() * &omega),
        }
    }

    pub fn compose(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.m.nrows() != other.m.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}-mode and {}-mode transformations",
                self.modes(),
                other.modes()
            )));
        }
        Ok(SymplecticMatrix {
            m: &self.m * &other.m,
        })
    }
}

/// Block-diagonal symplectic form with blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// `max |S Ω Sᵀ − Ω|`.
pub fn symplectic_deviation(s: &DMatrix<f64>) -> f64 {
    let omega = symplectic_form(s.nrows() / 2);
    (s * &omega * s.transpose() - omega).amax()
}

pub(crate) fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect()
}

pub(crate) fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}
