use std::f64::consts::{LN_2, LOG2_E};

use nalgebra::{Cholesky, Complex, DMatrix, SymmetricEigen};

use super::{symplectic_form, CovarianceMatrix, SymplecticMatrix};
use crate::error::{Error, Result};

/// Symplectic eigenvalues below `1 - PHYSICAL_TOLERANCE` violate the uncertainty principle.
pub const PHYSICAL_TOLERANCE: f64 = 1e-9;

/// Above this argument [`entropy_h`] uses `log₂(z/2) + log₂e`, accurate to `O(z⁻²)`.
pub const ENTROPY_ASYMPTOTIC_SWITCH: f64 = 1e5;

/// Symplectic spectrum `ν₁ ≥ ν₂ ≥ … ≥ ν_N` of a covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    /// `max |ν_k - 1|`; zero for a pure state.
    pub fn purity_deviation(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `Π ν_k²`, which equals `det V`.
    pub fn product_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).product()
    }
}

/// Binary entropy-like function giving the von Neumann entropy of a thermal
/// mode with symplectic eigenvalue `z`, in bits.
pub fn entropy_h(z: f64) -> Result<f64> {
    if !z.is_finite() || z < 1.0 - PHYSICAL_TOLERANCE {
        return Err(Error::Domain {
            name: "symplectic eigenvalue",
            value: z,
            expected: "z >= 1 (uncertainty principle)",
        });
    }
    Ok(h_unchecked(z))
}

fn h_unchecked(z: f64) -> f64 {
    if z <= 1.0 {
        return 0.0;
    }
    if z >= ENTROPY_ASYMPTOTIC_SWITCH {
        return (0.5 * z).log2() + LOG2_E;
    }
    let a = 0.5 * (z + 1.0);
    let b = 0.5 * (z - 1.0);
    if z < 3.0 {
        a * a.log2() - b * b.log2()
    } else {
        // a log a - b log b with a - b = 1, rewritten without cancellation
        a * (1.0 / b).ln_1p() / LN_2 + b.log2()
    }
}

/// Symplectic eigenvalues: the moduli of the eigenvalues of `iΩV`, one per
/// conjugate pair, in descending order.
///
/// With `V = LLᵀ` the antisymmetric matrix `K = LᵀΩL` is similar to `ΩV`; its
/// singular values are the `ν_k`, each appearing twice. Working with the
/// normal matrix `K` keeps the absolute error at `ε·ν_max`.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let n = v.modes();
    let l = cholesky_factor(v)?;
    let k = l.transpose() * symplectic_form(n) * &l;
    let mut s: Vec<f64> = k.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let values = (0..n).map(|i| 0.5 * (s[2 * i] + s[2 * i + 1])).collect();
    Ok(SymplecticSpectrum { values })
}

fn cholesky_factor(v: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    Cholesky::new(v.matrix().clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::InvalidState("covariance matrix is not positive definite".into()))
}

/// Rounding tolerance for eigenvalues that dip below one in strongly squeezed
/// states; it grows with the square of the matrix scale.
fn rounding_tolerance(v: &CovarianceMatrix) -> f64 {
    let scale = v.max_abs() * v.matrix().nrows() as f64;
    PHYSICAL_TOLERANCE + 16.0 * f64::EPSILON * scale * scale
}

/// `S(V) = Σ_k h(ν_k)` in bits.
///
/// Eigenvalues within rounding of one (from below) count as pure modes; the
/// state is rejected if any eigenvalue is clearly below one.
pub fn von_neumann_entropy(v: &CovarianceMatrix) -> Result<f64> {
    let spectrum = symplectic_eigenvalues(v)?;
    let tol = rounding_tolerance(v);
    let mut total = 0.0;
    for &nu in spectrum.values() {
        if nu < 1.0 - tol {
            return Err(Error::InvalidState(format!(
                "symplectic eigenvalue {nu} violates the uncertainty principle"
            )));
        }
        total += h_unchecked(nu);
    }
    Ok(total)
}

/// Williamson normal form `V = S D Sᵀ`, `D = ⊕ ν_k I₂`.
#[derive(Debug, Clone)]
pub struct Williamson {
    pub symplectic: SymplecticMatrix,
    pub spectrum: SymplecticSpectrum,
}

/// Computes the Williamson decomposition from the Hermitian eigenproblem of `iK`,
/// `K = LᵀΩL`.
///
/// An eigenvector `x + iy` of `iK` with eigenvalue `ν > 0` yields the real pair
/// `e₁ = √2 y`, `e₂ = √2 x` with `K e₁ = -ν e₂` and `K e₂ = ν e₁`. Stacking the
/// pairs into an orthogonal `O` gives `S = L O D^{-1/2}`.
pub fn williamson(v: &CovarianceMatrix) -> Result<Williamson> {
    let n = v.modes();
    let dim = 2 * n;
    let l = cholesky_factor(v)?;
    let k = l.transpose() * symplectic_form(n) * &l;
    let ik: DMatrix<Complex<f64>> = k.map(|x| Complex::new(0.0, x));
    let eig = SymmetricEigen::new(ik);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let positive = &order[..n];
    if eig.eigenvalues[positive[n - 1]] <= 0.0 {
        return Err(Error::Numerical(
            "Williamson decomposition found a non-positive symplectic eigenvalue".into(),
        ));
    }

    let mut o = DMatrix::zeros(dim, dim);
    let mut scale = DMatrix::zeros(dim, dim);
    let mut values = Vec::with_capacity(n);
    for (pair, &col) in positive.iter().enumerate() {
        let nu = eig.eigenvalues[col];
        let w = eig.eigenvectors.column(col);
        for r in 0..dim {
            o[(r, 2 * pair)] = std::f64::consts::SQRT_2 * w[r].im;
            o[(r, 2 * pair + 1)] = std::f64::consts::SQRT_2 * w[r].re;
        }
        let inv_sqrt = 1.0 / nu.sqrt();
        scale[(2 * pair, 2 * pair)] = inv_sqrt;
        scale[(2 * pair + 1, 2 * pair + 1)] = inv_sqrt;
        values.push(nu);
    }
    let s = l * o * scale;
    Ok(Williamson {
        symplectic: SymplecticMatrix::from_matrix_unchecked(s),
        spectrum: SymplecticSpectrum { values },
    })
}
