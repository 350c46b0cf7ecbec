use nalgebra::{DMatrix, Matrix2};

use super::spectrum::{symplectic_eigenvalues, PHYSICAL_TOLERANCE};
use super::{quadrature_indices, select, CovarianceMatrix, Quadrature, SymplecticMatrix};
use crate::error::{check_domain, Error, Result};

/// Relative threshold below which a measured variance is treated as zero.
const PINV_THRESHOLD: f64 = 1e-12;

/// Two-mode squeezed vacuum with thermal marginals `μ`:
/// `[[μI, √(μ²-1)Z], [√(μ²-1)Z, μI]]`, `Z = diag(1, -1)`.
pub fn tmsv_cm(mu: f64) -> Result<CovarianceMatrix> {
    check_domain("mu", mu, mu >= 1.0, "mu >= 1")?;
    let c = ((mu - 1.0) * (mu + 1.0)).sqrt();
    let mut m = DMatrix::identity(4, 4) * mu;
    m[(0, 2)] = c;
    m[(2, 0)] = c;
    m[(1, 3)] = -c;
    m[(3, 1)] = -c;
    Ok(CovarianceMatrix::from_symmetric(m))
}

/// Beam splitter of transmissivity `tau` between modes `i` and `j` of an
/// `n`-mode system: `x_i' = √τ x_i + √(1-τ) x_j`, `x_j' = -√(1-τ) x_i + √τ x_j`.
pub fn beamsplitter(tau: f64, i: usize, j: usize, n: usize) -> Result<SymplecticMatrix> {
    check_domain("tau", tau, (0.0..=1.0).contains(&tau), "0 <= tau <= 1")?;
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::ModeOutOfRange { index: idx, modes: n });
        }
    }
    if i == j {
        return Err(Error::DimensionMismatch(
            "beam splitter needs two distinct modes".into(),
        ));
    }
    let t = tau.sqrt();
    let r = (1.0 - tau).sqrt();
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        s[(a, a)] = t;
        s[(a, b)] = r;
        s[(b, a)] = -r;
        s[(b, b)] = t;
    }
    Ok(SymplecticMatrix::from_matrix_unchecked(s))
}

/// `S V Sᵀ`.
pub fn apply_symplectic(s: &SymplecticMatrix, v: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if s.modes() != v.modes() {
        return Err(Error::DimensionMismatch(format!(
            "{}-mode transformation applied to a {}-mode state",
            s.modes(),
            v.modes()
        )));
    }
    let m = s.matrix() * v.matrix() * s.matrix().transpose();
    Ok(CovarianceMatrix::from_symmetric(m))
}

/// Reduced state on `keep` (sorted into the original relative order).
pub fn partial_trace(v: &CovarianceMatrix, keep: &[usize]) -> Result<CovarianceMatrix> {
    let n = v.modes();
    if keep.is_empty() {
        return Err(Error::DimensionMismatch("partial trace keeps no modes".into()));
    }
    let mut modes = keep.to_vec();
    modes.sort_unstable();
    modes.dedup();
    if modes.len() != keep.len() {
        return Err(Error::DimensionMismatch("repeated mode in keep set".into()));
    }
    if let Some(&bad) = modes.iter().find(|&&k| k >= n) {
        return Err(Error::ModeOutOfRange { index: bad, modes: n });
    }
    let idx = quadrature_indices(&modes);
    Ok(CovarianceMatrix::from_symmetric(select(v.matrix(), &idx, &idx)))
}

fn remaining_modes(v: &CovarianceMatrix, mode: usize) -> Result<Vec<usize>> {
    let n = v.modes();
    if mode >= n {
        return Err(Error::ModeOutOfRange { index: mode, modes: n });
    }
    if n < 2 {
        return Err(Error::DimensionMismatch(
            "conditioning needs at least one unmeasured mode".into(),
        ));
    }
    Ok((0..n).filter(|&k| k != mode).collect())
}

/// Conditional state of the other modes after homodyning `quadrature` of `mode`:
/// `A - B (ΠCΠ)⁺ Bᵀ`. The result does not depend on the measured value.
pub fn homodyne_condition(
    v: &CovarianceMatrix,
    mode: usize,
    quadrature: Quadrature,
) -> Result<CovarianceMatrix> {
    let rest = remaining_modes(v, mode)?;
    let m = v.matrix();
    let qi = 2 * mode + quadrature.offset();
    let variance = m[(qi, qi)];
    if variance <= PINV_THRESHOLD * m.amax().max(1.0) {
        return Err(Error::DegenerateMeasurement { mode, variance });
    }
    let idx = quadrature_indices(&rest);
    let k = idx.len();
    let out = DMatrix::from_fn(k, k, |r, c| {
        m[(idx[r], idx[c])] - m[(idx[r], qi)] * m[(idx[c], qi)] / variance
    });
    Ok(CovarianceMatrix::from_symmetric(out))
}

/// Conditional state of the other modes after heterodyning `mode`:
/// `A - B (C + I)⁻¹ Bᵀ`.
pub fn heterodyne_condition(v: &CovarianceMatrix, mode: usize) -> Result<CovarianceMatrix> {
    let rest = remaining_modes(v, mode)?;
    let m = v.matrix();
    let idx = quadrature_indices(&rest);
    let c = v.block(mode, mode) + Matrix2::identity();
    let c_inv = c.try_inverse().ok_or_else(|| {
        Error::InvalidState("heterodyne: C + I is singular (unphysical input)".into())
    })?;
    let b = DMatrix::from_fn(idx.len(), 2, |r, q| m[(idx[r], 2 * mode + q)]);
    let a = select(m, &idx, &idx);
    let c_inv = DMatrix::from_column_slice(2, 2, c_inv.as_slice());
    Ok(CovarianceMatrix::from_symmetric(a - &b * c_inv * b.transpose()))
}

/// Applies several homodyne measurements given in original mode labels and
/// returns the state of the unmeasured modes in their original order.
pub(crate) fn condition_homodynes(
    v: &CovarianceMatrix,
    measurements: &[(usize, Quadrature)],
) -> Result<CovarianceMatrix> {
    let mut labels: Vec<usize> = (0..v.modes()).collect();
    let mut state = v.clone();
    for &(mode, quadrature) in measurements {
        let pos = labels
            .iter()
            .position(|&l| l == mode)
            .ok_or(Error::ModeOutOfRange {
                index: mode,
                modes: v.modes(),
            })?;
        state = homodyne_condition(&state, pos, quadrature)?;
        labels.remove(pos);
    }
    Ok(state)
}

/// Positive definite with every symplectic eigenvalue at least `1 - 1e-9`.
pub fn is_physical(v: &CovarianceMatrix) -> bool {
    match symplectic_eigenvalues(v) {
        Ok(s) => s.min() >= 1.0 - PHYSICAL_TOLERANCE,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{symplectic_deviation, von_neumann_entropy};

    fn assert_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) {
        let d = (a - b).amax();
        assert!(d <= tol, "max deviation {d:e} > {tol:e}\n{a}\n{b}");
    }

    #[test]
    fn tmsv_blocks() {
        assert_close(tmsv_cm(1.0).unwrap().matrix(), &DMatrix::identity(4, 4), 0.0);
        let v = tmsv_cm(2.0).unwrap();
        let s3 = 3f64.sqrt();
        assert!((v.matrix()[(0, 2)] - s3).abs() < 1e-15);
        assert!((v.matrix()[(1, 3)] + s3).abs() < 1e-15);
        assert!(matches!(tmsv_cm(0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn tmsv_is_pure_up_to_moderate_squeezing() {
        for &mu in &[1.0, 1.5, 5.0, 10.0, 1e2, 1e3, 1e4, 1e5] {
            let s = symplectic_eigenvalues(&tmsv_cm(mu).unwrap()).unwrap();
            assert!(s.purity_deviation() <= 1e-6, "mu={mu}: {:?}", s.values());
        }
        assert!(von_neumann_entropy(&tmsv_cm(1e4).unwrap()).unwrap() <= 1e-6);
    }

    #[test]
    fn beamsplitter_limits() {
        let id = beamsplitter(1.0, 0, 1, 2).unwrap();
        assert_close(id.matrix(), &DMatrix::identity(4, 4), 0.0);
        let swap = beamsplitter(0.0, 0, 1, 2).unwrap();
        // x0' = x1, x1' = -x0
        assert_eq!(swap.matrix()[(0, 2)], 1.0);
        assert_eq!(swap.matrix()[(2, 0)], -1.0);
        for &tau in &[0.0, 0.1, 0.5, 2.0 / 3.0, 1.0] {
            let s = beamsplitter(tau, 0, 2, 3).unwrap();
            assert!(symplectic_deviation(s.matrix()) <= 1e-12);
        }
        assert!(beamsplitter(1.1, 0, 1, 2).is_err());
        assert!(beamsplitter(0.5, 0, 0, 2).is_err());
        assert!(beamsplitter(0.5, 0, 2, 2).is_err());
    }

    #[test]
    fn vacuum_is_beamsplitter_invariant() {
        let s = beamsplitter(0.5, 0, 1, 2).unwrap();
        let out = apply_symplectic(&s, &CovarianceMatrix::vacuum(2)).unwrap();
        assert_close(out.matrix(), &DMatrix::identity(4, 4), 1e-15);
        assert!(apply_symplectic(&s, &CovarianceMatrix::vacuum(3)).is_err());
    }

    #[test]
    fn partial_trace_blocks() {
        let v = tmsv_cm(4.0).unwrap();
        assert_eq!(partial_trace(&v, &[1, 0]).unwrap(), v);
        assert_close(partial_trace(&v, &[0]).unwrap().matrix(), &(DMatrix::identity(2, 2) * 4.0), 0.0);
        let prod = CovarianceMatrix::thermal(1, 2.0).unwrap().direct_sum(&v);
        assert_eq!(partial_trace(&prod, &[1, 2]).unwrap(), v);
        assert!(partial_trace(&v, &[]).is_err());
        assert!(partial_trace(&v, &[2]).is_err());
    }

    #[test]
    fn homodyne_on_tmsv() {
        let mu = 6.0;
        let out = homodyne_condition(&tmsv_cm(mu).unwrap(), 1, Quadrature::Q).unwrap();
        assert!((out.matrix()[(0, 0)] - 1.0 / mu).abs() < 1e-14);
        assert!((out.matrix()[(1, 1)] - mu).abs() < 1e-14);
        assert_eq!(out.matrix()[(0, 1)], 0.0);
        let out = homodyne_condition(&tmsv_cm(mu).unwrap(), 0, Quadrature::P).unwrap();
        assert!((out.matrix()[(0, 0)] - mu).abs() < 1e-14);
        assert!((out.matrix()[(1, 1)] - 1.0 / mu).abs() < 1e-14);
    }

    #[test]
    fn homodyne_on_product_leaves_rest() {
        let a = CovarianceMatrix::thermal(1, 1.3).unwrap();
        let v = a.direct_sum(&CovarianceMatrix::thermal(1, 4.0).unwrap());
        assert_eq!(homodyne_condition(&v, 1, Quadrature::Q).unwrap(), a);
        assert_eq!(heterodyne_condition(&v, 1).unwrap(), a);
    }

    #[test]
    fn heterodyne_on_tmsv_leaves_coherent_state() {
        for &mu in &[1.0, 2.0, 30.0, 1e4] {
            let out = heterodyne_condition(&tmsv_cm(mu).unwrap(), 0).unwrap();
            assert_close(out.matrix(), &DMatrix::identity(2, 2), 1e-10 * mu);
        }
    }

    #[test]
    fn degenerate_homodyne() {
        let mut m = DMatrix::identity(4, 4);
        m[(2, 2)] = 0.0;
        let v = CovarianceMatrix::new(m).unwrap();
        assert!(matches!(
            homodyne_condition(&v, 1, Quadrature::Q),
            Err(Error::DegenerateMeasurement { mode: 1, .. })
        ));
        assert!(homodyne_condition(&v, 1, Quadrature::P).is_ok());
        assert!(homodyne_condition(&CovarianceMatrix::vacuum(1), 0, Quadrature::Q).is_err());
    }

    #[test]
    fn sequential_homodynes_use_original_labels() {
        let v = tmsv_cm(3.0).unwrap().direct_sum(&tmsv_cm(5.0).unwrap());
        let direct = homodyne_condition(&homodyne_condition(&v, 3, Quadrature::Q).unwrap(), 1, Quadrature::P).unwrap();
        let labelled = condition_homodynes(&v, &[(3, Quadrature::Q), (1, Quadrature::P)]).unwrap();
        assert_eq!(direct, labelled);
        // measurement order does not matter
        let swapped = condition_homodynes(&v, &[(1, Quadrature::P), (3, Quadrature::Q)]).unwrap();
        assert_close(swapped.matrix(), labelled.matrix(), 1e-12);
    }

    #[test]
    fn physicality() {
        assert!(is_physical(&CovarianceMatrix::vacuum(2)));
        assert!(!is_physical(&CovarianceMatrix::new(DMatrix::identity(2, 2) * 0.5).unwrap()));
        assert!(is_physical(&CovarianceMatrix::thermal(3, 1.01).unwrap()));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 0.1;
        assert!(CovarianceMatrix::new(m).is_err());
        assert!(CovarianceMatrix::new(DMatrix::identity(3, 3)).is_err());
    }
}
