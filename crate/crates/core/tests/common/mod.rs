//! Random Gaussian states for property tests.
#![allow(dead_code)]

use cvqkd_fading::gaussian::{beamsplitter, CovarianceMatrix, SymplecticMatrix};
use nalgebra::DMatrix;
use rand::Rng;

/// Rotation then squeezing on every mode.
fn local_layer<R: Rng>(n: usize, rng: &mut R, max_squeeze: f64) -> SymplecticMatrix {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let r: f64 = rng.random_range(-max_squeeze..=max_squeeze);
        let (s, c) = theta.sin_cos();
        let (sq, sp) = (r.exp(), (-r).exp());
        m[(2 * k, 2 * k)] = sq * c;
        m[(2 * k, 2 * k + 1)] = sq * s;
        m[(2 * k + 1, 2 * k)] = -sp * s;
        m[(2 * k + 1, 2 * k + 1)] = sp * c;
    }
    SymplecticMatrix::new(m).expect("local layer is symplectic")
}

/// Layers of local operations and random beam splitters.
pub fn random_symplectic<R: Rng>(n: usize, rng: &mut R, max_squeeze: f64) -> SymplecticMatrix {
    let mut s = local_layer(n, rng, max_squeeze);
    for _ in 0..3 {
        if n > 1 {
            for i in 0..n {
                let j = (i + 1 + rng.random_range(0..n - 1)) % n;
                let tau: f64 = rng.random_range(0.0..=1.0);
                s = beamsplitter(tau, i, j, n).unwrap().compose(&s).unwrap();
            }
        }
        s = local_layer(n, rng, max_squeeze).compose(&s).unwrap();
    }
    s
}

/// `S D Sᵀ` with symplectic eigenvalues drawn from `[1, max_nu]`.
pub fn random_cm<R: Rng>(n: usize, rng: &mut R, max_nu: f64, max_squeeze: f64) -> (CovarianceMatrix, Vec<f64>) {
    let nus: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..=max_nu)).collect();
    let d = DMatrix::from_fn(2 * n, 2 * n, |r, c| if r == c { nus[r / 2] } else { 0.0 });
    let s = random_symplectic(n, rng, max_squeeze);
    let v = s.matrix() * d * s.matrix().transpose();
    let v = (&v + v.transpose()) * 0.5;
    let mut sorted = nus;
    sorted.sort_by(|a, b| b.total_cmp(a));
    (CovarianceMatrix::new(v).unwrap(), sorted)
}

pub fn random_pure_cm<R: Rng>(n: usize, rng: &mut R, max_squeeze: f64) -> CovarianceMatrix {
    random_cm(n, rng, 1.0, max_squeeze).0
}

/// Symplectic eigenvalues of a two-mode state from its local invariants.
pub fn two_mode_oracle(v: &CovarianceMatrix) -> (f64, f64) {
    let det_a = v.block(0, 0).determinant();
    let det_b = v.block(1, 1).determinant();
    let det_c = v.block(0, 1).determinant();
    let delta = det_a + det_b + 2.0 * det_c;
    let det = v.matrix().determinant();
    let root = (delta * delta - 4.0 * det).max(0.0).sqrt();
    (((delta + root) / 2.0).sqrt(), ((delta - root) / 2.0).max(0.0).sqrt())
}
