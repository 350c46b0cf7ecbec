use cvqkd_fading::channel::{plob_bound, plob_bound_averaged, AttackModel};
use cvqkd_fading::mdi::{self, MdiAttack, MdiParams};
use cvqkd_fading::net3::{self, Net3Params};
use cvqkd_fading::numerics::integrate_nd;
use cvqkd_fading::oneway::{self, Kernel, OneWayParams};
use cvqkd_fading::{Error, FadingMode, FadingModel};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn oneway_params(eta_min: f64, delta: f64, kernel: Kernel) -> OneWayParams {
    OneWayParams::new(1e6, 1.0, 1.0, FadingModel::new(eta_min, delta).unwrap())
        .unwrap()
        .with_kernel(kernel)
}

#[test]
fn asymptotic_slow_rate_is_half_the_averaged_plob() {
    // pure loss at μ → ∞: β I - χ = -½ log₂(1 - η)
    for (eta_min, delta) in [(0.8, 0.1), (0.8, 0.2), (0.5, 0.5), (0.3, 0.05)] {
        let p = oneway_params(eta_min, delta, Kernel::Asymptotic);
        let slow = oneway::oneway_rate_slow(&p).unwrap();
        let half_plob = 0.5 * plob_bound_averaged(p.fading()).unwrap();
        assert!((slow - half_plob).abs() < 1e-10, "({eta_min}, {delta}): {slow} vs {half_plob}");
    }
}

#[test]
fn closed_form_small_delta_limit() {
    for eta_min in [0.2, 0.5, 0.9] {
        let limit = 0.5 * plob_bound(eta_min).unwrap();
        let near = oneway::oneway_rate_fast_loss_closed(eta_min, 1e-6).unwrap();
        let quad = oneway::oneway_rate_fast(&oneway_params(eta_min, 1e-6, Kernel::Asymptotic)).unwrap();
        assert!((near - limit).abs() < 1e-5);
        assert!((near - quad).abs() < 1e-8);
        assert_eq!(oneway::oneway_rate_fast_loss_closed(eta_min, 0.0).unwrap(), limit);
    }
    assert!(oneway::oneway_rate_fast_loss_closed(0.0, 0.1).is_err());
}

#[test]
fn support_touching_unit_transmissivity() {
    // At μ = 10⁶ both kernels are log-like near η = 1. The exact kernel
    // carries rounding noise of order 1e-8 from entropies of large-ν states.
    for delta in [0.1, 0.3] {
        let eta_min = 1.0 - delta;
        for (kernel, tol) in [(Kernel::Exact, 1e-7), (Kernel::Asymptotic, 1e-9)] {
            let p = oneway_params(eta_min, delta, kernel);
            let a = oneway::oneway_rate_fast(&p).unwrap();
            let b = oneway::oneway_rate_fast(&p.with_nodes(256)).unwrap();
            assert!((a - b).abs() < tol, "{kernel:?}: {a} vs {b}");
        }
    }
}

#[test]
fn exact_kernel_approaches_asymptotic_rates() {
    for (eta_min, delta) in [(0.3, 0.1), (0.6, 0.2)] {
        for mode in FadingMode::ALL {
            let exact = oneway::oneway_rate(&oneway_params(eta_min, delta, Kernel::Exact), mode).unwrap();
            let asym = oneway::oneway_rate(&oneway_params(eta_min, delta, Kernel::Asymptotic), mode).unwrap();
            assert!((exact - asym).abs() < 1e-4, "{mode}: {exact} vs {asym}");
        }
    }
}

/// Mutual information between the displacements of users `i` and `j` given
/// relay outcomes `z = H x + noise`, with `x ~ N(0, (μ-1) I)` per quadrature.
/// Row `k` of `m` combines the received modes into outcome `k`; received mode
/// `l` carries `√η_l x_l` plus noise of variance `η_l + (1 - η_l) ω`.
fn classical_mi(mu: f64, etas: &[f64], omega: f64, m: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let n = etas.len();
    let prior = DMatrix::identity(n, n) * (mu - 1.0);
    let h = m * DMatrix::from_diagonal(&DVector::from_iterator(n, etas.iter().map(|e| e.sqrt())));
    let noise = DMatrix::from_diagonal(&DVector::from_iterator(n, etas.iter().map(|e| e + (1.0 - e) * omega)));
    let r = m * noise * m.transpose();
    let s = &h * &prior * h.transpose() + r;
    let post = &prior - &prior * h.transpose() * s.try_inverse().unwrap() * &h * &prior;
    let det = post[(i, i)] * post[(j, j)] - post[(i, j)] * post[(i, j)];
    0.5 * (post[(i, i)] * post[(j, j)] / det).log2()
}

#[test]
fn mdi_mutual_info_matches_classical_model() {
    // q of the difference, p of the sum
    let q = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
    let p = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
    for &(mu, ea, eb, omega) in &[(2.0, 0.5, 0.7, 1.0), (50.0, 0.9, 0.95, 1.01), (1e4, 0.3, 0.8, 1.2), (1e6, 0.97, 0.97, 1.0)] {
        let attack = AttackModel::uncorrelated(vec![omega; 2]).unwrap();
        let quantum = mdi::mdi_mutual_info(mu, ea, eb, &attack).unwrap();
        let classical = classical_mi(mu, &[ea, eb], omega, &q, 0, 1) + classical_mi(mu, &[ea, eb], omega, &p, 0, 1);
        assert!((quantum - classical).abs() < 1e-9 * classical.max(1.0), "{quantum} vs {classical}");
    }
}

#[test]
fn net3_mutual_info_matches_classical_model() {
    // q of A'-B' and of A'+B'-2C', p of A'+B'+C'
    let q = DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 1.0, 1.0, -2.0]);
    let p = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
    for &(mu, etas, omega) in &[(3.0, [0.9, 0.8, 0.7], 1.0), (15.0, [0.95, 0.95, 0.95], 1.02), (400.0, [0.5, 0.9, 0.6], 1.3)] {
        let attack = AttackModel::uncorrelated(vec![omega; 3]).unwrap();
        let (ab, ac) = net3::net3_pairwise_mutual_info(mu, etas, &attack).unwrap();
        for (quantum, j) in [(ab, 1), (ac, 2)] {
            let classical = classical_mi(mu, &etas, omega, &q, 0, j) + classical_mi(mu, &etas, omega, &p, 0, j);
            assert!((quantum - classical).abs() < 1e-9 * classical.max(1.0), "pair {j}: {quantum} vs {classical}");
        }
    }
}

#[test]
fn net3_slow_rate_against_plain_product_rule() {
    // The plain rule converges slowly across the min(I_AB, I_AC) kink but
    // agrees once the node count is large.
    let fading = FadingModel::new(0.9, 0.05).unwrap();
    let p = Net3Params::new(1.0, 1.0, fading).unwrap();
    let attack = AttackModel::uncorrelated(vec![1.0; 3]).unwrap();
    let mu = 6.0;
    let split = net3::net3_rate_star_at(&p, FadingMode::Slow, mu).unwrap();
    let plain = integrate_nd(
        |x| net3::net3_rate(mu, [x[0], x[1], x[2]], 1.0, &attack).unwrap(),
        &[(0.9, 0.95); 3],
        40,
    )
    .unwrap()
        / 0.05f64.powi(3);
    assert!((split - plain).abs() < 5e-6, "{split} vs {plain}");
}

#[test]
fn net3_orderings_at_fixed_mu() {
    for (eta_min, delta) in [(0.85, 0.05), (0.9, 0.1)] {
        let p = Net3Params::new(1.0, 1.0, FadingModel::new(eta_min, delta).unwrap()).unwrap();
        for mu in [2.0, 5.0, 15.0] {
            let fast = net3::net3_rate_star_at(&p, FadingMode::Fast, mu).unwrap();
            let slow = net3::net3_rate_star_at(&p, FadingMode::Slow, mu).unwrap();
            assert!(fast <= slow, "({eta_min}, {delta}, {mu}): {fast} > {slow}");
        }
    }
}

#[test]
fn net3_rejects_unphysical_correlations() {
    let p = Net3Params::new(1.01, 1.0, FadingModel::point(0.9).unwrap()).unwrap();
    assert!(matches!(
        p.clone().with_correlations([(1.0, 1.0); 3]),
        Err(Error::AttackRejected(_))
    ));
    assert!(p.with_correlations([(0.01, -0.01); 3]).is_ok());
}

#[test]
fn net3_reduces_below_mdi() {
    // Adding a third user cannot raise the key rate of the first pair.
    for eta in [0.9, 0.95, 0.98] {
        let attack3 = AttackModel::uncorrelated(vec![1.0; 3]).unwrap();
        for mu in [2.0, 10.0] {
            let three = net3::net3_rate(mu, [eta; 3], 1.0, &attack3).unwrap();
            let two = mdi::mdi_rate_at(
                &MdiParams::new(mu, 1.0, 1.0, FadingModel::point(eta).unwrap()).unwrap(),
                eta,
                eta,
            )
            .unwrap();
            assert!(three <= two + 1e-12, "eta={eta}, mu={mu}: {three} > {two}");
        }
    }
}

#[test]
fn mdi_worst_case_lowers_the_rate() {
    let fading = FadingModel::point(0.97).unwrap();
    let base = MdiParams::new(50.0, 1.01, 0.98, fading).unwrap();
    let worst = base.with_attack(MdiAttack::WorstCase).unwrap();
    let r0 = mdi::mdi_rate(&base, FadingMode::Fixed).unwrap();
    let r1 = mdi::mdi_rate(&worst, FadingMode::Fixed).unwrap();
    assert!(r1 <= r0 + 1e-12);
    let w = mdi::mdi_worst_attack(50.0, 0.97, 0.97, 1.01).unwrap();
    assert!(AttackModel::two_link(1.01, w.g, w.g_prime).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oneway_fast_below_slow_with_noise(
        eta_min in 0.1f64..0.9,
        frac in 0.01f64..1.0,
        omega in 1.0f64..1.05,
        beta in 0.9f64..=1.0,
        log_mu in 1.0f64..14.0,
    ) {
        let delta = frac * (1.0 - eta_min);
        let fading = FadingModel::new(eta_min, delta).unwrap();
        let p = OneWayParams::new(log_mu.exp(), omega, beta, fading).unwrap();
        let fast = oneway::oneway_rate_fast(&p).unwrap();
        let slow = oneway::oneway_rate_slow(&p).unwrap();
        prop_assert!(fast <= slow + 1e-12);
        prop_assert!(slow <= plob_bound_averaged(&fading).unwrap());
    }

    #[test]
    fn point_mass_collapses_modes(eta in 0.2f64..0.99, log_mu in 1.0f64..10.0) {
        let fading = FadingModel::point(eta).unwrap();
        let p = OneWayParams::new(log_mu.exp(), 1.0, 1.0, fading).unwrap();
        let rates: Vec<f64> = FadingMode::ALL.iter().map(|&m| oneway::oneway_rate(&p, m).unwrap()).collect();
        prop_assert!(rates.iter().all(|r| r == &rates[0]));
    }
}
