//! One-way coherent-state protocol with homodyne detection and reverse
//! reconciliation, over fixed and fading thermal-loss channels.
//!
//! Alice's source is described in entanglement-based form: she keeps mode `a`
//! of a two-mode squeezed vacuum with parameter `μ` and sends mode `B`.

use std::f64::consts::LOG2_E;

use crate::channel::{dilated_thermal_loss, thermal_loss_apply, FadingModel};
use crate::error::{check_domain, Result};
use crate::gaussian::{
    entropy_h, heterodyne_condition, homodyne_condition, partial_trace, symplectic_eigenvalues,
    tmsv_cm, von_neumann_entropy, CovarianceMatrix, Quadrature,
};
use crate::numerics::{try_integrate_1d, SearchInterval};
use crate::rate::{finite_rate, optimize_mu, ExplicitHolevo, FadingMode, MuOptimum};

/// Gauss-Legendre nodes used for the transmissivity average.
pub const DEFAULT_NODES: usize = 64;

/// Which formulas supply `I(η)` and `χ(η)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Entropies of the exact covariance matrices; valid for every `μ`.
    #[default]
    Exact,
    /// Leading order in `μ ≫ 1`. Diverges at `η ∈ {0, 1}`.
    Asymptotic,
}

impl std::str::FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Kernel::Exact),
            "asymptotic" => Ok(Kernel::Asymptotic),
            other => Err(format!("unknown kernel '{other}' (expected exact|asymptotic)")),
        }
    }
}

/// Source and post-processing parameters of the one-way protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneWayParams {
    mu: f64,
    omega: f64,
    beta: f64,
    fading: FadingModel,
    kernel: Kernel,
    nodes: usize,
}

impl OneWayParams {
    /// `mu = φ + 1` with `φ` the modulation variance, `omega` the thermal
    /// noise of the attack and `beta` the reconciliation efficiency.
    pub fn new(mu: f64, omega: f64, beta: f64, fading: FadingModel) -> Result<Self> {
        check_mu(mu)?;
        check_omega(omega)?;
        check_domain("beta", beta, (0.0..=1.0).contains(&beta), "0 <= beta <= 1")?;
        Ok(Self {
            mu,
            omega,
            beta,
            fading,
            kernel: Kernel::Exact,
            nodes: DEFAULT_NODES,
        })
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        self.mu = mu;
        Ok(self)
    }

    pub fn with_fading(mut self, fading: FadingModel) -> Self {
        self.fading = fading;
        self
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn fading(&self) -> &FadingModel {
        &self.fading
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

fn check_mu(mu: f64) -> Result<()> {
    check_domain("mu", mu, mu >= 1.0, "mu >= 1")
}

fn check_omega(omega: f64) -> Result<()> {
    check_domain("omega", omega, omega >= 1.0, "omega >= 1")
}

fn check_eta(eta: f64) -> Result<()> {
    check_domain("eta", eta, (0.0..=1.0).contains(&eta), "0 <= eta <= 1")
}

fn check_inputs(mu: f64, eta: f64, omega: f64) -> Result<()> {
    check_mu(mu)?;
    check_eta(eta)?;
    check_omega(omega)
}

/// Covariance matrix of modes `(a, B)` after `B` crosses the thermal-loss channel.
pub fn oneway_cm(mu: f64, eta: f64, omega: f64) -> Result<CovarianceMatrix> {
    check_inputs(mu, eta, omega)?;
    thermal_loss_apply(&tmsv_cm(mu)?, 1, eta, omega)
}

/// `I(x:y) = ½ log₂(V_B / V_{B|x})` for Bob's homodyne outcome.
pub fn oneway_mutual_info(mu: f64, eta: f64, omega: f64) -> Result<f64> {
    check_inputs(mu, eta, omega)?;
    let noise = eta + (1.0 - eta) * omega;
    let v_b = eta * mu + (1.0 - eta) * omega;
    Ok(0.5 * (v_b / noise).log2())
}

/// Leading-order mutual information for `μ ≫ 1`; `-∞` at `η = 0`.
pub fn oneway_mutual_info_asym(mu: f64, eta: f64, omega: f64) -> Result<f64> {
    check_inputs(mu, eta, omega)?;
    Ok(0.5 * (eta * mu / (eta + (1.0 - eta) * omega)).log2())
}

/// Eve's Holevo information on Bob's outcome, `S(aB) - S(a|y)`.
///
/// Eve holds the purification of `(a, B)`, so her entropies equal those of
/// Alice's and Bob's modes before and after Bob's measurement.
pub fn oneway_holevo(mu: f64, eta: f64, omega: f64) -> Result<f64> {
    let v = oneway_cm(mu, eta, omega)?;
    let conditional = homodyne_condition(&v, 1, Quadrature::Q)?;
    Ok(von_neumann_entropy(&v)? - von_neumann_entropy(&conditional)?)
}

/// Holevo information from Eve's modes `(e, E')` of the entangling-cloner
/// dilation, conditioned on Bob's homodyne outcome.
pub fn oneway_holevo_explicit(mu: f64, eta: f64, omega: f64) -> Result<ExplicitHolevo> {
    check_inputs(mu, eta, omega)?;
    // modes: a, B', e, E'
    let global = dilated_thermal_loss(&tmsv_cm(mu)?, 1, eta, &tmsv_cm(omega)?)?;
    let eve = partial_trace(&global, &[2, 3])?;
    // after measuring B': a, e, E'
    let conditional = homodyne_condition(&global, 1, Quadrature::Q)?;
    let eve_conditional = partial_trace(&conditional, &[1, 2])?;
    Ok(ExplicitHolevo {
        holevo: von_neumann_entropy(&eve)? - von_neumann_entropy(&eve_conditional)?,
        conditional_purity: symplectic_eigenvalues(&conditional)?.purity_deviation(),
    })
}

/// `½ log₂[η(1-η)μ/ω] + h(ω)`, the leading order for `μη ≫ 1` and `μ(1-η) ≫ 1`.
/// Negative outside that regime; `-∞` at `η ∈ {0, 1}`.
pub fn oneway_holevo_asym(mu: f64, eta: f64, omega: f64) -> Result<f64> {
    check_inputs(mu, eta, omega)?;
    Ok(0.5 * (eta * (1.0 - eta) * mu / omega).log2() + entropy_h(omega)?)
}

/// [`oneway_holevo_asym`] clamped at zero.
pub fn oneway_holevo_asym_clamped(mu: f64, eta: f64, omega: f64) -> Result<f64> {
    Ok(oneway_holevo_asym(mu, eta, omega)?.max(0.0))
}

/// Mutual information of Alice's heterodyne and Bob's homodyne outcomes from
/// the conditional covariance matrices of the entanglement-based picture.
pub fn oneway_mutual_info_from_cm(mu: f64, eta: f64, omega: f64) -> Result<f64> {
    let v = oneway_cm(mu, eta, omega)?;
    let v_b = v.matrix()[(2, 2)];
    let v_b_given_x = heterodyne_condition(&v, 0)?.matrix()[(0, 0)];
    Ok(0.5 * (v_b / v_b_given_x).log2())
}

fn mutual_info(p: &OneWayParams, eta: f64) -> Result<f64> {
    match p.kernel {
        Kernel::Exact => oneway_mutual_info(p.mu, eta, p.omega),
        Kernel::Asymptotic => oneway_mutual_info_asym(p.mu, eta, p.omega),
    }
}

fn holevo(p: &OneWayParams, eta: f64) -> Result<f64> {
    match p.kernel {
        Kernel::Exact => oneway_holevo(p.mu, eta, p.omega),
        Kernel::Asymptotic => oneway_holevo_asym(p.mu, eta, p.omega),
    }
}

/// Mean of `f` over the fading support. The Holevo term grows like
/// `-½ log₂(1 - η)` until `(1 - η) μ ~ 1` (exactly so for the asymptotic
/// kernel), so nodes are graded toward `η_max` through `η = η_max - w t⁴`,
/// which leaves a smooth integrand in `t`.
fn fading_average<F>(params: &OneWayParams, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (lo, hi) = (params.fading.eta_min(), params.fading.eta_max());
    let width = hi - lo;
    // nodes closer to η = 1 than one ulp would land on the singular point
    let ceiling = hi.min(1.0 - f64::EPSILON / 2.0);
    let total = try_integrate_1d(
        |t| Ok(4.0 * width * t.powi(3) * f((hi - width * t.powi(4)).min(ceiling))?),
        0.0,
        1.0,
        params.nodes,
    )?;
    Ok(total / width)
}

/// `β I(η) - χ(η)` at a single transmissivity.
pub fn oneway_rate_fixed(params: &OneWayParams, eta: f64) -> Result<f64> {
    finite_rate(params.beta * mutual_info(params, eta)? - holevo(params, eta)?)
}

/// Fast fading: the parties assume `η_min` for their mutual information while
/// Eve's Holevo information is averaged over the fading distribution.
pub fn oneway_rate_fast(params: &OneWayParams) -> Result<f64> {
    let f = params.fading;
    if f.is_point_mass() {
        return oneway_rate_fixed(params, f.eta_min());
    }
    let chi = fading_average(params, |eta| holevo(params, eta))?;
    finite_rate(params.beta * mutual_info(params, f.eta_min())? - chi)
}

/// Slow fading: the fixed-channel rate averaged over the fading distribution.
pub fn oneway_rate_slow(params: &OneWayParams) -> Result<f64> {
    let f = params.fading;
    if f.is_point_mass() {
        return oneway_rate_fixed(params, f.eta_min());
    }
    finite_rate(fading_average(params, |eta| {
        Ok(params.beta * mutual_info(params, eta)? - holevo(params, eta)?)
    })?)
}

/// Rate in the requested fading mode; [`FadingMode::Fixed`] uses the mean
/// transmissivity.
pub fn oneway_rate(params: &OneWayParams, mode: FadingMode) -> Result<f64> {
    match mode {
        FadingMode::Fast => oneway_rate_fast(params),
        FadingMode::Slow => oneway_rate_slow(params),
        FadingMode::Fixed => oneway_rate_fixed(params, params.fading.eta_mean()),
    }
}

fn x_log2_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Closed form of the fast-fading rate for pure loss, `β = 1` and `μ → ∞`.
pub fn oneway_rate_fast_loss_closed(eta_min: f64, delta_eta: f64) -> Result<f64> {
    check_domain("eta_min", eta_min, eta_min > 0.0 && eta_min < 1.0, "0 < eta_min < 1")?;
    check_domain(
        "delta_eta",
        delta_eta,
        delta_eta >= 0.0 && eta_min + delta_eta <= 1.0,
        "0 <= delta_eta <= 1 - eta_min",
    )?;
    if delta_eta == 0.0 {
        return Ok(-0.5 * (-eta_min).ln_1p() * LOG2_E);
    }
    let eta_max = eta_min + delta_eta;
    let half_inv = 0.5 / delta_eta;
    Ok(half_inv * (x_log2_x(1.0 - eta_max) - x_log2_x(1.0 - eta_min))
        - half_inv * eta_max * (eta_max / eta_min).log2()
        + LOG2_E)
}

/// Default `μ` search range for the one-way protocol, in `ln μ`.
pub fn default_mu_search() -> SearchInterval {
    SearchInterval::new(0.0, 1e8f64.ln(), 1e-4).expect("static interval is valid")
}

/// Maximizes the rate over `μ` by golden-section search on `ln μ`.
pub fn oneway_optimize_mu(
    params: &OneWayParams,
    mode: FadingMode,
    log_mu: SearchInterval,
) -> Result<MuOptimum> {
    optimize_mu(
        |mu| oneway_rate(&params.with_mu(mu)?, mode),
        log_mu,
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::plob_bound_averaged;
    use crate::gaussian::symplectic_eigenvalues;
    use proptest::prelude::*;

    fn params(mu: f64, omega: f64, beta: f64, eta_min: f64, delta: f64) -> OneWayParams {
        OneWayParams::new(mu, omega, beta, FadingModel::new(eta_min, delta).unwrap()).unwrap()
    }

    #[test]
    fn cm_limits() {
        let v = oneway_cm(7.0, 1.0, 1.3).unwrap();
        assert_eq!(v, tmsv_cm(7.0).unwrap());
        let v = oneway_cm(7.0, 0.0, 1.3).unwrap();
        let expect = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![7.0, 7.0, 1.3, 1.3]));
        assert!((v.matrix() - expect).amax() < 1e-15);
        let v = oneway_cm(7.0, 0.6, 1.2).unwrap();
        assert!((v.matrix()[(2, 2)] - 4.68).abs() < 1e-14);
        assert!((v.matrix()[(3, 3)] - 4.68).abs() < 1e-14);
        assert!((v.matrix()[(0, 2)] - (0.6f64 * 48.0).sqrt()).abs() < 1e-14);
        assert!(oneway_cm(0.5, 0.5, 1.0).is_err());
        assert!(oneway_cm(2.0, 1.5, 1.0).is_err());
        assert!(oneway_cm(2.0, 0.5, 0.99).is_err());
    }

    #[test]
    fn mutual_info_values() {
        assert_eq!(oneway_mutual_info(1.0, 0.4, 1.2).unwrap(), 0.0);
        assert!((oneway_mutual_info(9.0, 1.0, 1.7).unwrap() - 0.5 * 9f64.log2()).abs() < 1e-15);
        assert_eq!(oneway_mutual_info(9.0, 0.0, 1.0).unwrap(), 0.0);
        let i = oneway_mutual_info(1e6, 0.5, 1.0).unwrap();
        assert!((i - 9.4658).abs() < 1e-4, "{i}");
        let asym = oneway_mutual_info_asym(1e6, 0.8, 1.0).unwrap();
        assert!((asym - 0.5 * 8e5f64.log2()).abs() < 1e-12);
        assert!((asym - 9.80482).abs() < 1e-5);
        assert_eq!(oneway_mutual_info_asym(1e6, 0.0, 1.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn holevo_limits() {
        assert!(oneway_holevo(50.0, 1.0, 1.0).unwrap().abs() < 1e-9);
        assert!(oneway_holevo(1.0, 0.3, 1.0).unwrap().abs() < 1e-12);
        // Bob receives only Eve's thermal mode
        let chi = oneway_holevo(20.0, 0.0, 1.4).unwrap();
        assert!((chi - entropy_h(1.4).unwrap()).abs() < 1e-10);
        let chi = oneway_holevo(1e6, 0.5, 1.0).unwrap();
        assert!((chi - 8.9658).abs() < 2e-3, "{chi}");
    }

    #[test]
    fn asymptotic_holevo() {
        let chi = oneway_holevo_asym(1e6, 0.5, 1.0).unwrap();
        assert!((chi - 0.5 * 2.5e5f64.log2()).abs() < 1e-12);
        let d = oneway_holevo_asym(1e6, 0.5, 1.01).unwrap() - chi;
        let expect = entropy_h(1.01).unwrap() - 0.5 * 1.01f64.log2();
        assert!((d - expect).abs() < 1e-12);
        let exact = oneway_holevo(1e6, 0.5, 1.01).unwrap();
        let asym = oneway_holevo_asym(1e6, 0.5, 1.01).unwrap();
        assert!(((exact - asym) / asym).abs() <= 1e-3);
        assert_eq!(oneway_holevo_asym(1e6, 1.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(oneway_holevo_asym(2.0, 0.5, 1.0).unwrap() < 0.0);
        assert_eq!(oneway_holevo_asym_clamped(2.0, 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn explicit_eve_matches_shortcut() {
        for &(mu, eta, omega) in &[(5.0, 0.3, 1.0), (40.0, 0.7, 1.2), (1e3, 0.05, 1.01), (2.0, 0.99, 3.0)] {
            let shortcut = oneway_holevo(mu, eta, omega).unwrap();
            let explicit = oneway_holevo_explicit(mu, eta, omega).unwrap();
            assert!((shortcut - explicit.holevo).abs() < 1e-8, "{mu} {eta} {omega}");
            assert!(explicit.conditional_purity < 1e-7);
        }
    }

    #[test]
    fn fixed_rate_limits() {
        let p = params(1e6, 1.0, 1.0, 0.5, 0.0);
        let r = oneway_rate_fixed(&p, 0.5).unwrap();
        assert!((r - 0.5).abs() < 1e-4, "{r}");
        let p0 = params(1e6, 1.0, 0.0, 0.5, 0.0);
        assert!(oneway_rate_fixed(&p0, 0.5).unwrap() <= 0.0);
        let p = params(16.0, 1.0, 1.0, 1.0, 0.0);
        assert!((oneway_rate_fixed(&p, 1.0).unwrap() - 2.0).abs() < 1e-9);
        let asym = p.with_kernel(Kernel::Asymptotic);
        assert!(oneway_rate_fixed(&asym, 1.0).is_err());
    }

    #[test]
    fn point_mass_fading_is_fixed_channel() {
        let p = params(1e3, 1.01, 0.95, 0.4, 0.0);
        let fixed = oneway_rate_fixed(&p, 0.4).unwrap();
        assert_eq!(oneway_rate_fast(&p).unwrap(), fixed);
        assert_eq!(oneway_rate_slow(&p).unwrap(), fixed);
        let thin = params(1e3, 1.01, 0.95, 0.4, 1e-10);
        let fast = oneway_rate_fast(&thin).unwrap();
        assert!((fast - fixed).abs() < 1e-9, "{fast} vs {fixed}");
        assert!((oneway_rate_slow(&thin).unwrap() - fixed).abs() < 1e-9);
    }

    #[test]
    fn closed_form_spot_values() {
        // exact antiderivative values; decimal references agree to 2e-5
        let a = oneway_rate_fast_loss_closed(0.8, 0.1).unwrap();
        let b = oneway_rate_fast_loss_closed(0.5, 0.2).unwrap();
        assert!((a - 1.33901).abs() < 2e-5, "{a}");
        assert!((b - 0.54048).abs() < 2e-5, "{b}");
        let limit = oneway_rate_fast_loss_closed(0.6, 0.0).unwrap();
        assert!((limit + 0.5 * 0.4f64.log2()).abs() < 1e-15);
        let near = oneway_rate_fast_loss_closed(0.6, 1e-6).unwrap();
        assert!((near - limit).abs() < 1e-5);
        assert!(oneway_rate_fast_loss_closed(0.0, 0.1).is_err());
        assert!(oneway_rate_fast_loss_closed(0.95, 0.1).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for i in 0..10 {
            for j in 0..5 {
                let eta_min = 0.05 + 0.09 * i as f64;
                let delta = 0.01 + 0.02 * j as f64;
                let p = params(1e6, 1.0, 1.0, eta_min, delta).with_kernel(Kernel::Asymptotic);
                let quad = oneway_rate_fast(&p).unwrap();
                let closed = oneway_rate_fast_loss_closed(eta_min, delta).unwrap();
                assert!((quad - closed).abs() <= 1e-8, "{eta_min} {delta}: {quad} vs {closed}");
            }
        }
    }

    #[test]
    fn slow_rate_spot_value() {
        let p = params(1e6, 1.0, 1.0, 0.8, 0.1).with_kernel(Kernel::Asymptotic);
        let slow = oneway_rate_slow(&p).unwrap();
        let oracle = 0.5 * plob_bound_averaged(p.fading()).unwrap();
        assert!((slow - oracle).abs() < 1e-10);
        assert!((slow - 1.38228).abs() < 5e-5, "{slow}");
    }

    #[test]
    fn quadrature_converges() {
        let p = params(1e6, 1.01, 0.98, 0.3, 0.1);
        let a = oneway_rate_fast(&p).unwrap();
        let b = oneway_rate_fast(&p.with_nodes(128)).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn mu_optimum_beats_grid() {
        let p = params(10.0, 1.01, 0.95, 0.5, 0.1);
        let best = oneway_optimize_mu(&p, FadingMode::Fast, default_mu_search()).unwrap();
        for k in 0..=40 {
            let mu = (k as f64 * 1e8f64.ln() / 40.0).exp();
            let r = oneway_rate_fast(&p.with_mu(mu).unwrap()).unwrap();
            assert!(best.rate >= r - 1e-6, "mu={mu}: {r} > {}", best.rate);
        }
        assert!(best.mu > 1.0 && best.mu < 1e8);
    }

    #[test]
    fn imperfect_reconciliation_breaks_monotonicity() {
        // for μ ≫ 1, dR/dη ∝ (β - 1)/η + 1/(1 - η), negative below η = (1 - β)/(2 - β)
        let p = params(1e4, 1.0, 0.9, 0.5, 0.0);
        let low = oneway_rate_fixed(&p, 0.02).unwrap();
        let high = oneway_rate_fixed(&p, 0.06).unwrap();
        assert!(high < low);
        assert!(oneway_rate_fixed(&p, 0.3).unwrap() > oneway_rate_fixed(&p, 0.2).unwrap());
    }

    #[test]
    fn purity_of_tmsv_input() {
        let s = symplectic_eigenvalues(&oneway_cm(30.0, 1.0, 1.0).unwrap()).unwrap();
        assert!(s.purity_deviation() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prepare_and_measure_matches_entanglement_based(
            mu in 1.0f64..1e5, eta in 0.0f64..=1.0, omega in 1.0f64..3.0,
        ) {
            let formula = oneway_mutual_info(mu, eta, omega).unwrap();
            let from_cm = oneway_mutual_info_from_cm(mu, eta, omega).unwrap();
            prop_assert!((formula - from_cm).abs() <= 1e-9, "{} vs {}", formula, from_cm);
        }

        #[test]
        fn fixed_rate_increases_with_eta(
            mu in 2.0f64..1e4, omega in 1.0f64..1.5, eta in 0.05f64..0.9,
        ) {
            let p = params(mu, omega, 1.0, 0.5, 0.0);
            let lo = oneway_rate_fixed(&p, eta).unwrap();
            let hi = oneway_rate_fixed(&p, eta + 0.05).unwrap();
            prop_assert!(hi >= lo - 1e-12);
        }

        #[test]
        fn fast_slow_plob_ordering(
            eta_min in 0.05f64..0.8, delta in 0.01f64..0.19, omega in 1.0f64..1.1, mu in 10.0f64..1e6,
        ) {
            let p = params(mu, omega, 1.0, eta_min, delta);
            let fast = oneway_rate_fast(&p).unwrap();
            let slow = oneway_rate_slow(&p).unwrap();
            let plob = plob_bound_averaged(p.fading()).unwrap();
            prop_assert!(fast <= slow + 1e-12);
            prop_assert!(slow <= plob + 1e-12);
        }
    }
}
