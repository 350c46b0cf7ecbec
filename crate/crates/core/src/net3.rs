//! Three-user conferencing network through an untrusted relay.
//!
//! Alice, Bob and Charlie each send one half of a two-mode squeezed vacuum.
//! The relay mixes `A'` and `B'` on a balanced beam splitter and measures `q`
//! of the difference port `R₁⁻`; it then mixes the sum port `R₁⁺` with `C'` on
//! a beam splitter of transmissivity 2/3 and measures `q` of `R₂⁻` and `p` of
//! `R₂⁺`. Alice's variable is reconciled and the conference rate uses the
//! smaller of her mutual informations with Bob and Charlie.
//!
//! Mode order of the joint state: `a, b, c, A', B', C'`, followed by Eve's
//! three output modes and their purifying partners when kept explicitly.

use crate::channel::{correlated_attack_apply, correlated_attack_marginal, AttackModel, FadingModel};
use crate::error::{check_domain, Error, Result};
use crate::gaussian::{
    apply_symplectic, beamsplitter, condition_homodynes, heterodyne_condition, partial_trace,
    symplectic_eigenvalues, tmsv_cm, von_neumann_entropy, CovarianceMatrix, Quadrature,
};
use crate::mdi::heterodyne_mutual_info;
use crate::numerics::{try_integrate_nd, SearchInterval};
use crate::rate::{finite_rate, optimize_mu, ExplicitHolevo, FadingMode, MuOptimum};

/// Gauss-Legendre nodes per transmissivity axis.
pub const DEFAULT_NODES: usize = 16;

const TRAVEL: [usize; 3] = [3, 4, 5];

/// Default `μ` search range.
pub fn default_mu_search() -> SearchInterval {
    SearchInterval::new(2.0, 20.0, 1e-4).expect("static interval is valid")
}

/// Star configuration: every link has the same fading model and noise `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct Net3Params {
    omega: f64,
    beta: f64,
    fading: FadingModel,
    attack: AttackModel,
    mu_search: SearchInterval,
    nodes: usize,
}

impl Net3Params {
    /// Uncorrelated attack with noise `omega` on each link.
    pub fn new(omega: f64, beta: f64, fading: FadingModel) -> Result<Self> {
        check_domain("beta", beta, (0.0..=1.0).contains(&beta), "0 <= beta <= 1")?;
        Ok(Self {
            omega,
            beta,
            fading,
            attack: AttackModel::uncorrelated(vec![omega; 3])?,
            mu_search: default_mu_search(),
            nodes: DEFAULT_NODES,
        })
    }

    /// Correlation blocks `G₁` on (A,B), `G₂` on (B,C), `G₃` on (A,C).
    pub fn with_correlations(mut self, blocks: [(f64, f64); 3]) -> Result<Self> {
        self.attack = AttackModel::three_link([self.omega; 3], blocks)?;
        Ok(self)
    }

    pub fn with_mu_search(mut self, interval: SearchInterval) -> Result<Self> {
        check_domain("mu_search lower bound", interval.lo(), interval.lo() >= 1.0, "mu >= 1")?;
        self.mu_search = interval;
        Ok(self)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_fading(mut self, fading: FadingModel) -> Self {
        self.fading = fading;
        self
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

    pub fn attack(&self) -> &AttackModel {
        &self.attack
    }

    pub fn mu_search(&self) -> SearchInterval {
        self.mu_search
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

fn sources(mu: f64) -> Result<CovarianceMatrix> {
    let t = tmsv_cm(mu)?;
    // (a, A', b, B', c, C') -> (a, b, c, A', B', C')
    t.direct_sum(&t).direct_sum(&t).permute_modes(&[0, 2, 4, 1, 3, 5])
}

fn check_three_link(attack: &AttackModel) -> Result<()> {
    if attack.links() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "three-user relay needs a 3-link attack, got {} links",
            attack.links()
        )));
    }
    Ok(())
}

/// Joint state with Eve kept: `a, b, c, A', B', C'`, Eve's outputs, partners.
pub fn net3_joint_cm(mu: f64, etas: [f64; 3], attack: &AttackModel) -> Result<CovarianceMatrix> {
    check_three_link(attack)?;
    correlated_attack_apply(&sources(mu)?, &TRAVEL, &etas, attack)
}

/// Marginal of [`net3_joint_cm`] on `a, b, c, A', B', C'`.
pub fn net3_system_cm(mu: f64, etas: [f64; 3], attack: &AttackModel) -> Result<CovarianceMatrix> {
    check_three_link(attack)?;
    correlated_attack_marginal(&sources(mu)?, &TRAVEL, &etas, attack)
}

/// Relay measurement on modes 3, 4, 5 (`A', B', C'`). Returns the state of
/// every other mode in its original order.
pub fn net3_relay_condition(v: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if v.modes() < 6 {
        return Err(Error::DimensionMismatch(format!(
            "three-user relay needs at least 6 modes, got {}",
            v.modes()
        )));
    }
    let n = v.modes();
    // R₁⁺ replaces A', R₁⁻ replaces B'
    let first = apply_symplectic(&beamsplitter(0.5, 3, 4, n)?, v)?;
    // R₂⁺ replaces R₁⁺, R₂⁻ replaces C'
    let second = apply_symplectic(&beamsplitter(2.0 / 3.0, 3, 5, n)?, &first)?;
    condition_homodynes(
        &second,
        &[(4, Quadrature::Q), (5, Quadrature::Q), (3, Quadrature::P)],
    )
}

fn post_relay(mu: f64, etas: [f64; 3], attack: &AttackModel) -> Result<CovarianceMatrix> {
    net3_relay_condition(&net3_system_cm(mu, etas, attack)?)
}

fn holevo_of(v: &CovarianceMatrix) -> Result<f64> {
    Ok(von_neumann_entropy(v)? - von_neumann_entropy(&heterodyne_condition(v, 0)?)?)
}

fn mutual_info_of(v: &CovarianceMatrix) -> Result<f64> {
    Ok(heterodyne_mutual_info(v, 0, 1)?.min(heterodyne_mutual_info(v, 0, 2)?))
}

/// `S(abc|γ) - S(bc|γ, x_a)`.
pub fn net3_holevo(mu: f64, etas: [f64; 3], attack: &AttackModel) -> Result<f64> {
    holevo_of(&post_relay(mu, etas, attack)?)
}

/// Holevo information from Eve's explicit modes after the relay outcome.
pub fn net3_holevo_explicit(mu: f64, etas: [f64; 3], attack: &AttackModel) -> Result<ExplicitHolevo> {
    // after the relay: a, b, c, then Eve's six modes
    let global = net3_relay_condition(&net3_joint_cm(mu, etas, attack)?)?;
    let eve: Vec<usize> = (3..global.modes()).collect();
    let after_a = heterodyne_condition(&global, 0)?;
    let eve_after_a: Vec<usize> = (2..after_a.modes()).collect();
    Ok(ExplicitHolevo {
        holevo: von_neumann_entropy(&partial_trace(&global, &eve)?)?
            - von_neumann_entropy(&partial_trace(&after_a, &eve_after_a)?)?,
        conditional_purity: symplectic_eigenvalues(&global)?.purity_deviation(),
    })
}

/// Pairwise mutual informations `(I_AB, I_AC)` of the heterodyne outcomes
/// given the relay outcomes.
pub fn net3_pairwise_mutual_info(mu: f64, etas: [f64; 3], attack: &AttackModel) -> Result<(f64, f64)> {
    let v = post_relay(mu, etas, attack)?;
    Ok((heterodyne_mutual_info(&v, 0, 1)?, heterodyne_mutual_info(&v, 0, 2)?))
}

/// `min(I_AB, I_AC)`.
pub fn net3_mutual_info(mu: f64, etas: [f64; 3], attack: &AttackModel) -> Result<f64> {
    mutual_info_of(&post_relay(mu, etas, attack)?)
}

/// Conference key rate `β min(I_AB, I_AC) - χ`.
pub fn net3_rate(mu: f64, etas: [f64; 3], beta: f64, attack: &AttackModel) -> Result<f64> {
    check_domain("beta", beta, (0.0..=1.0).contains(&beta), "0 <= beta <= 1")?;
    let v = post_relay(mu, etas, attack)?;
    finite_rate(beta * mutual_info_of(&v)? - holevo_of(&v)?)
}

fn star_fixed(p: &Net3Params, mu: f64, eta: f64) -> Result<f64> {
    net3_rate(mu, [eta; 3], p.beta, &p.attack)
}

fn star_fast(p: &Net3Params, mu: f64) -> Result<f64> {
    let f = p.fading;
    if f.is_point_mass() {
        return star_fixed(p, mu, f.eta_min());
    }
    let (lo, hi) = (f.eta_min(), f.eta_max());
    let chi = try_integrate_nd(
        |x| net3_holevo(mu, [x[0], x[1], x[2]], &p.attack),
        &[(lo, hi); 3],
        p.nodes,
    )? / f.width().powi(3);
    let i = net3_mutual_info(mu, [lo; 3], &p.attack)?;
    finite_rate(p.beta * i - chi)
}

fn star_slow(p: &Net3Params, mu: f64) -> Result<f64> {
    let f = p.fading;
    if f.is_point_mass() {
        return star_fixed(p, mu, f.eta_min());
    }
    let (lo, hi) = (f.eta_min(), f.eta_max());
    // min(I_AB, I_AC) switches branch on η_B = η_C; each side of that plane
    // is integrated on its own through η_C = η_B + s (η_max - η_B), s ∈ [0, 1].
    let half = |swap: bool| {
        try_integrate_nd(
            |x| {
                let upper = x[1] + x[2] * (hi - x[1]);
                let etas = if swap { [x[0], upper, x[1]] } else { [x[0], x[1], upper] };
                Ok((hi - x[1]) * net3_rate(mu, etas, p.beta, &p.attack)?)
            },
            &[(lo, hi), (lo, hi), (0.0, 1.0)],
            p.nodes,
        )
    };
    finite_rate((half(false)? + half(true)?) / f.width().powi(3))
}

/// Rate at a fixed `μ` in the requested fading mode; [`FadingMode::Fixed`]
/// uses the mean transmissivity on every link.
pub fn net3_rate_star_at(params: &Net3Params, mode: FadingMode, mu: f64) -> Result<f64> {
    match mode {
        FadingMode::Fast => star_fast(params, mu),
        FadingMode::Slow => star_slow(params, mu),
        FadingMode::Fixed => star_fixed(params, mu, params.fading.eta_mean()),
    }
}

/// Non-fading star network at transmissivity `eta`, optimized over `μ`.
pub fn net3_rate_star(params: &Net3Params, eta: f64) -> Result<MuOptimum> {
    optimize_mu(|mu| star_fixed(params, mu, eta), params.mu_search, false)
}

/// Fast-fading star network, optimized over `μ`.
pub fn net3_rate_fast_star(params: &Net3Params) -> Result<MuOptimum> {
    optimize_mu(|mu| star_fast(params, mu), params.mu_search, false)
}

/// Slow-fading star network, optimized over `μ`.
pub fn net3_rate_slow_star(params: &Net3Params) -> Result<MuOptimum> {
    optimize_mu(|mu| star_slow(params, mu), params.mu_search, false)
}

/// Optimized rate in the requested fading mode.
pub fn net3_optimize(params: &Net3Params, mode: FadingMode) -> Result<MuOptimum> {
    match mode {
        FadingMode::Fast => net3_rate_fast_star(params),
        FadingMode::Slow => net3_rate_slow_star(params),
        FadingMode::Fixed => net3_rate_star(params, params.fading.eta_mean()),
    }
}
