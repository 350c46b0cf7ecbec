//! Two-user measurement-device-independent protocol: Alice and Bob each send
//! one half of a two-mode squeezed vacuum to an untrusted relay that performs
//! a continuous-variable Bell detection. Alice's variable is reconciled.
//!
//! Mode order of the joint state: `a, b, A', B'`, followed by Eve's output
//! modes and their purifying partners when Eve is kept explicitly.

use crate::channel::{correlated_attack_apply, correlated_attack_marginal, AttackModel, FadingModel};
use crate::error::{check_domain, Error, Result};
use crate::gaussian::{
    beamsplitter, apply_symplectic, condition_homodynes, heterodyne_condition, partial_trace,
    symplectic_eigenvalues, tmsv_cm, von_neumann_entropy, CovarianceMatrix, Quadrature,
};
use crate::numerics::{try_integrate_nd, SearchInterval};
use crate::rate::{finite_rate, optimize_mu, ExplicitHolevo, FadingMode, MuOptimum};

/// Gauss-Legendre nodes per transmissivity axis.
pub const DEFAULT_NODES: usize = 24;

/// Grid resolution per axis of the worst-case attack search.
pub const ATTACK_GRID: usize = 41;

/// Eve's choice of correlations between the two injected modes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MdiAttack {
    /// Independent entangling cloners with equal thermal noise.
    #[default]
    Uncorrelated,
    /// Correlation block `G = diag(g, g')`.
    Correlated { g: f64, g_prime: f64 },
    /// The correlation maximizing Eve's Holevo information at each
    /// transmissivity pair.
    WorstCase,
}

/// Symmetric configuration: both links share the fading model and `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdiParams {
    mu: f64,
    omega: f64,
    beta: f64,
    fading: FadingModel,
    attack: MdiAttack,
    nodes: usize,
}

impl MdiParams {
    pub fn new(mu: f64, omega: f64, beta: f64, fading: FadingModel) -> Result<Self> {
        check_domain("mu", mu, mu >= 1.0, "mu >= 1")?;
        check_domain("omega", omega, omega >= 1.0, "omega >= 1")?;
        check_domain("beta", beta, (0.0..=1.0).contains(&beta), "0 <= beta <= 1")?;
        Ok(Self {
            mu,
            omega,
            beta,
            fading,
            attack: MdiAttack::Uncorrelated,
            nodes: DEFAULT_NODES,
        })
    }

    /// Fixed correlations are checked for physicality here.
    pub fn with_attack(mut self, attack: MdiAttack) -> Result<Self> {
        if let MdiAttack::Correlated { g, g_prime } = attack {
            AttackModel::two_link(self.omega, g, g_prime)?;
        }
        self.attack = attack;
        Ok(self)
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        check_domain("mu", mu, mu >= 1.0, "mu >= 1")?;
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

    pub fn attack(&self) -> MdiAttack {
        self.attack
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

fn sources(mu: f64) -> Result<CovarianceMatrix> {
    // (a, A', b, B') -> (a, b, A', B')
    tmsv_cm(mu)?.direct_sum(&tmsv_cm(mu)?).permute_modes(&[0, 2, 1, 3])
}

/// Joint state after both links, with Eve's modes kept: `a, b, A', B'`,
/// Eve's outputs `E_A, E_B`, then their two purifying partners.
pub fn mdi_joint_cm(mu: f64, eta_a: f64, eta_b: f64, attack: &AttackModel) -> Result<CovarianceMatrix> {
    check_two_link(attack)?;
    correlated_attack_apply(&sources(mu)?, &[2, 3], &[eta_a, eta_b], attack)
}

/// Marginal of [`mdi_joint_cm`] on `a, b, A', B'`.
pub fn mdi_system_cm(mu: f64, eta_a: f64, eta_b: f64, attack: &AttackModel) -> Result<CovarianceMatrix> {
    check_two_link(attack)?;
    correlated_attack_marginal(&sources(mu)?, &[2, 3], &[eta_a, eta_b], attack)
}

fn check_two_link(attack: &AttackModel) -> Result<()> {
    if attack.links() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "two-user relay needs a 2-link attack, got {} links",
            attack.links()
        )));
    }
    Ok(())
}

/// Bell detection on `mode_a` and `mode_b`: a balanced beam splitter, then
/// `q` of the difference port and `p` of the sum port are measured. Returns
/// the state of all other modes, in their original order.
pub fn mdi_relay_condition(v: &CovarianceMatrix, mode_a: usize, mode_b: usize) -> Result<CovarianceMatrix> {
    let mixed = apply_symplectic(&beamsplitter(0.5, mode_a, mode_b, v.modes())?, v)?;
    // mode_a now carries the sum port, mode_b the difference port
    condition_homodynes(&mixed, &[(mode_b, Quadrature::Q), (mode_a, Quadrature::P)])
}

/// Conditional state of `(a, b)` given the relay outcome.
fn post_relay(mu: f64, eta_a: f64, eta_b: f64, attack: &AttackModel) -> Result<CovarianceMatrix> {
    mdi_relay_condition(&mdi_system_cm(mu, eta_a, eta_b, attack)?, 2, 3)
}

/// `S(ab|γ) - S(b|γ, x_a)`: Eve purifies the post-relay state of `(a, b)`.
pub fn mdi_holevo(mu: f64, eta_a: f64, eta_b: f64, attack: &AttackModel) -> Result<f64> {
    let v = post_relay(mu, eta_a, eta_b, attack)?;
    let v_b = heterodyne_condition(&v, 0)?;
    Ok(von_neumann_entropy(&v)? - von_neumann_entropy(&v_b)?)
}

/// Holevo information from Eve's explicit modes after the relay outcome.
pub fn mdi_holevo_explicit(mu: f64, eta_a: f64, eta_b: f64, attack: &AttackModel) -> Result<ExplicitHolevo> {
    // after the relay: a, b, then Eve's four modes
    let global = mdi_relay_condition(&mdi_joint_cm(mu, eta_a, eta_b, attack)?, 2, 3)?;
    let eve: Vec<usize> = (2..global.modes()).collect();
    let eve_given_relay = partial_trace(&global, &eve)?;
    let after_a = heterodyne_condition(&global, 0)?;
    let eve_given_a: Vec<usize> = (1..after_a.modes()).collect();
    let eve_given_both = partial_trace(&after_a, &eve_given_a)?;
    Ok(ExplicitHolevo {
        holevo: von_neumann_entropy(&eve_given_relay)? - von_neumann_entropy(&eve_given_both)?,
        conditional_purity: symplectic_eigenvalues(&global)?.purity_deviation(),
    })
}

/// `det V + tr V + 1`, which equals `det(V + I)` for a 2×2 block.
pub fn det_tr_plus_one(v: &CovarianceMatrix) -> f64 {
    let b = v.block(0, 0);
    b.determinant() + b.trace() + 1.0
}

/// Mutual information of the heterodyne outcomes on `target` with and
/// without knowledge of `reference`'s heterodyne outcome.
pub(crate) fn heterodyne_mutual_info(v: &CovarianceMatrix, reference: usize, target: usize) -> Result<f64> {
    let pair = partial_trace(v, &[reference.min(target), reference.max(target)])?;
    let (r, t) = if reference < target { (0, 1) } else { (1, 0) };
    let marginal = partial_trace(&pair, &[t])?;
    let conditional = heterodyne_condition(&pair, r)?;
    Ok(0.5 * (det_tr_plus_one(&marginal) / det_tr_plus_one(&conditional)).log2())
}

/// Mutual information between Alice's and Bob's heterodyne outcomes given
/// the relay outcome.
pub fn mdi_mutual_info(mu: f64, eta_a: f64, eta_b: f64, attack: &AttackModel) -> Result<f64> {
    heterodyne_mutual_info(&post_relay(mu, eta_a, eta_b, attack)?, 0, 1)
}

fn box_half_width(omega: f64) -> f64 {
    (omega * omega - 1.0).max(0.0).sqrt()
}

/// Correlations `(g, g')` of the physical two-mode attack that maximize
/// Eve's Holevo information, with the maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstAttack {
    pub g: f64,
    pub g_prime: f64,
    pub holevo: f64,
}

/// Grid search over the physical correlations followed by a compass search.
///
/// The feasible set lies in `|g|, |g'| ≤ √(ω² - 1)`: along `g' = -g` the
/// uncertainty principle allows exactly that far. Unphysical points score `-∞`.
pub fn mdi_worst_attack(mu: f64, eta_a: f64, eta_b: f64, omega: f64) -> Result<WorstAttack> {
    let uncorrelated = AttackModel::two_link(omega, 0.0, 0.0)?;
    let base = mdi_holevo(mu, eta_a, eta_b, &uncorrelated)?;
    let mut best = WorstAttack {
        g: 0.0,
        g_prime: 0.0,
        holevo: base,
    };
    let half = box_half_width(omega);
    if half == 0.0 {
        return Ok(best);
    }
    let score = |g: f64, gp: f64| -> Result<f64> {
        match AttackModel::two_link(omega, g, gp) {
            Ok(attack) => mdi_holevo(mu, eta_a, eta_b, &attack),
            Err(Error::AttackRejected(_)) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    };
    let step = 2.0 * half / (ATTACK_GRID - 1) as f64;
    for i in 0..ATTACK_GRID {
        for j in 0..ATTACK_GRID {
            let (g, gp) = (-half + step * i as f64, -half + step * j as f64);
            let value = score(g, gp)?;
            if value > best.holevo {
                best = WorstAttack { g, g_prime: gp, holevo: value };
            }
        }
    }
    let mut h = step;
    while h > 1e-7 * half {
        let mut moved = false;
        for (dg, dgp) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let (g, gp) = (best.g + dg, best.g_prime + dgp);
            let value = score(g, gp)?;
            if value > best.holevo {
                best = WorstAttack { g, g_prime: gp, holevo: value };
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Ok(best)
}

/// `(I, χ)` at one transmissivity pair under the configured attack.
fn terms(p: &MdiParams, eta_a: f64, eta_b: f64) -> Result<(f64, f64)> {
    let attack = match p.attack {
        MdiAttack::Uncorrelated => AttackModel::two_link(p.omega, 0.0, 0.0)?,
        MdiAttack::Correlated { g, g_prime } => AttackModel::two_link(p.omega, g, g_prime)?,
        MdiAttack::WorstCase => {
            let w = mdi_worst_attack(p.mu, eta_a, eta_b, p.omega)?;
            let attack = AttackModel::two_link(p.omega, w.g, w.g_prime)?;
            return Ok((mdi_mutual_info(p.mu, eta_a, eta_b, &attack)?, w.holevo));
        }
    };
    let v = post_relay(p.mu, eta_a, eta_b, &attack)?;
    let v_b = heterodyne_condition(&v, 0)?;
    let chi = von_neumann_entropy(&v)? - von_neumann_entropy(&v_b)?;
    Ok((heterodyne_mutual_info(&v, 0, 1)?, chi))
}

/// `β I - χ` with both links at the given transmissivities.
pub fn mdi_rate_at(params: &MdiParams, eta_a: f64, eta_b: f64) -> Result<f64> {
    let (i, chi) = terms(params, eta_a, eta_b)?;
    finite_rate(params.beta * i - chi)
}

/// Non-fading channel at the mean transmissivity.
pub fn mdi_rate_fixed(params: &MdiParams) -> Result<f64> {
    let eta = params.fading.eta_mean();
    mdi_rate_at(params, eta, eta)
}

/// Fast fading: mutual information at `η_min` on both links, Holevo
/// information averaged over both transmissivities.
pub fn mdi_rate_fast(params: &MdiParams) -> Result<f64> {
    let f = params.fading;
    if f.is_point_mass() {
        return mdi_rate_fixed(params);
    }
    let (lo, hi) = (f.eta_min(), f.eta_max());
    let chi = try_integrate_nd(|x| Ok(terms(params, x[0], x[1])?.1), &[(lo, hi); 2], params.nodes)?
        / (f.width() * f.width());
    let (i, _) = terms(params, lo, lo)?;
    finite_rate(params.beta * i - chi)
}

/// Slow fading: the fixed-channel rate averaged over both transmissivities.
pub fn mdi_rate_slow(params: &MdiParams) -> Result<f64> {
    let f = params.fading;
    if f.is_point_mass() {
        return mdi_rate_fixed(params);
    }
    let (lo, hi) = (f.eta_min(), f.eta_max());
    let total = try_integrate_nd(
        |x| {
            let (i, chi) = terms(params, x[0], x[1])?;
            Ok(params.beta * i - chi)
        },
        &[(lo, hi); 2],
        params.nodes,
    )?;
    finite_rate(total / (f.width() * f.width()))
}

pub fn mdi_rate(params: &MdiParams, mode: FadingMode) -> Result<f64> {
    match mode {
        FadingMode::Fast => mdi_rate_fast(params),
        FadingMode::Slow => mdi_rate_slow(params),
        FadingMode::Fixed => mdi_rate_fixed(params),
    }
}

/// Maximizes the rate over `μ` by golden-section search on `ln μ`.
pub fn mdi_optimize_mu(params: &MdiParams, mode: FadingMode, log_mu: SearchInterval) -> Result<MuOptimum> {
    optimize_mu(|mu| mdi_rate(&params.with_mu(mu)?, mode), log_mu, true)
}
