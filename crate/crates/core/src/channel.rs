//! Lossy bosonic channels, Gaussian attacks on one or more links, the uniform
//! fading model, and the PLOB benchmark.

use std::f64::consts::LOG2_E;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};

use crate::error::{check_domain, Error, Result};
use crate::gaussian::{
    apply_symplectic, beamsplitter, is_physical, symplectic_eigenvalues, williamson,
    CovarianceMatrix,
};

/// Uniform distribution of the transmissivity on `[η_min, η_min + Δη]`.
/// `Δη = 0` is a point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingModel {
    eta_min: f64,
    delta_eta: f64,
}

/// Slack for `η_min + Δη ≤ 1` when both come from decimal inputs.
const SUPPORT_SLACK: f64 = 1e-12;

impl FadingModel {
    pub fn new(eta_min: f64, delta_eta: f64) -> Result<Self> {
        check_domain("eta_min", eta_min, eta_min > 0.0 && eta_min <= 1.0, "0 < eta_min <= 1")?;
        check_domain("delta_eta", delta_eta, delta_eta >= 0.0, "delta_eta >= 0")?;
        check_domain(
            "eta_min + delta_eta",
            eta_min + delta_eta,
            eta_min + delta_eta <= 1.0 + SUPPORT_SLACK,
            "eta_max <= 1",
        )?;
        Ok(Self { eta_min, delta_eta })
    }

    /// Fixed (non-fading) channel.
    pub fn point(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }

    /// Builds the model whose `anchor` transmissivity equals `eta`.
    pub fn anchored(eta: f64, delta_eta: f64, anchor: Anchor) -> Result<Self> {
        let (lo, _) = anchor.support(eta, delta_eta);
        Self::new(lo, delta_eta)
    }

    pub fn eta_min(&self) -> f64 {
        self.eta_min
    }

    pub fn delta_eta(&self) -> f64 {
        self.delta_eta
    }

    pub fn eta_max(&self) -> f64 {
        (self.eta_min + self.delta_eta).min(1.0)
    }

    pub fn eta_mean(&self) -> f64 {
        0.5 * (self.eta_min + self.eta_max())
    }

    /// True when the support has no width in floating point.
    pub fn is_point_mass(&self) -> bool {
        self.eta_max() <= self.eta_min
    }

    /// `η_max - η_min` as represented, which can differ from `Δη` by rounding.
    pub fn width(&self) -> f64 {
        self.eta_max() - self.eta_min
    }

    /// Probability density; only meaningful for `Δη > 0`.
    pub fn density(&self, eta: f64) -> f64 {
        if self.is_point_mass() || eta < self.eta_min || eta > self.eta_max() {
            0.0
        } else {
            1.0 / self.width()
        }
    }
}

/// Which transmissivity of the fading support a sweep coordinate controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    Min,
    #[default]
    Mean,
    Max,
}

impl Anchor {
    /// `(η_min, η_max)` of the support whose anchor sits at `eta`.
    pub fn support(self, eta: f64, delta_eta: f64) -> (f64, f64) {
        let lo = match self {
            Anchor::Min => eta,
            Anchor::Mean => eta - 0.5 * delta_eta,
            Anchor::Max => eta - delta_eta,
        };
        (lo, lo + delta_eta)
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Anchor::Min => "min",
            Anchor::Mean => "mean",
            Anchor::Max => "max",
        })
    }
}

impl FromStr for Anchor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "min" => Ok(Anchor::Min),
            "mean" => Ok(Anchor::Mean),
            "max" => Ok(Anchor::Max),
            other => Err(format!("unknown anchor '{other}' (expected min|mean|max)")),
        }
    }
}

/// A transmissivity together with its loss in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    pub eta: f64,
    pub db: f64,
    pub anchor: Anchor,
}

impl ChannelPoint {
    pub fn from_db(db: f64, anchor: Anchor) -> Result<Self> {
        Ok(Self {
            eta: db_to_eta(db)?,
            db,
            anchor,
        })
    }

    pub fn from_eta(eta: f64, anchor: Anchor) -> Result<Self> {
        Ok(Self {
            eta,
            db: eta_to_db(eta)?,
            anchor,
        })
    }
}

pub fn db_to_eta(db: f64) -> Result<f64> {
    check_domain("loss (dB)", db, db >= 0.0, "db >= 0")?;
    Ok(10f64.powf(-db / 10.0))
}

pub fn eta_to_db(eta: f64) -> Result<f64> {
    check_domain("eta", eta, eta > 0.0 && eta <= 1.0, "0 < eta <= 1")?;
    Ok(-10.0 * eta.log10())
}

fn check_eta(eta: f64) -> Result<()> {
    check_domain("eta", eta, (0.0..=1.0).contains(&eta), "0 <= eta <= 1")
}

fn check_omega(omega: f64) -> Result<()> {
    check_domain("omega", omega, omega >= 1.0, "omega >= 1")
}

fn check_mode(v: &CovarianceMatrix, mode: usize) -> Result<()> {
    if mode >= v.modes() {
        return Err(Error::ModeOutOfRange {
            index: mode,
            modes: v.modes(),
        });
    }
    Ok(())
}

/// Thermal-loss channel `E_{η,ω}` on `mode`: the diagonal block becomes
/// `ηB + (1-η)ωI` and every cross block to that mode is scaled by `√η`.
pub fn thermal_loss_apply(
    v: &CovarianceMatrix,
    mode: usize,
    eta: f64,
    omega: f64,
) -> Result<CovarianceMatrix> {
    check_eta(eta)?;
    check_omega(omega)?;
    check_mode(v, mode)?;
    let mut m = v.matrix().clone();
    let s = eta.sqrt();
    let dim = m.nrows();
    for q in [2 * mode, 2 * mode + 1] {
        for k in 0..dim {
            if k / 2 != mode {
                m[(q, k)] *= s;
                m[(k, q)] *= s;
            }
        }
    }
    for r in 0..2 {
        for c in 0..2 {
            let idx = (2 * mode + r, 2 * mode + c);
            m[idx] = eta * m[idx] + if r == c { (1.0 - eta) * omega } else { 0.0 };
        }
    }
    Ok(CovarianceMatrix::from_symmetric(m))
}

/// Stinespring dilation of a lossy channel. `env` holds the environment
/// modes `(e, E)`; `E` is mixed with `mode` on a beam splitter of
/// transmissivity `eta`. The output keeps every mode: the input modes
/// (with `mode` replaced by the channel output) followed by `e` and `E'`.
pub fn dilated_thermal_loss(
    v: &CovarianceMatrix,
    mode: usize,
    eta: f64,
    env: &CovarianceMatrix,
) -> Result<CovarianceMatrix> {
    check_eta(eta)?;
    check_mode(v, mode)?;
    if env.modes() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "environment must have 2 modes, got {}",
            env.modes()
        )));
    }
    if !is_physical(env) {
        return Err(Error::InvalidState("environment state is unphysical".into()));
    }
    let n = v.modes();
    let joint = v.direct_sum(env);
    apply_symplectic(&beamsplitter(eta, mode, n + 1, n + 2)?, &joint)
}

/// Off-diagonal correlation block `G = diag(g, g')` between two attacked links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorrelation {
    pub links: (usize, usize),
    pub g: f64,
    pub g_prime: f64,
}

/// Gaussian attack on several links: Eve injects modes whose joint covariance
/// matrix has diagonal blocks `ω_i I` and off-diagonal blocks `G_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackModel {
    omegas: Vec<f64>,
    correlations: Vec<PairCorrelation>,
}

impl AttackModel {
    /// Validates the parameters and the physicality of the assembled matrix.
    pub fn new(omegas: Vec<f64>, correlations: Vec<PairCorrelation>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::AttackRejected("attack needs at least one link".into()));
        }
        for &w in &omegas {
            if !(w >= 1.0 && w.is_finite()) {
                return Err(Error::AttackRejected(format!("thermal noise {w} < 1")));
            }
        }
        let k = omegas.len();
        let mut seen = Vec::new();
        for c in &correlations {
            let (i, j) = c.links;
            if i >= k || j >= k || i == j {
                return Err(Error::AttackRejected(format!(
                    "correlation between links {i} and {j} of a {k}-link attack"
                )));
            }
            let key = (i.min(j), i.max(j));
            if seen.contains(&key) {
                return Err(Error::AttackRejected(format!(
                    "links {i} and {j} correlated twice"
                )));
            }
            seen.push(key);
            if !(c.g.is_finite() && c.g_prime.is_finite()) {
                return Err(Error::AttackRejected("non-finite correlation".into()));
            }
        }
        let attack = Self {
            omegas,
            correlations,
        };
        if !is_physical(&attack.eve_cm()) {
            return Err(Error::AttackRejected(
                "eavesdropper covariance matrix violates the uncertainty principle".into(),
            ));
        }
        Ok(attack)
    }

    pub fn uncorrelated(omegas: Vec<f64>) -> Result<Self> {
        Self::new(omegas, Vec::new())
    }

    /// Two links with equal noise and one correlation block.
    pub fn two_link(omega: f64, g: f64, g_prime: f64) -> Result<Self> {
        Self::new(
            vec![omega, omega],
            vec![PairCorrelation {
                links: (0, 1),
                g,
                g_prime,
            }],
        )
    }

    /// Three links with `G₁` on (A,B), `G₂` on (B,C) and `G₃` on (A,C).
    pub fn three_link(omegas: [f64; 3], blocks: [(f64, f64); 3]) -> Result<Self> {
        let pairs = [(0, 1), (1, 2), (0, 2)];
        let correlations = pairs
            .iter()
            .zip(blocks)
            .map(|(&links, (g, g_prime))| PairCorrelation { links, g, g_prime })
            .collect();
        Self::new(omegas.to_vec(), correlations)
    }

    pub fn links(&self) -> usize {
        self.omegas.len()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn correlations(&self) -> &[PairCorrelation] {
        &self.correlations
    }

    pub fn is_correlated(&self) -> bool {
        self.correlations
            .iter()
            .any(|c| c.g != 0.0 || c.g_prime != 0.0)
    }

    /// Joint covariance matrix of the injected modes `E_1 … E_k`.
    pub fn eve_cm(&self) -> CovarianceMatrix {
        let k = self.links();
        let mut m = DMatrix::zeros(2 * k, 2 * k);
        for (i, &w) in self.omegas.iter().enumerate() {
            m[(2 * i, 2 * i)] = w;
            m[(2 * i + 1, 2 * i + 1)] = w;
        }
        for c in &self.correlations {
            let (i, j) = c.links;
            for (r, s) in [(i, j), (j, i)] {
                m[(2 * r, 2 * s)] = c.g;
                m[(2 * r + 1, 2 * s + 1)] = c.g_prime;
            }
        }
        CovarianceMatrix::from_symmetric(m)
    }
}

/// Pure state on twice the modes whose first half has covariance `v`.
///
/// Uses the Williamson form `v = S D Sᵀ`: each thermal eigenmode is paired
/// with a partner in a two-mode squeezed state, then `S` acts on the first
/// half. Mode order: the `k` modes of `v`, then the `k` partners.
pub fn purify(v: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    let k = v.modes();
    let w = williamson(v)?;
    let s = w.symplectic.matrix();
    let mut c = DMatrix::zeros(2 * k, 2 * k);
    let mut d = DMatrix::zeros(2 * k, 2 * k);
    for (j, &nu) in w.spectrum.values().iter().enumerate() {
        let x = (nu * nu - 1.0).max(0.0).sqrt();
        c[(2 * j, 2 * j)] = x;
        c[(2 * j + 1, 2 * j + 1)] = -x;
        d[(2 * j, 2 * j)] = nu;
        d[(2 * j + 1, 2 * j + 1)] = nu;
    }
    let sc = s * &c;
    let mut m = DMatrix::zeros(4 * k, 4 * k);
    m.view_mut((0, 0), (2 * k, 2 * k)).copy_from(v.matrix());
    m.view_mut((0, 2 * k), (2 * k, 2 * k)).copy_from(&sc);
    m.view_mut((2 * k, 0), (2 * k, 2 * k)).copy_from(&sc.transpose());
    m.view_mut((2 * k, 2 * k), (2 * k, 2 * k)).copy_from(&d);
    Ok(CovarianceMatrix::from_symmetric(m))
}

fn check_links(
    v: &CovarianceMatrix,
    travel_modes: &[usize],
    etas: &[f64],
    attack: &AttackModel,
) -> Result<()> {
    if travel_modes.len() != etas.len() || etas.len() != attack.links() {
        return Err(Error::DimensionMismatch(format!(
            "{} travelling modes, {} transmissivities, {}-link attack",
            travel_modes.len(),
            etas.len(),
            attack.links()
        )));
    }
    for (i, &m) in travel_modes.iter().enumerate() {
        check_mode(v, m)?;
        if travel_modes[..i].contains(&m) {
            return Err(Error::DimensionMismatch(format!("mode {m} attacked twice")));
        }
    }
    etas.iter().try_for_each(|&e| check_eta(e))
}

/// Correlated attack with Eve's modes kept explicitly.
///
/// Eve's joint state is purified, then injected mode `i` is mixed with
/// `travel_modes[i]` at transmissivity `etas[i]`. Output mode order: the
/// modes of `v`, then Eve's outputs `E'_1 … E'_k`, then the `k` purifying
/// partners.
pub fn correlated_attack_apply(
    v: &CovarianceMatrix,
    travel_modes: &[usize],
    etas: &[f64],
    attack: &AttackModel,
) -> Result<CovarianceMatrix> {
    check_links(v, travel_modes, etas, attack)?;
    let n = v.modes();
    let k = attack.links();
    let mut state = v.direct_sum(&purify(&attack.eve_cm())?);
    for (i, (&mode, &eta)) in travel_modes.iter().zip(etas).enumerate() {
        state = apply_symplectic(&beamsplitter(eta, mode, n + i, n + 2 * k)?, &state)?;
    }
    Ok(state)
}

/// Marginal of [`correlated_attack_apply`] on the modes of `v`, computed
/// directly: each link acts as a thermal-loss channel and the correlation
/// blocks add `√((1-η_i)(1-η_j)) G_ij` between the outputs.
pub fn correlated_attack_marginal(
    v: &CovarianceMatrix,
    travel_modes: &[usize],
    etas: &[f64],
    attack: &AttackModel,
) -> Result<CovarianceMatrix> {
    check_links(v, travel_modes, etas, attack)?;
    let mut state = v.clone();
    for ((&mode, &eta), &omega) in travel_modes.iter().zip(etas).zip(attack.omegas()) {
        state = thermal_loss_apply(&state, mode, eta, omega)?;
    }
    if !attack.is_correlated() {
        return Ok(state);
    }
    let mut m = state.into_matrix();
    for c in attack.correlations() {
        let (i, j) = c.links;
        let w = ((1.0 - etas[i]) * (1.0 - etas[j])).sqrt();
        let g = Matrix2::new(c.g, 0.0, 0.0, c.g_prime) * w;
        let (mi, mj) = (travel_modes[i], travel_modes[j]);
        for r in 0..2 {
            for s in 0..2 {
                m[(2 * mi + r, 2 * mj + s)] += g[(r, s)];
                m[(2 * mj + s, 2 * mi + r)] += g[(r, s)];
            }
        }
    }
    Ok(CovarianceMatrix::from_symmetric(m))
}

/// PLOB bound `-log₂(1-η)` on repeaterless key generation over a lossy channel.
pub fn plob_bound(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    if eta == 1.0 {
        return Err(Error::InfiniteCapacity);
    }
    Ok(-(-eta).ln_1p() * LOG2_E)
}

/// Antiderivative of `log₂ u`, continuous at `u = 0`.
fn log2_antiderivative(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.log2() - u * LOG2_E
    }
}

/// PLOB bound averaged over the fading distribution.
///
/// The logarithmic singularity at `η = 1` is integrable, so a support that
/// reaches one still has a finite average; only a point mass at one diverges.
pub fn plob_bound_averaged(fading: &FadingModel) -> Result<f64> {
    if fading.is_point_mass() {
        return plob_bound(fading.eta_min());
    }
    let u_hi = 1.0 - fading.eta_min();
    let u_lo = (1.0 - fading.eta_max()).max(0.0);
    Ok((log2_antiderivative(u_lo) - log2_antiderivative(u_hi)) / fading.width())
}

/// Largest symplectic eigenvalue deviation from one of the full state; used
/// by purity checks on dilated channels.
pub fn purity_deviation(v: &CovarianceMatrix) -> Result<f64> {
    Ok(symplectic_eigenvalues(v)?.purity_deviation())
}
