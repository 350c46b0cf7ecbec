//! Types shared by the protocol rate functions.

use std::fmt;
use std::str::FromStr;

use crate::channel::FadingModel;
use crate::error::{Error, Result};
use crate::numerics::{try_maximize_scalar, SearchInterval};

/// How the channel transmissivity varies relative to a key block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FadingMode {
    /// Changes every use under Eve's control; the parties assume `η_min`.
    Fast,
    /// Constant over a block; the whole rate is averaged.
    Slow,
    /// No fading; evaluated at the mean transmissivity.
    Fixed,
}

impl FadingMode {
    pub const ALL: [FadingMode; 3] = [FadingMode::Fast, FadingMode::Slow, FadingMode::Fixed];
}

impl fmt::Display for FadingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FadingMode::Fast => "fast",
            FadingMode::Slow => "slow",
            FadingMode::Fixed => "fixed",
        })
    }
}

impl FromStr for FadingMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fast" => Ok(FadingMode::Fast),
            "slow" => Ok(FadingMode::Slow),
            "fixed" => Ok(FadingMode::Fixed),
            other => Err(format!("unknown fading mode '{other}' (expected fast|slow|fixed)")),
        }
    }
}

/// Whether a sweep sample could be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointStatus {
    #[default]
    Ok,
    /// The anchored fading support leaves `(0, 1]`; no rates are reported.
    OutOfDomain,
}

impl fmt::Display for PointStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointStatus::Ok => "ok",
            PointStatus::OutOfDomain => "out_of_domain",
        })
    }
}

/// One sample of a rate-versus-loss curve. Rates are in bits per channel use;
/// `None` marks a column that was not requested or could not be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RatePoint {
    pub x_db: f64,
    pub eta_min: f64,
    pub eta_mean: f64,
    pub eta_max: f64,
    pub rate_fast: Option<f64>,
    pub rate_slow: Option<f64>,
    pub rate_fixed: Option<f64>,
    pub plob: Option<f64>,
    pub mu_used: Option<f64>,
    pub status: PointStatus,
}

impl RatePoint {
    /// A sample whose transmissivities are taken from `fading`.
    pub fn for_fading(x_db: f64, fading: &FadingModel) -> Self {
        Self {
            x_db,
            eta_min: fading.eta_min(),
            eta_mean: fading.eta_mean(),
            eta_max: fading.eta_max(),
            ..Self::default()
        }
    }

    /// A sample whose support `[eta_min, eta_max]` is unphysical.
    pub fn out_of_domain(x_db: f64, eta_min: f64, eta_max: f64) -> Self {
        Self {
            x_db,
            eta_min,
            eta_mean: 0.5 * (eta_min + eta_max),
            eta_max,
            status: PointStatus::OutOfDomain,
            ..Self::default()
        }
    }

    pub fn rate(&self, mode: FadingMode) -> Option<f64> {
        match mode {
            FadingMode::Fast => self.rate_fast,
            FadingMode::Slow => self.rate_slow,
            FadingMode::Fixed => self.rate_fixed,
        }
    }

    pub fn set_rate(&mut self, mode: FadingMode, value: f64) {
        let slot = match mode {
            FadingMode::Fast => &mut self.rate_fast,
            FadingMode::Slow => &mut self.rate_slow,
            FadingMode::Fixed => &mut self.rate_fixed,
        };
        *slot = Some(value);
    }
}

/// Best rate over the source parameter `μ` and where it was found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuOptimum {
    pub rate: f64,
    pub mu: f64,
}

/// Golden-section search of `rate(μ)`. With `log_scale` the search runs over
/// `ln μ` and `interval` is given in that variable.
pub(crate) fn optimize_mu<F>(rate: F, interval: SearchInterval, log_scale: bool) -> Result<MuOptimum>
where
    F: Fn(f64) -> Result<f64>,
{
    let to_mu = |x: f64| if log_scale { x.exp().max(1.0) } else { x };
    let best = try_maximize_scalar(|x| rate(to_mu(x)), interval)?;
    if !best.value.is_finite() {
        return Err(Error::Numerical("no finite rate on the search interval".into()));
    }
    Ok(MuOptimum {
        rate: best.value,
        mu: to_mu(best.x),
    })
}

/// Rejects a non-finite rate, which only the asymptotic kernels can produce.
pub(crate) fn finite_rate(value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Divergent("rate is not finite at this transmissivity"))
    }
}

/// Holevo bound computed from Eve's explicit state, together with the largest
/// `|ν - 1|` of the conditional global state (zero when it is pure, as the
/// purification argument requires).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitHolevo {
    pub holevo: f64,
    pub conditional_purity: f64,
}
