use rayon::prelude::*;

use cvqkd_fading::channel::{db_to_eta, plob_bound_averaged};
use cvqkd_fading::mdi::{self, MdiAttack, MdiParams};
use cvqkd_fading::net3::{self, Net3Params};
use cvqkd_fading::numerics::SearchInterval;
use cvqkd_fading::oneway::{self, OneWayParams};
use cvqkd_fading::{FadingModel, RatePoint};

use crate::config::{MuSetting, Protocol, SweepConfig};
use crate::CliError;

/// Golden-section tolerance on `ln μ` (one-way, MDI) or `μ` (net3).
const MU_TOLERANCE: f64 = 1e-4;

/// Slack allowed on `η_max ≤ 1` for supports built from decimal inputs.
const SUPPORT_SLACK: f64 = 1e-12;

/// Evaluates every loss value of the sweep. Points are computed in parallel;
/// rows come back in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<RatePoint>, CliError> {
    config
        .db_grid()
        .into_par_iter()
        .map(|x_db| evaluate(config, x_db))
        .collect()
}

fn numeric(x_db: f64) -> impl Fn(cvqkd_fading::Error) -> CliError {
    move |source| CliError::Numeric { x_db, source }
}

fn evaluate(config: &SweepConfig, x_db: f64) -> Result<RatePoint, CliError> {
    let err = numeric(x_db);
    let eta = db_to_eta(x_db).map_err(&err)?;
    let (lo, hi) = config.anchor.support(eta, config.delta_eta);
    if lo <= 0.0 || hi > 1.0 + SUPPORT_SLACK {
        return Ok(RatePoint::out_of_domain(x_db, lo, hi));
    }
    let fading = FadingModel::new(lo, config.delta_eta).map_err(&err)?;
    let mut point = RatePoint::for_fading(x_db, &fading);
    match config.protocol {
        Protocol::Plob => point.plob = Some(plob_bound_averaged(&fading).map_err(&err)?),
        Protocol::Oneway => {
            point.plob = plob_bound_averaged(&fading).ok();
            fill_oneway(config, fading, &mut point).map_err(&err)?;
        }
        Protocol::Mdi => fill_mdi(config, fading, &mut point).map_err(&err)?,
        Protocol::Net3 => fill_net3(config, fading, &mut point).map_err(&err)?,
    }
    Ok(point)
}

/// `ln μ` search interval for the protocols optimized on a log scale.
fn log_interval(lo: f64, hi: f64) -> cvqkd_fading::Result<SearchInterval> {
    SearchInterval::new(lo.ln(), hi.ln(), MU_TOLERANCE)
}

/// Records `μ` for the first filled column only; later columns keep it.
fn record_mu(point: &mut RatePoint, mu: f64) {
    if point.mu_used.is_none() {
        point.mu_used = Some(mu);
    }
}

fn fill_oneway(config: &SweepConfig, fading: FadingModel, point: &mut RatePoint) -> cvqkd_fading::Result<()> {
    let start_mu = match config.mu {
        MuSetting::Fixed(mu) => mu,
        MuSetting::Search(r) => r.lo,
    };
    let params = OneWayParams::new(start_mu, config.omega, config.beta, fading)?
        .with_kernel(config.kernel)
        .with_nodes(config.nodes);
    for &mode in config.fading_mode.modes() {
        let (rate, mu) = match config.mu {
            MuSetting::Fixed(mu) => (oneway::oneway_rate(&params, mode)?, mu),
            MuSetting::Search(r) => {
                let best = oneway::oneway_optimize_mu(&params, mode, log_interval(r.lo, r.hi)?)?;
                (best.rate, best.mu)
            }
        };
        point.set_rate(mode, rate);
        record_mu(point, mu);
    }
    Ok(())
}

fn fill_mdi(config: &SweepConfig, fading: FadingModel, point: &mut RatePoint) -> cvqkd_fading::Result<()> {
    let start_mu = match config.mu {
        MuSetting::Fixed(mu) => mu,
        MuSetting::Search(r) => r.lo,
    };
    let attack = if config.attack.worst_case {
        MdiAttack::WorstCase
    } else if config.attack.g != 0.0 || config.attack.g_prime != 0.0 {
        MdiAttack::Correlated {
            g: config.attack.g,
            g_prime: config.attack.g_prime,
        }
    } else {
        MdiAttack::Uncorrelated
    };
    let params = MdiParams::new(start_mu, config.omega, config.beta, fading)?
        .with_attack(attack)?
        .with_nodes(config.nodes);
    for &mode in config.fading_mode.modes() {
        let (rate, mu) = match config.mu {
            MuSetting::Fixed(mu) => (mdi::mdi_rate(&params, mode)?, mu),
            MuSetting::Search(r) => {
                let best = mdi::mdi_optimize_mu(&params, mode, log_interval(r.lo, r.hi)?)?;
                (best.rate, best.mu)
            }
        };
        point.set_rate(mode, rate);
        record_mu(point, mu);
    }
    Ok(())
}

fn fill_net3(config: &SweepConfig, fading: FadingModel, point: &mut RatePoint) -> cvqkd_fading::Result<()> {
    let params = Net3Params::new(config.omega, config.beta, fading)?.with_nodes(config.nodes);
    for &mode in config.fading_mode.modes() {
        let (rate, mu) = match config.mu {
            MuSetting::Fixed(mu) => (net3::net3_rate_star_at(&params, mode, mu)?, mu),
            MuSetting::Search(r) => {
                let params = params
                    .clone()
                    .with_mu_search(SearchInterval::new(r.lo, r.hi, MU_TOLERANCE)?)?;
                let best = net3::net3_optimize(&params, mode)?;
                (best.rate, best.mu)
            }
        };
        point.set_rate(mode, rate);
        record_mu(point, mu);
    }
    Ok(())
}
