use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use cvqkd_fading::oneway::Kernel;
use cvqkd_fading::{Anchor, FadingMode};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Oneway,
    Mdi,
    Net3,
    Plob,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Oneway => "oneway",
            Protocol::Mdi => "mdi",
            Protocol::Net3 => "net3",
            Protocol::Plob => "plob",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oneway" => Ok(Protocol::Oneway),
            "mdi" => Ok(Protocol::Mdi),
            "net3" => Ok(Protocol::Net3),
            "plob" => Ok(Protocol::Plob),
            other => Err(format!("unknown protocol '{other}' (expected oneway|mdi|net3|plob)")),
        }
    }
}

/// Which rate columns a sweep fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    Fast,
    Slow,
    Fixed,
    All,
}

impl ModeSelection {
    /// Modes in column order.
    pub fn modes(self) -> &'static [FadingMode] {
        match self {
            ModeSelection::Fast => &[FadingMode::Fast],
            ModeSelection::Slow => &[FadingMode::Slow],
            ModeSelection::Fixed => &[FadingMode::Fixed],
            ModeSelection::All => &FadingMode::ALL,
        }
    }
}

impl FromStr for ModeSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fast" => Ok(ModeSelection::Fast),
            "slow" => Ok(ModeSelection::Slow),
            "fixed" => Ok(ModeSelection::Fixed),
            "all" => Ok(ModeSelection::All),
            other => Err(format!("unknown fading mode '{other}' (expected fast|slow|fixed|all)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}' (expected csv|json)")),
        }
    }
}

/// Closed `μ` range given as `lo,hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuRange {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for MuRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(',')
            .ok_or_else(|| format!("expected 'lo,hi', got '{s}'"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("invalid number '{}': {e}", t.trim()))
        };
        Ok(MuRange {
            lo: parse(lo)?,
            hi: parse(hi)?,
        })
    }
}

/// Source setting: a fixed `μ` or a range to optimize over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuSetting {
    Fixed(f64),
    Search(MuRange),
}

/// Sweep options shared by every subcommand. Every field is optional so that
/// values from a config file can be layered underneath the command line.
#[derive(Debug, Clone, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    /// Rate columns to compute: fast|slow|fixed|all
    #[arg(long)]
    pub fading_mode: Option<ModeSelection>,
    /// Transmissivity that the dB axis controls: min|mean|max
    #[arg(long)]
    pub anchor: Option<Anchor>,
    /// First loss value of the sweep (dB)
    #[arg(long)]
    pub db_start: Option<f64>,
    /// Last loss value of the sweep (dB, inclusive)
    #[arg(long)]
    pub db_stop: Option<f64>,
    /// Number of uniformly spaced loss values
    #[arg(long)]
    pub db_points: Option<usize>,
    /// Width of the uniform fading distribution
    #[arg(long)]
    pub delta_eta: Option<f64>,
    /// Thermal noise injected by the eavesdropper (shot-noise units)
    #[arg(long)]
    pub omega: Option<f64>,
    /// Reconciliation efficiency
    #[arg(long)]
    pub beta: Option<f64>,
    /// Fixed source parameter mu = modulation variance + 1
    #[arg(long, conflicts_with = "mu_search")]
    pub mu: Option<f64>,
    /// Optimize mu over the range lo,hi
    #[arg(long, value_name = "LO,HI")]
    pub mu_search: Option<MuRange>,
    /// One-way kernels: exact|asymptotic
    #[arg(long)]
    pub kernel: Option<Kernel>,
    /// MDI attack correlation on the q quadratures
    #[arg(long)]
    pub g: Option<f64>,
    /// MDI attack correlation on the p quadratures
    #[arg(long)]
    pub g_prime: Option<f64>,
    /// MDI: use the correlated attack maximizing Eve's information
    #[arg(long)]
    pub worst_case: bool,
    /// Gauss-Legendre nodes per transmissivity axis
    #[arg(long)]
    pub nodes: Option<usize>,
    /// key=value file with defaults for any of these options
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (standard output when absent)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format: csv|json
    #[arg(long)]
    pub format: Option<OutputFormat>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| CliError::config(key, e.to_string()))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(CliError::config(key, format!("expected true|false, got '{other}'"))),
    }
}

impl SweepArgs {
    /// Sets one option from its flag name without the leading dashes;
    /// underscores are accepted in place of hyphens.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.replace('_', "-");
        let k = key.as_str();
        match k {
            "fading-mode" => self.fading_mode = Some(parse_value(k, value)?),
            "anchor" => self.anchor = Some(parse_value(k, value)?),
            "db-start" => self.db_start = Some(parse_value(k, value)?),
            "db-stop" => self.db_stop = Some(parse_value(k, value)?),
            "db-points" => self.db_points = Some(parse_value(k, value)?),
            "delta-eta" => self.delta_eta = Some(parse_value(k, value)?),
            "omega" => self.omega = Some(parse_value(k, value)?),
            "beta" => self.beta = Some(parse_value(k, value)?),
            "mu" => self.mu = Some(parse_value(k, value)?),
            "mu-search" => self.mu_search = Some(parse_value(k, value)?),
            "kernel" => self.kernel = Some(parse_value(k, value)?),
            "g" => self.g = Some(parse_value(k, value)?),
            "g-prime" => self.g_prime = Some(parse_value(k, value)?),
            "worst-case" => self.worst_case = parse_bool(k, value)?,
            "nodes" => self.nodes = Some(parse_value(k, value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = Some(parse_value(k, value)?),
            "config" => return Err(CliError::config(k, "config files cannot include other files")),
            _ => return Err(CliError::config(k, "unknown option")),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. A `protocol` key, if
    /// present, must match `protocol`.
    pub fn parse_file(text: &str, protocol: Protocol) -> Result<Self, CliError> {
        let mut args = SweepArgs::default();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config("config", format!("line {}: expected key=value", number + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "protocol" {
                let declared: Protocol = parse_value(key, value)?;
                if declared != protocol {
                    return Err(CliError::config(
                        "protocol",
                        format!("config file is for '{declared}' but the subcommand is '{protocol}'"),
                    ));
                }
                continue;
            }
            args.set(key, value)?;
        }
        Ok(args)
    }

    pub fn load_file(path: &Path, protocol: Protocol) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse_file(&text, protocol)
    }

    /// Values of `self` take precedence over `base`. A `mu` or `mu-search`
    /// on `self` replaces both source settings of `base`.
    pub fn layered_over(self, base: SweepArgs) -> SweepArgs {
        let (mu, mu_search) = if self.mu.is_some() || self.mu_search.is_some() {
            (self.mu, self.mu_search)
        } else {
            (base.mu, base.mu_search)
        };
        SweepArgs {
            fading_mode: self.fading_mode.or(base.fading_mode),
            anchor: self.anchor.or(base.anchor),
            db_start: self.db_start.or(base.db_start),
            db_stop: self.db_stop.or(base.db_stop),
            db_points: self.db_points.or(base.db_points),
            delta_eta: self.delta_eta.or(base.delta_eta),
            omega: self.omega.or(base.omega),
            beta: self.beta.or(base.beta),
            mu,
            mu_search,
            kernel: self.kernel.or(base.kernel),
            g: self.g.or(base.g),
            g_prime: self.g_prime.or(base.g_prime),
            worst_case: self.worst_case || base.worst_case,
            nodes: self.nodes.or(base.nodes),
            config: self.config.or(base.config),
            output: self.output.or(base.output),
            format: self.format.or(base.format),
        }
    }
}

/// MDI attack options.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttackOptions {
    pub g: f64,
    pub g_prime: f64,
    pub worst_case: bool,
}

/// Fully resolved sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub protocol: Protocol,
    pub fading_mode: ModeSelection,
    pub anchor: Anchor,
    pub db_start: f64,
    pub db_stop: f64,
    pub db_points: usize,
    pub delta_eta: f64,
    pub omega: f64,
    pub beta: f64,
    pub mu: MuSetting,
    pub kernel: Kernel,
    pub attack: AttackOptions,
    pub nodes: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

pub const DEFAULT_DB_POINTS: usize = 50;

impl SweepConfig {
    /// Defaults for `protocol`: passive eavesdropping, ideal reconciliation,
    /// `Δη = 0.1`, `μ = 10⁶` (net3: optimized over `[2, 20]`), 0 to 10 dB.
    pub fn defaults(protocol: Protocol) -> Self {
        let (mu, nodes) = match protocol {
            Protocol::Oneway | Protocol::Plob => (MuSetting::Fixed(1e6), cvqkd_fading::oneway::DEFAULT_NODES),
            Protocol::Mdi => (MuSetting::Fixed(1e6), cvqkd_fading::mdi::DEFAULT_NODES),
            Protocol::Net3 => (
                MuSetting::Search(MuRange { lo: 2.0, hi: 20.0 }),
                cvqkd_fading::net3::DEFAULT_NODES,
            ),
        };
        Self {
            protocol,
            fading_mode: ModeSelection::All,
            anchor: Anchor::Mean,
            db_start: 0.0,
            db_stop: 10.0,
            db_points: DEFAULT_DB_POINTS,
            delta_eta: 0.1,
            omega: 1.0,
            beta: 1.0,
            mu,
            kernel: Kernel::Exact,
            attack: AttackOptions::default(),
            nodes,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    /// Applies `args` over the protocol defaults and validates the result.
    pub fn resolve(protocol: Protocol, args: SweepArgs) -> Result<Self, CliError> {
        let args = match &args.config {
            Some(path) => {
                let file = SweepArgs::load_file(path, protocol)?;
                args.layered_over(file)
            }
            None => args,
        };
        let mut cfg = Self::defaults(protocol);
        if let Some(v) = args.fading_mode {
            cfg.fading_mode = v;
        }
        if let Some(v) = args.anchor {
            cfg.anchor = v;
        }
        if let Some(v) = args.db_start {
            cfg.db_start = v;
        }
        if let Some(v) = args.db_stop {
            cfg.db_stop = v;
        }
        if let Some(v) = args.db_points {
            cfg.db_points = v;
        }
        if let Some(v) = args.delta_eta {
            cfg.delta_eta = v;
        }
        if let Some(v) = args.omega {
            cfg.omega = v;
        }
        if let Some(v) = args.beta {
            cfg.beta = v;
        }
        match (args.mu, args.mu_search) {
            (Some(_), Some(_)) => {
                return Err(CliError::config("mu", "give either mu or mu-search, not both"))
            }
            (Some(mu), None) => cfg.mu = MuSetting::Fixed(mu),
            (None, Some(range)) => cfg.mu = MuSetting::Search(range),
            (None, None) => {}
        }
        if let Some(v) = args.kernel {
            if protocol != Protocol::Oneway {
                return Err(CliError::config("kernel", "only the oneway protocol has kernels"));
            }
            cfg.kernel = v;
        }
        if args.g.is_some() || args.g_prime.is_some() || args.worst_case {
            if protocol != Protocol::Mdi {
                let key = if args.worst_case { "worst-case" } else { "g" };
                return Err(CliError::config(key, "attack correlations apply to the mdi protocol only"));
            }
            if args.worst_case && (args.g.is_some() || args.g_prime.is_some()) {
                return Err(CliError::config("worst-case", "cannot be combined with g or g-prime"));
            }
            cfg.attack = AttackOptions {
                g: args.g.unwrap_or(0.0),
                g_prime: args.g_prime.unwrap_or(0.0),
                worst_case: args.worst_case,
            };
        }
        if let Some(v) = args.nodes {
            cfg.nodes = v;
        }
        cfg.output = args.output;
        if let Some(v) = args.format {
            cfg.format = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let finite = |key: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(key, format!("{v} is not finite")))
            }
        };
        finite("db-start", self.db_start)?;
        finite("db-stop", self.db_stop)?;
        if self.db_start < 0.0 || self.db_stop < self.db_start {
            return Err(CliError::config(
                "db-stop",
                format!("need 0 <= db-start <= db-stop, got {} and {}", self.db_start, self.db_stop),
            ));
        }
        if self.db_points == 0 {
            return Err(CliError::config("db-points", "must be at least 1"));
        }
        if !(self.delta_eta >= 0.0 && self.delta_eta <= 1.0) {
            return Err(CliError::config("delta-eta", format!("{} is outside [0, 1]", self.delta_eta)));
        }
        if !(self.omega >= 1.0 && self.omega.is_finite()) {
            return Err(CliError::config("omega", format!("{} < 1", self.omega)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(CliError::config("beta", format!("{} is outside [0, 1]", self.beta)));
        }
        match self.mu {
            MuSetting::Fixed(mu) if !(mu >= 1.0 && mu.is_finite()) => {
                return Err(CliError::config("mu", format!("{mu} < 1")));
            }
            MuSetting::Search(r) if !(r.lo >= 1.0 && r.hi > r.lo && r.hi.is_finite()) => {
                return Err(CliError::config(
                    "mu-search",
                    format!("need 1 <= lo < hi, got {},{}", r.lo, r.hi),
                ));
            }
            _ => {}
        }
        if self.nodes == 0 || self.nodes > cvqkd_fading::numerics::MAX_QUADRATURE_ORDER {
            return Err(CliError::config(
                "nodes",
                format!("{} is outside 1..={}", self.nodes, cvqkd_fading::numerics::MAX_QUADRATURE_ORDER),
            ));
        }
        if self.attack.g != 0.0 || self.attack.g_prime != 0.0 {
            cvqkd_fading::AttackModel::two_link(self.omega, self.attack.g, self.attack.g_prime)
                .map_err(|e| CliError::config("g", e.to_string()))?;
        }
        Ok(())
    }

    /// Inclusive, uniformly spaced loss grid.
    pub fn db_grid(&self) -> Vec<f64> {
        if self.db_points == 1 {
            return vec![self.db_start];
        }
        let step = (self.db_stop - self.db_start) / (self.db_points - 1) as f64;
        (0..self.db_points)
            .map(|k| {
                if k + 1 == self.db_points {
                    self.db_stop
                } else {
                    self.db_start + step * k as f64
                }
            })
            .collect()
    }
}
