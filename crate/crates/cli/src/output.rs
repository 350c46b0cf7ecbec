use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use cvqkd_fading::RatePoint;

use crate::config::OutputFormat;
use crate::CliError;

pub const CSV_HEADER: &str = "x_db,eta_min,eta_mean,eta_max,rate_fast,rate_slow,rate_fixed,plob,mu_used,status";

const SIGNIFICANT_DIGITS: usize = 9;

/// `%.9g`-style formatting: 9 significant digits, trailing zeros removed,
/// scientific notation outside `[1e-5, 1e9)`.
pub fn format_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent is always present");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The value a reader of the 9-digit text recovers.
fn rounded(x: f64) -> f64 {
    format_g9(x).parse().expect("formatted number parses")
}

#[derive(Serialize)]
struct JsonRow {
    x_db: f64,
    eta_min: f64,
    eta_mean: f64,
    eta_max: f64,
    rate_fast: Option<f64>,
    rate_slow: Option<f64>,
    rate_fixed: Option<f64>,
    plob: Option<f64>,
    mu_used: Option<f64>,
    status: String,
}

impl From<&RatePoint> for JsonRow {
    fn from(p: &RatePoint) -> Self {
        JsonRow {
            x_db: rounded(p.x_db),
            eta_min: rounded(p.eta_min),
            eta_mean: rounded(p.eta_mean),
            eta_max: rounded(p.eta_max),
            rate_fast: p.rate_fast.map(rounded),
            rate_slow: p.rate_slow.map(rounded),
            rate_fixed: p.rate_fixed.map(rounded),
            plob: p.plob.map(rounded),
            mu_used: p.mu_used.map(rounded),
            status: p.status.to_string(),
        }
    }
}

pub fn to_csv(table: &[RatePoint]) -> String {
    let opt = |v: Option<f64>| v.map(format_g9).unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in table {
        let fields = [
            format_g9(p.x_db),
            format_g9(p.eta_min),
            format_g9(p.eta_mean),
            format_g9(p.eta_max),
            opt(p.rate_fast),
            opt(p.rate_slow),
            opt(p.rate_fixed),
            opt(p.plob),
            opt(p.mu_used),
            p.status.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(table: &[RatePoint]) -> String {
    let rows: Vec<JsonRow> = table.iter().map(JsonRow::from).collect();
    let mut out = serde_json::to_string_pretty(&rows).expect("rows are serializable");
    out.push('\n');
    out
}

pub fn render(table: &[RatePoint], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(table),
        OutputFormat::Json => to_json(table),
    }
}

/// Writes the table to `path`, or to standard output when `path` is `None`.
pub fn emit(table: &[RatePoint], format: OutputFormat, path: Option<&Path>) -> Result<(), CliError> {
    let text = render(table, format);
    match path {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
