//! Gauss-Legendre quadrature on boxes and golden-section maximization.

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const MAX_QUADRATURE_ORDER: usize = 512;

/// Gauss-Legendre nodes (ascending, in `(-1, 1)`) and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule of order `n` from Newton iteration on `P_n`.
pub fn gauss_legendre_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_QUADRATURE_ORDER {
        return Err(Error::QuadratureOrder(n));
    }
    if n == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        });
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
            dp = legendre(n, 0.0).1;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(QuadratureRule { nodes, weights })
}

fn check_box(bounds: &[(f64, f64)]) -> Result<()> {
    for &(a, b) in bounds {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval {
                lo: a,
                hi: b,
                tolerance: 0.0,
            });
        }
    }
    if bounds.is_empty() {
        return Err(Error::DimensionMismatch("integration box has no axes".into()));
    }
    Ok(())
}

/// `∫_a^b f` with an `n`-point Gauss-Legendre rule.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    try_integrate_1d(|x| Ok(f(x)), a, b, n)
}

pub fn try_integrate_1d<F>(f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    try_integrate_nd(|x| f(x[0]), &[(a, b)], n)
}

/// Tensor-product Gauss-Legendre integral of `f` over `bounds`, with
/// `n_per_axis` nodes on every axis.
pub fn integrate_nd<F>(f: F, bounds: &[(f64, f64)], n_per_axis: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    try_integrate_nd(|x| Ok(f(x)), bounds, n_per_axis)
}

/// Fallible variant of [`integrate_nd`]; the first integrand error is returned.
///
/// Nodes are evaluated in parallel, and the weighted sum is accumulated in a
/// fixed order so that results do not depend on scheduling.
pub fn try_integrate_nd<F>(f: F, bounds: &[(f64, f64)], n_per_axis: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    check_box(bounds)?;
    let rule = gauss_legendre_rule(n_per_axis)?;
    let axes: Vec<Vec<(f64, f64)>> = bounds
        .iter()
        .map(|&(a, b)| rule.mapped(a, b).collect())
        .collect();
    let dim = axes.len();
    let total = n_per_axis
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::Numerical("too many quadrature nodes".into()))?;

    let terms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut point = [0.0; 8];
            let mut point_vec;
            let x: &mut [f64] = if dim <= 8 {
                &mut point[..dim]
            } else {
                point_vec = vec![0.0; dim];
                &mut point_vec
            };
            let mut weight = 1.0;
            let mut rem = flat;
            for axis in (0..dim).rev() {
                let (node, w) = axes[axis][rem % n_per_axis];
                rem /= n_per_axis;
                x[axis] = node;
                weight *= w;
            }
            f(x).map(|v| weight * v)
        })
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum())
}

/// Closed search interval with an absolute tolerance on the argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchInterval {
    lo: f64,
    hi: f64,
    tolerance: f64,
}

impl SearchInterval {
    pub fn new(lo: f64, hi: f64, tolerance: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && tolerance > 0.0 && tolerance.is_finite())
        {
            return Err(Error::InvalidInterval { lo, hi, tolerance });
        }
        Ok(Self { lo, hi, tolerance })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Upper bound on the number of objective evaluations used by
    /// [`maximize_scalar`].
    pub fn max_probes(&self) -> usize {
        let ratio = (self.hi - self.lo) / self.tolerance;
        if ratio <= 1.0 {
            return 2;
        }
        (ratio.ln() / (1.0 / INV_PHI).ln()).ceil() as usize + 2
    }
}

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub probes: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

pub fn maximize_scalar<F>(f: F, interval: SearchInterval) -> Result<Maximum>
where
    F: FnMut(f64) -> f64,
{
    let mut f = f;
    try_maximize_scalar(|x| Ok(f(x)), interval)
}

/// Golden-section search for the maximum of a unimodal `f`.
///
/// Stops once the bracket is narrower than the tolerance. If the final bracket
/// still touches an end of the interval that endpoint is probed as well. For a
/// non-unimodal objective the best probe seen is returned.
pub fn try_maximize_scalar<F>(mut f: F, interval: SearchInterval) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let SearchInterval { lo, hi, tolerance } = interval;
    let mut probes = 0usize;
    let mut best = Maximum {
        x: f64::NAN,
        value: f64::NEG_INFINITY,
        probes: 0,
    };
    let mut eval = |x: f64, best: &mut Maximum| -> Result<f64> {
        let v = f(x)?;
        probes += 1;
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        if v > best.value || best.x.is_nan() {
            best.x = x;
            best.value = v;
        }
        Ok(v)
    };

    if hi - lo <= tolerance {
        eval(lo, &mut best)?;
        eval(hi, &mut best)?;
        best.probes = probes;
        return Ok(best);
    }

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut best)?;
    let mut fd = eval(d, &mut best)?;
    let (mut touches_lo, mut touches_hi) = (true, true);
    loop {
        if fc >= fd {
            b = d;
            touches_hi = false;
            d = c;
            fd = fc;
            if b - a <= tolerance {
                break;
            }
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut best)?;
        } else {
            a = c;
            touches_lo = false;
            c = d;
            fc = fd;
            if b - a <= tolerance {
                break;
            }
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut best)?;
        }
    }
    if touches_lo {
        eval(lo, &mut best)?;
    }
    if touches_hi {
        eval(hi, &mut best)?;
    }
    best.probes = probes;
    Ok(best)
}
