use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::harness::PathId;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    /// `a·n + b`
    Linear,
    /// `a·n^b`
    PowerLaw,
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionKind::Linear => "linear",
            FunctionKind::PowerLaw => "power_law",
        })
    }
}

/// A fitted model of one path's per-size maximum cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfFunction {
    pub path: PathId,
    pub kind: FunctionKind,
    pub a: f64,
    pub b: f64,
    pub n_min: u64,
    pub n_max: u64,
    /// Mean absolute residual over the fitting samples, original scale.
    pub residual: f64,
    pub sample_count: usize,
}

impl PerfFunction {
    pub fn eval(&self, n: f64) -> f64 {
        match self.kind {
            FunctionKind::Linear => self.a * n + self.b,
            FunctionKind::PowerLaw => self.a * n.powf(self.b),
        }
    }

    /// Growth exponent: 1 for linear fits, `b` for power laws.
    pub fn exponent(&self) -> f64 {
        match self.kind {
            FunctionKind::Linear => 1.0,
            FunctionKind::PowerLaw => self.b,
        }
    }
}

impl fmt::Display for PerfFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FunctionKind::Linear => write!(f, "{:.4}·n + {:.4}", self.a, self.b),
            FunctionKind::PowerLaw => write!(f, "{:.4}·n^{:.4}", self.a, self.b),
        }
    }
}

/// Least squares `y = slope·x + intercept`, centered for stability.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn mean_abs_residual(samples: &[(u64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    samples.iter().map(|(n, c)| (f(*n as f64) - c).abs()).sum::<f64>() / samples.len() as f64
}

/// Fits a linear and (given three or more distinct sizes) a power-law model
/// and keeps whichever has the smaller mean absolute residual; ties go to
/// the linear model.
pub fn fit_perf_function(path: PathId, samples: &[(u64, f64)]) -> Result<PerfFunction> {
    if let Some((n, c)) = samples.iter().find(|(_, c)| !c.is_finite()) {
        return Err(Error::Unmodeled { path: path.to_string(), reason: format!("non-finite cost {c} at size {n}") });
    }
    let sizes: BTreeSet<u64> = samples.iter().map(|(n, _)| *n).collect();
    if sizes.len() < 2 {
        return Err(Error::Unmodeled {
            path: path.to_string(),
            reason: format!("{} distinct size(s), need 2", sizes.len()),
        });
    }
    let n_min = *sizes.first().unwrap();
    let n_max = *sizes.last().unwrap();

    let xs: Vec<f64> = samples.iter().map(|(n, _)| *n as f64).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, c)| *c).collect();
    let (a, b) = least_squares(&xs, &ys);
    let linear = PerfFunction {
        path,
        kind: FunctionKind::Linear,
        a,
        b,
        n_min,
        n_max,
        residual: mean_abs_residual(samples, |n| a * n + b),
        sample_count: samples.len(),
    };

    let logged: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(n, c)| *n >= 1 && *c > 0.0)
        .map(|(n, c)| ((*n as f64).ln(), c.ln()))
        .collect();
    let log_sizes: BTreeSet<u64> = samples.iter().filter(|(n, c)| *n >= 1 && *c > 0.0).map(|(n, _)| *n).collect();
    if sizes.len() < 3 || log_sizes.len() < 3 {
        return Ok(linear);
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = logged.into_iter().unzip();
    let (exp, log_a) = least_squares(&lx, &ly);
    if !(exp >= 0.0) || !exp.is_finite() || !log_a.is_finite() {
        return Ok(linear);
    }
    let pa = log_a.exp();
    let power = PerfFunction {
        kind: FunctionKind::PowerLaw,
        a: pa,
        b: exp,
        residual: mean_abs_residual(samples, |n| pa * n.powf(exp)),
        ..linear.clone()
    };
    let scale = ys.iter().map(|c| c.abs()).sum::<f64>() / ys.len() as f64;
    let tie = 1e-9 * scale.max(1.0);
    Ok(if power.residual + tie < linear.residual { power } else { linear })
}
