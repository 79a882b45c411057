use serde::{Deserialize, Serialize};

use super::student_t::t_upper_tail;
use super::MetricsError;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// One-sample, one-tailed test of `mean > baseline` over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub repeats: Vec<f64>,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    pub baseline: f64,
    pub degrees_of_freedom: usize,
    /// None when the samples have zero variance.
    pub t_statistic: Option<f64>,
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
    /// Zero sample variance; the p-value is set by rule, not computed.
    pub degenerate: bool,
}

/// Tests whether the mean of `samples` exceeds `baseline`.
///
/// `t = (mean - baseline) / (sd / sqrt(n))`, `p = P(T_{n-1} > t)`. With zero
/// variance the p-value is 0 if the mean is above the baseline, 1 if below,
/// and 0.5 if equal; such results are flagged degenerate and the equal case
/// is never significant.
pub fn t_test_one_sample_one_tailed(samples: &[f64], baseline: f64) -> Result<SignificanceResult, MetricsError> {
    if samples.len() < 2 {
        return Err(MetricsError::TooFewSamples(samples.len()));
    }
    if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
        return Err(MetricsError::NonFiniteSample { index });
    }
    let n = samples.len();
    // identical samples are degenerate even if summation rounds the mean
    let constant = samples.iter().all(|&x| x == samples[0]);
    let mean = if constant {
        samples[0]
    } else {
        samples.iter().sum::<f64>() / n as f64
    };
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let dof = n - 1;
    let (t, p, degenerate) = if constant || sd == 0.0 {
        let p = if mean > baseline {
            0.0
        } else if mean < baseline {
            1.0
        } else {
            0.5
        };
        (None, p, true)
    } else {
        let t = (mean - baseline) / (sd / (n as f64).sqrt());
        (Some(t), t_upper_tail(t, dof as f64), false)
    };
    Ok(SignificanceResult {
        repeats: samples.to_vec(),
        n,
        mean,
        sd,
        baseline,
        degrees_of_freedom: dof,
        t_statistic: t,
        p_value: p,
        alpha: DEFAULT_ALPHA,
        significant: p < DEFAULT_ALPHA && mean > baseline,
        degenerate,
    })
}
