use serde::{Deserialize, Serialize};

use super::mcmc::Trace;
use crate::error::{invalid, Result};

/// Geweke-style drift statistic comparing the first 10% of a series with
/// the last 50%. Each segment's mean variance is estimated by batch means.
pub fn geweke_z(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 40 {
        return Err(invalid("need at least 40 values for a drift statistic"));
    }
    let head = &series[..n / 10];
    let tail = &series[n - n / 2..];
    let (ma, va) = mean_and_var_of_mean(head);
    let (mb, vb) = mean_and_var_of_mean(tail);
    let denom = (va + vb).sqrt();
    if denom == 0.0 {
        return Ok(if ma == mb { 0.0 } else { f64::INFINITY });
    }
    Ok((ma - mb) / denom)
}

fn mean_and_var_of_mean(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let batches = (n as f64).sqrt().floor().max(2.0) as usize;
    let size = n / batches;
    let means: Vec<f64> = (0..batches).map(|b| x[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, var / batches as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub alpha_mean: f64,
    pub alpha_sd: f64,
    pub alpha_q05: f64,
    pub alpha_q95: f64,
    pub log_posterior_mean: f64,
    /// Drift statistic of the post-burn-in log-posterior trace.
    pub geweke_z: Option<f64>,
    pub accept_rate_pos: Option<f64>,
    pub accept_rate_alpha: Option<f64>,
    pub draws: usize,
    pub chains: usize,
    pub warnings: Vec<String>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Pools the post-burn-in records of one or more chains. The drift
/// statistic is the one with the largest magnitude across chains.
pub fn summarize(traces: &[Trace]) -> Result<PosteriorSummary> {
    let alphas: Vec<f64> = traces.iter().flat_map(|t| t.post_burn_in().map(|r| r.alpha)).collect();
    if alphas.is_empty() {
        return Err(invalid("no post-burn-in draws to summarise"));
    }
    let lps: Vec<f64> = traces.iter().flat_map(|t| t.post_burn_in().map(|r| r.log_posterior)).collect();
    let n = alphas.len() as f64;
    let mean = alphas.iter().sum::<f64>() / n;
    let sd = if alphas.len() > 1 {
        (alphas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = alphas.clone();
    sorted.sort_by(f64::total_cmp);
    let z = traces
        .iter()
        .filter_map(|t| geweke_z(&t.post_burn_in().map(|r| r.log_posterior).collect::<Vec<_>>()).ok())
        .fold(None, |acc: Option<f64>, z| Some(if acc.is_some_and(|a| a.abs() >= z.abs()) { acc.unwrap() } else { z }));
    let avg = |f: fn(&Trace) -> Option<f64>| {
        let v: Vec<f64> = traces.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    Ok(PosteriorSummary {
        alpha_mean: mean,
        alpha_sd: sd,
        alpha_q05: quantile(&sorted, 0.05),
        alpha_q95: quantile(&sorted, 0.95),
        log_posterior_mean: lps.iter().sum::<f64>() / lps.len() as f64,
        geweke_z: z,
        accept_rate_pos: avg(|t| t.post_burn_in_accept_pos),
        accept_rate_alpha: avg(|t| t.post_burn_in_accept_alpha),
        draws: alphas.len(),
        chains: traces.len(),
        warnings: traces.iter().flat_map(|t| t.warnings.iter().cloned()).collect(),
    })
}
