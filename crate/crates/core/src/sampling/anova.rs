//! One-way ANOVA of each minipatch feature against the minipatch clusters.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::stats::quantile_type7;

/// Features of one minipatch that separate its clusters best.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSupport {
    /// Global feature indices, ascending.
    pub support: Vec<usize>,
    /// P-values aligned with the sampled feature list that was scored.
    pub p_values: Vec<f64>,
}

/// Upper tail of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = d2 / (d2 + d1 * f);
    beta_reg(d2 / 2.0, d1 / 2.0, x).clamp(0.0, 1.0)
}

/// ANOVA p-value for one feature column `values` grouped by `labels`
/// (dense ids `0..k`).
pub fn anova_p_value(values: &[f64], labels: &[usize], k: usize) -> f64 {
    let n = values.len();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return 1.0;
    }
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (&v, &l) in values.iter().zip(labels) {
        sums[l] += v;
        counts[l] += 1;
    }
    let grand = values.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let ssb: f64 = means
        .iter()
        .zip(&counts)
        .map(|(&m, &c)| c as f64 * (m - grand) * (m - grand))
        .sum();
    let ssw: f64 = values
        .iter()
        .zip(labels)
        .map(|(&v, &l)| (v - means[l]) * (v - means[l]))
        .sum();
    // Relative guard so values that only differ by rounding count as zero.
    let scale = values.iter().map(|v| (v - grand) * (v - grand)).sum::<f64>();
    if ssw <= scale * 1e-24 {
        return if ssb > 0.0 { 0.0 } else { 1.0 };
    }
    let d1 = (k - 1) as f64;
    let d2 = (n - k) as f64;
    f_survival((ssb / d1) / (ssw / d2), d1, d2)
}

/// Scores each column of the `n x m` row-major `minipatch` against
/// `labels` and keeps the features below the `eta` quantile of the p-values.
///
/// `features` maps minipatch columns to global feature indices. Returns
/// `Ok(None)` when the minipatch has a single cluster or no within-cluster
/// degrees of freedom; scoring is then skipped for that minipatch.
pub fn score_features(
    minipatch: &[f64],
    features: &[usize],
    labels: &[usize],
    eta: f64,
) -> Result<Option<FeatureSupport>> {
    let n = labels.len();
    let m = features.len();
    if minipatch.len() != n * m {
        return Err(Error::InvalidInput(format!(
            "minipatch has {} values, expected {n} x {m}",
            minipatch.len()
        )));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {eta}")));
    }
    let k = labels.iter().max().map_or(0, |&l| l + 1);
    if k < 2 || n <= k {
        return Ok(None);
    }
    let mut column = vec![0.0; n];
    let p_values: Vec<f64> = (0..m)
        .map(|c| {
            for (r, slot) in column.iter_mut().enumerate() {
                *slot = minipatch[r * m + c];
            }
            anova_p_value(&column, labels, k)
        })
        .collect();
    let cutoff = quantile_type7(&p_values, eta).unwrap_or(0.0);
    let mut support: Vec<usize> = p_values
        .iter()
        .enumerate()
        .filter(|&(_, &p)| p < cutoff)
        .map(|(c, _)| features[c])
        .collect();
    if support.is_empty() {
        let best = p_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)));
        if let Some((c, &p)) = best {
            if p < 1.0 {
                support.push(features[c]);
            }
        }
    }
    support.sort_unstable();
    Ok(Some(FeatureSupport { support, p_values }))
}
