//! Partition agreement and feature-selection scores.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::stats::{mean, population_sd};

fn choose2(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index (Hubert and Arabie). Labels are arbitrary ids.
///
/// When the chance-corrected denominator vanishes the two partitions have
/// the same co-membership (both one cluster, or both all singletons) and
/// the index is 1.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "partitions have {} and {} labels",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput("ARI needs at least two observations".into()));
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = sum_a * sum_b / choose2(a.len() as u64);
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// F1 of a selected feature mask against the true signal mask.
pub fn f1_features(selected: &[bool], truth: &[bool]) -> Result<f64> {
    if selected.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "masks have {} and {} entries",
            selected.len(),
            truth.len()
        )));
    }
    let tp = selected.iter().zip(truth).filter(|&(&s, &t)| s && t).count() as f64;
    let n_sel = selected.iter().filter(|&&s| s).count() as f64;
    let n_true = truth.iter().filter(|&&t| t).count() as f64;
    if tp == 0.0 {
        return Ok(0.0);
    }
    let precision = tp / n_sel;
    let recall = tp / n_true;
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Features scoring above `mean + 1 sd` (population sd).
pub fn select_by_score(scores: &[f64]) -> Vec<bool> {
    let cutoff = mean(scores) + population_sd(scores);
    scores.iter().map(|&s| s > cutoff).collect()
}

/// The `k` highest-scoring features (lower index first on ties).
pub fn select_top_k(scores: &[f64], k: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    let mut mask = vec![false; scores.len()];
    for &i in order.iter().take(k) {
        mask[i] = true;
    }
    mask
}
