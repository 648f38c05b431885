//! Seeded index sampling for minipatches.
//!
//! - [`draw_uniform`]: uniform subsets without replacement.
//! - [`draw_weighted`]: weighted subsets without replacement
//!   (exponential keys).
//! - [`SamplerState`]: per-axis weights and counts, updated from confusion
//!   values (observations) or ANOVA feature supports (features).
//! - [`ee`]: the burn-in / exploit-explore scheme shared by both axes.
//! - [`anova`]: per-feature one-way ANOVA on a clustered minipatch.

pub mod anova;
pub mod ee;

use rand::Rng;

use crate::error::{Error, Result};

pub use anova::{score_features, FeatureSupport};
pub use ee::{EEConfig, GammaSchedule, ThresholdRule};

/// Uniform sample of `count` distinct indices from `0..total`, by partial
/// Fisher-Yates. Returned in ascending order.
pub fn draw_uniform(total: usize, count: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    if count > total {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {count} of {total} indices without replacement"
        )));
    }
    let mut pool: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = rng.random_range(i..total);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool.sort_unstable();
    Ok(pool)
}

/// Uniform draw from an explicit candidate list.
pub(crate) fn draw_uniform_from(candidates: &[usize], count: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    Ok(draw_uniform(candidates.len(), count, rng)?
        .into_iter()
        .map(|k| candidates[k])
        .collect())
}

/// Weighted sample of `count` distinct indices without replacement.
///
/// Each index with positive weight gets the key `-ln(U) / w`; the `count`
/// smallest keys win. Returned in ascending index order.
pub fn draw_weighted(weights: &[f64], count: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidParameter(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let positive = weights.iter().filter(|&&w| w > 0.0).count();
    if count > positive {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {count} indices: only {positive} have positive weight"
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            // One uniform per index keeps the stream position independent of
            // which weights are zero.
            let u: f64 = rng.random();
            (i, w, u)
        })
        .filter(|&(_, w, _)| w > 0.0)
        .map(|(i, w, u)| (-(1.0 - u).ln() / w, i))
        .collect();
    keyed.select_nth_unstable_by(count - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut picked: Vec<usize> = keyed[..count].iter().map(|&(_, i)| i).collect();
    picked.sort_unstable();
    Ok(picked)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Observations,
    Features,
}

/// Sampling weights and bookkeeping for one axis (observations or features).
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerState {
    axis: Axis,
    /// Normalised sampling weights.
    weights: Vec<f64>,
    /// Unnormalised moving average that `weights` is derived from. For the
    /// observation axis the update keeps it normalised, so the two agree.
    smoothed: Vec<f64>,
    sample_counts: Vec<u32>,
    support_hits: Vec<u32>,
    pub(crate) epoch_order: Vec<usize>,
    iterations_recorded: usize,
}

impl SamplerState {
    pub fn new(axis: Axis, total: usize) -> Self {
        let uniform = 1.0 / total as f64;
        Self {
            axis,
            weights: vec![uniform; total],
            smoothed: vec![uniform; total],
            sample_counts: vec![0; total],
            support_hits: vec![0; total],
            epoch_order: Vec::new(),
            iterations_recorded: 0,
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn total(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sample_counts(&self) -> &[u32] {
        &self.sample_counts
    }

    pub fn support_hits(&self) -> &[u32] {
        &self.support_hits
    }

    pub fn iterations_recorded(&self) -> usize {
        self.iterations_recorded
    }

    /// Counts one minipatch draw on this axis.
    pub fn record_draw(&mut self, indices: &[usize]) {
        for &i in indices {
            self.sample_counts[i] += 1;
        }
        self.iterations_recorded += 1;
    }

    /// Fraction of samplings in which each feature entered the support.
    pub fn importance(&self) -> Vec<f64> {
        self.support_hits
            .iter()
            .zip(&self.sample_counts)
            .map(|(&h, &c)| f64::from(h) / f64::from(c.max(1)))
            .collect()
    }

    fn renormalise(&mut self) {
        let total: f64 = self.smoothed.iter().sum();
        if total > 0.0 {
            self.weights = self.smoothed.iter().map(|w| w / total).collect();
        } else {
            let uniform = 1.0 / self.weights.len() as f64;
            self.weights.fill(uniform);
        }
    }

    /// Observation weights from confusion values at iteration `t` (>= 2):
    /// `u_i = confusion_i * (t - 1) / max(1, count_i)`, then
    /// `w = alpha * w + (1 - alpha) * u / sum(u)`. Unchanged when `u` is
    /// identically zero.
    pub fn update_obs_weights(&mut self, confusion: &[f64], t: usize, alpha: f64) -> Result<()> {
        if confusion.len() != self.total() {
            return Err(Error::InvalidInput(format!(
                "{} confusion values for {} observations",
                confusion.len(),
                self.total()
            )));
        }
        if t < 2 {
            return Err(Error::InvalidParameter(format!(
                "observation weights are updated from iteration 2 on, got t = {t}"
            )));
        }
        let elapsed = (t - 1) as f64;
        let uncertainty: Vec<f64> = confusion
            .iter()
            .zip(&self.sample_counts)
            .map(|(&c, &n)| c * elapsed / f64::from(n.max(1)))
            .collect();
        let sum: f64 = uncertainty.iter().sum();
        if sum <= 0.0 {
            return Ok(());
        }
        for (w, u) in self.smoothed.iter_mut().zip(&uncertainty) {
            *w = alpha * *w + (1.0 - alpha) * u / sum;
        }
        self.renormalise();
        self.smoothed.clone_from(&self.weights);
        Ok(())
    }

    /// Feature weights from one minipatch support `support` (a subset of the
    /// sampled features of that minipatch): hits are counted, importance is
    /// `hits / max(1, count)` and `w = alpha * w + (1 - alpha) * importance`.
    /// The sampling weights are the normalised `w`.
    pub fn update_feature_weights(&mut self, support: &[usize], sampled: &[usize], alpha: f64) -> Result<()> {
        if let Some(&j) = support.iter().find(|j| !sampled.contains(j)) {
            return Err(Error::InvalidInput(format!(
                "support feature {j} was not in the sampled feature set"
            )));
        }
        for &j in support {
            self.support_hits[j] += 1;
        }
        let importance = self.importance();
        for (w, imp) in self.smoothed.iter_mut().zip(&importance) {
            *w = alpha * *w + (1.0 - alpha) * imp;
        }
        self.renormalise();
        Ok(())
    }
}
