//! Burn-in followed by exploit/explore draws, shared by both axes.
//!
//! Burn-in runs `epochs` passes over a reshuffled partition of all indices
//! into `Q = ceil(total / draw)` blocks, so every index is seen at least
//! once per epoch. Afterwards a "high" set `H` is selected from the current
//! weights; a `gamma` share of the minipatch is drawn from `H` by weight and
//! the rest uniformly from outside it.

use super::{draw_uniform_from, draw_weighted, SamplerState};
use crate::error::{Error, Result};
use crate::rng::{substream, Phase};
use crate::stats::{mean, population_sd, quantile_type7};

/// How the high set `H` is read off the weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    /// Weights above the type-7 quantile at this probability.
    Quantile(f64),
    /// Weights above `mean + tau * sd` (population sd).
    MeanPlusSd(f64),
}

impl ThresholdRule {
    pub fn high_set(&self, weights: &[f64]) -> Vec<usize> {
        let cutoff = match *self {
            ThresholdRule::Quantile(theta) => quantile_type7(weights, theta).unwrap_or(0.0),
            ThresholdRule::MeanPlusSd(tau) => mean(weights) + tau * population_sd(weights),
        };
        weights
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w > cutoff)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Exploitation share, rising linearly from `start` to `end` over `ramp`
/// adaptive iterations and flat afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSchedule {
    pub start: f64,
    pub end: f64,
    pub ramp: usize,
}

impl GammaSchedule {
    /// `step` counts adaptive iterations from 1.
    pub fn at(&self, step: usize) -> f64 {
        if self.ramp == 0 {
            return self.end;
        }
        let progress = (step.saturating_sub(1) as f64 / self.ramp as f64).min(1.0);
        self.start + (self.end - self.start) * progress
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EEConfig {
    pub total: usize,
    pub draw: usize,
    pub epochs: usize,
    pub threshold: ThresholdRule,
    pub gamma: GammaSchedule,
}

impl EEConfig {
    /// Standard configuration: gamma ramps from 0.5 to 1 over one burn-in
    /// length of adaptive iterations.
    pub fn new(total: usize, draw: usize, epochs: usize, threshold: ThresholdRule) -> Result<Self> {
        if draw == 0 || draw > total {
            return Err(Error::InvalidParameter(format!(
                "minipatch size {draw} must lie in 1..={total}"
            )));
        }
        let mut cfg = Self {
            total,
            draw,
            epochs,
            threshold,
            gamma: GammaSchedule { start: 0.5, end: 1.0, ramp: 0 },
        };
        cfg.gamma.ramp = cfg.burn_in_len();
        Ok(cfg)
    }

    /// Number of blocks `Q` in one burn-in epoch.
    pub fn blocks(&self) -> usize {
        self.total.div_ceil(self.draw)
    }

    pub fn burn_in_len(&self) -> usize {
        self.epochs * self.blocks()
    }
}

/// Round half up, for nonnegative `x`.
fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Indices for iteration `t` (from 1).
///
/// `draw_phase` and `epoch_phase` select the substreams for adaptive draws
/// and burn-in reshuffles of this axis.
pub fn next_indices(
    cfg: &EEConfig,
    state: &mut SamplerState,
    t: usize,
    seed: u64,
    draw_phase: Phase,
    epoch_phase: Phase,
) -> Result<Vec<usize>> {
    if cfg.total != state.total() {
        return Err(Error::InvalidInput(format!(
            "sampler has {} indices, configuration expects {}",
            state.total(),
            cfg.total
        )));
    }
    if t == 0 {
        return Err(Error::InvalidParameter("iterations are numbered from 1".into()));
    }
    let q = cfg.blocks();
    if t <= cfg.burn_in_len() {
        let offset = (t - 1) % q;
        if offset == 0 || state.epoch_order.len() != cfg.total {
            let epoch = ((t - 1) / q) as u64;
            let mut rng = substream(seed, epoch_phase, epoch + 1);
            state.epoch_order = permutation(cfg.total, &mut rng);
        }
        let start = offset * cfg.draw;
        let mut block: Vec<usize> = (0..cfg.draw)
            .map(|k| state.epoch_order[(start + k) % cfg.total])
            .collect();
        block.sort_unstable();
        block.dedup();
        return Ok(block);
    }

    let mut rng = substream(seed, draw_phase, t as u64);
    let weights = state.weights();
    let high = cfg.threshold.high_set(weights);
    let gamma = cfg.gamma.at(t - cfg.burn_in_len());
    let exploit = cfg.draw.min(round_half_up(gamma * high.len() as f64));
    let high_weights: Vec<f64> = high.iter().map(|&i| weights[i]).collect();
    let chosen: Vec<usize> = draw_weighted(&high_weights, exploit, &mut rng)?
        .into_iter()
        .map(|k| high[k])
        .collect();

    let mut in_high = vec![false; cfg.total];
    for &i in &high {
        in_high[i] = true;
    }
    let complement: Vec<usize> = (0..cfg.total).filter(|&i| !in_high[i]).collect();
    let need = cfg.draw - exploit;
    let from_complement = need.min(complement.len());
    let mut picked = chosen.clone();
    picked.extend(draw_uniform_from(&complement, from_complement, &mut rng)?);
    if from_complement < need {
        let mut taken = vec![false; cfg.total];
        for &i in &chosen {
            taken[i] = true;
        }
        let rest: Vec<usize> = high.iter().copied().filter(|&i| !taken[i]).collect();
        picked.extend(draw_uniform_from(&rest, need - from_complement, &mut rng)?);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Uniform random permutation of `0..n` (Fisher-Yates).
fn permutation(n: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}
