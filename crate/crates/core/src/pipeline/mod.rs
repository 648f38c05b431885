//! The minipatch ensemble loop, final clustering and minipatch-size tuning.
//!
//! Iteration `t` (from 1) of [`Engine::step`]:
//!
//! 1. `Impacc`, `t >= 2`: ANOVA-score the previous minipatch and update the
//!    feature weights.
//! 2. Adaptive modes, `t >= 2`: update observation weights from the current
//!    confusion values.
//! 3. Draw the observation and feature subsets.
//! 4. Cluster the minipatch (Ward.D linkage, quantile tree cut).
//! 5. Add the partition to the consensus counts.
//! 6. Early-stopping check on the confusion percentile. Iterations only
//!    count towards the stopping streak once every observation has been
//!    sampled and all active burn-ins are over.

mod baseline;
mod finalize;
mod tune;

use std::str::FromStr;

use rayon::prelude::*;

use crate::consensus::{ConsensusMatrix, ConsensusState, StopTracker};
use crate::dataio::DataMatrix;
use crate::dist::{pairwise_dense, Metric};
use crate::error::{Error, Result};
use crate::hclust::{cut_quantile, n_clusters, ward_linkage};
use crate::rng::{substream, Phase};
use crate::sampling::ee::next_indices;
use crate::sampling::{draw_uniform, score_features, Axis, EEConfig, SamplerState, ThresholdRule};

pub use baseline::{consensus_baseline, plain_hierarchical, BaselineResult};
pub use finalize::{finalize_auto, finalize_hierarchical, finalize_spectral, symmetric_eigen};
pub use tune::{tune_minipatch_size, TuneCell, TuneResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Mpcc,
    Mpacc,
    Impacc,
}

impl Mode {
    pub fn adaptive_observations(self) -> bool {
        matches!(self, Mode::Mpacc | Mode::Impacc)
    }

    pub fn adaptive_features(self) -> bool {
        self == Mode::Impacc
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Mpcc => "mpcc",
            Mode::Mpacc => "mpacc",
            Mode::Impacc => "impacc",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mpcc" => Ok(Mode::Mpcc),
            "mpacc" => Ok(Mode::Mpacc),
            "impacc" => Ok(Mode::Impacc),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FinalAlgo {
    #[default]
    Hierarchical,
    Spectral,
}

impl FromStr for FinalAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hierarchical" | "hclust" => Ok(FinalAlgo::Hierarchical),
            "spectral" => Ok(FinalAlgo::Spectral),
            other => Err(Error::InvalidParameter(format!("unknown final algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// Fraction of features per minipatch.
    pub m_frac: f64,
    /// Fraction of observations per minipatch.
    pub n_frac: f64,
    /// Quantile of merge heights at which minipatch trees are cut.
    pub h: f64,
    /// P-value quantile below which features enter the support.
    pub eta: f64,
    pub alpha_f: f64,
    /// Feature high set: weight above mean + tau * sd.
    pub tau: f64,
    pub alpha_i: f64,
    /// Observation high set: weight above the theta quantile.
    pub theta: f64,
    pub epochs: usize,
    /// Iteration budget; `None` derives it from the burn-in length.
    pub t_max: Option<usize>,
    /// Final number of clusters; `None` cuts the consensus tree at `h`.
    pub k_final: Option<usize>,
    pub final_algo: FinalAlgo,
    pub metric: Metric,
    pub stop: StopTracker,
    pub seed: u64,
    /// Cluster MPCC minipatches in parallel batches.
    pub parallel: bool,
    /// Keep every minipatch (indices and labels) in the result.
    pub keep_log: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            m_frac: 0.1,
            n_frac: 0.25,
            h: 0.95,
            eta: 0.05,
            alpha_f: 0.5,
            tau: 1.0,
            alpha_i: 0.5,
            theta: 0.95,
            epochs: 2,
            t_max: None,
            k_final: None,
            final_algo: FinalAlgo::Hierarchical,
            metric: Metric::Manhattan,
            stop: StopTracker::default(),
            seed: 0,
            parallel: false,
            keep_log: false,
        }
    }
}

const T_MAX_CAP: usize = 5000;

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64, open_low: bool| -> Result<()> {
            let ok = if open_low { v > 0.0 && v <= 1.0 } else { (0.0..=1.0).contains(&v) };
            if ok {
                Ok(())
            } else {
                let range = if open_low { "(0, 1]" } else { "[0, 1]" };
                Err(Error::InvalidParameter(format!("{name} must lie in {range}, got {v}")))
            }
        };
        unit("m_frac", self.m_frac, true)?;
        unit("n_frac", self.n_frac, true)?;
        unit("h", self.h, true)?;
        unit("eta", self.eta, false)?;
        unit("alpha_F", self.alpha_f, false)?;
        unit("alpha_I", self.alpha_i, false)?;
        unit("theta", self.theta, false)?;
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be nonnegative, got {}", self.tau)));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be at least 1".into()));
        }
        if self.t_max == Some(0) {
            return Err(Error::InvalidParameter("t_max must be at least 1".into()));
        }
        if self.k_final == Some(0) {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Ok(())
    }

    /// Observations per minipatch: `ceil(n_frac * N)`, at least 3.
    pub fn n_count(&self, n: usize) -> Result<usize> {
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "minipatches need at least 3 observations, data has {n}"
            )));
        }
        Ok(((self.n_frac * n as f64).ceil() as usize).clamp(3, n))
    }

    /// Features per minipatch: `ceil(m_frac * M)`, at least 1.
    pub fn m_count(&self, m: usize) -> usize {
        ((self.m_frac * m as f64).ceil() as usize).clamp(1, m)
    }

    /// `t_max` if set, else `min(5000, 20 * E * Q)` with `Q` the larger of the
    /// two axes' burn-in block counts.
    pub fn resolved_t_max(&self, n: usize, m: usize) -> Result<usize> {
        if let Some(t) = self.t_max {
            return Ok(t);
        }
        let q_obs = n.div_ceil(self.n_count(n)?);
        let q_feat = m.div_ceil(self.m_count(m));
        Ok((20 * self.epochs * q_obs.max(q_feat)).min(T_MAX_CAP))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EarlyStop,
    TMax,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::EarlyStop => "early_stop",
            StopReason::TMax => "t_max",
        }
    }
}

/// Diagnostics for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    /// Stopping-rule percentile of the confusion values after the update.
    pub confusion_percentile: f64,
    pub minipatch_clusters: usize,
    /// High-set sizes on the observation and feature axes (0 outside the
    /// adaptive stage).
    pub high_obs: usize,
    pub high_features: usize,
    /// Whether the iteration counted towards the stopping streak.
    pub counted: bool,
}

/// One clustered minipatch.
#[derive(Debug, Clone, PartialEq)]
pub struct Minipatch {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Cluster of each row of `rows`.
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Final partition, ids `0..k`.
    pub labels: Vec<usize>,
    pub consensus: ConsensusMatrix,
    /// Feature importance in [0, 1] (`Impacc` only).
    pub feature_scores: Option<Vec<f64>>,
    pub obs_weights: Vec<f64>,
    pub feature_weights: Vec<f64>,
    pub iterations_run: usize,
    pub t_max: usize,
    pub stop_reason: StopReason,
    pub trace: Vec<TraceRow>,
    pub log: Option<Vec<Minipatch>>,
    pub n_count: usize,
    pub m_count: usize,
}

impl RunResult {
    pub fn max_confusion(&self) -> f64 {
        crate::consensus::confusion(&self.consensus)
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Clusters one minipatch; returns the labels and the gathered patch.
pub fn cluster_minipatch(
    data: &DataMatrix,
    rows: &[usize],
    cols: &[usize],
    metric: Metric,
    h: f64,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let patch = data.gather(rows, cols);
    let d = pairwise_dense(&patch, rows.len(), cols.len(), metric)?;
    let labels = cut_quantile(&ward_linkage(&d), h)?;
    Ok((labels, patch))
}

/// Rows, columns and minipatch labels of one iteration.
type Drawn = (Vec<usize>, Vec<usize>, Vec<usize>);

struct Pending {
    cols: Vec<usize>,
    labels: Vec<usize>,
    patch: Vec<f64>,
}

/// Step-wise driver of the ensemble loop.
pub struct Engine<'a> {
    data: &'a DataMatrix,
    mode: Mode,
    hp: HyperParams,
    n_count: usize,
    m_count: usize,
    t_max: usize,
    t: usize,
    consensus: ConsensusState,
    obs: SamplerState,
    feat: SamplerState,
    obs_cfg: EEConfig,
    feat_cfg: EEConfig,
    stop: StopTracker,
    pending: Option<Pending>,
    trace: Vec<TraceRow>,
    log: Option<Vec<Minipatch>>,
    stopped: Option<StopReason>,
}

impl<'a> Engine<'a> {
    pub fn new(data: &'a DataMatrix, mode: Mode, hp: &HyperParams) -> Result<Self> {
        hp.validate()?;
        let (n, m) = (data.n_rows(), data.n_cols());
        let n_count = hp.n_count(n)?;
        let m_count = hp.m_count(m);
        if let Some(k) = hp.k_final {
            if k > n {
                return Err(Error::InvalidParameter(format!("k = {k} exceeds {n} observations")));
            }
        }
        let obs_cfg = EEConfig::new(n, n_count, hp.epochs, ThresholdRule::Quantile(hp.theta))?;
        let feat_cfg = EEConfig::new(m, m_count, hp.epochs, ThresholdRule::MeanPlusSd(hp.tau))?;
        Ok(Self {
            data,
            mode,
            n_count,
            m_count,
            t_max: hp.resolved_t_max(n, m)?,
            t: 0,
            consensus: ConsensusState::new(n),
            obs: SamplerState::new(Axis::Observations, n),
            feat: SamplerState::new(Axis::Features, m),
            obs_cfg,
            feat_cfg,
            stop: hp.stop.clone(),
            pending: None,
            trace: Vec::new(),
            log: hp.keep_log.then(Vec::new),
            stopped: None,
            hp: hp.clone(),
        })
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn n_count(&self) -> usize {
        self.n_count
    }

    pub fn m_count(&self) -> usize {
        self.m_count
    }

    pub fn consensus_state(&self) -> &ConsensusState {
        &self.consensus
    }

    pub fn observation_sampler(&self) -> &SamplerState {
        &self.obs
    }

    pub fn feature_sampler(&self) -> &SamplerState {
        &self.feat
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stopped
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    /// Iterations after which the stopping streak may start counting.
    fn warmup(&self) -> usize {
        let obs = if self.mode.adaptive_observations() { self.obs_cfg.burn_in_len() } else { 0 };
        let feat = if self.mode.adaptive_features() { self.feat_cfg.burn_in_len() } else { 0 };
        obs.max(feat)
    }

    fn score_pending(&mut self) -> Result<()> {
        if let Some(p) = self.pending.take() {
            if let Some(found) = score_features(&p.patch, &p.cols, &p.labels, self.hp.eta)? {
                self.feat.update_feature_weights(&found.support, &p.cols, self.hp.alpha_f)?;
            }
        }
        Ok(())
    }

    fn draw(&mut self, t: usize) -> Result<(Vec<usize>, Vec<usize>, usize, usize)> {
        let seed = self.hp.seed;
        let in_adaptive = |cfg: &EEConfig| t > cfg.burn_in_len();
        let (rows, high_obs) = if self.mode.adaptive_observations() {
            let high = if in_adaptive(&self.obs_cfg) {
                self.obs_cfg.threshold.high_set(self.obs.weights()).len()
            } else {
                0
            };
            let rows = next_indices(&self.obs_cfg, &mut self.obs, t, seed, Phase::ObservationDraw, Phase::ObservationEpoch)?;
            (rows, high)
        } else {
            (uniform_rows(seed, t, self.data.n_rows(), self.n_count)?, 0)
        };
        let (cols, high_feat) = if self.mode.adaptive_features() {
            let high = if in_adaptive(&self.feat_cfg) {
                self.feat_cfg.threshold.high_set(self.feat.weights()).len()
            } else {
                0
            };
            let cols = next_indices(&self.feat_cfg, &mut self.feat, t, seed, Phase::FeatureDraw, Phase::FeatureEpoch)?;
            (cols, high)
        } else {
            (uniform_cols(seed, t, self.data.n_cols(), self.m_count)?, 0)
        };
        Ok((rows, cols, high_obs, high_feat))
    }

    /// Adds a clustered minipatch and runs the stopping check.
    fn absorb(
        &mut self,
        rows: Vec<usize>,
        cols: Vec<usize>,
        labels: Vec<usize>,
        high: (usize, usize),
    ) -> Result<bool> {
        let t = self.t;
        self.consensus.update(&rows, &labels)?;
        self.obs.record_draw(&rows);
        self.feat.record_draw(&cols);
        let percentile = self.stop.percentile(self.consensus.confusion());
        let counted = self.consensus.all_sampled() && t > self.warmup();
        let stop = if counted {
            self.stop.observe(percentile)
        } else {
            self.stop.observe_without_counting(percentile);
            false
        };
        self.trace.push(TraceRow {
            iteration: t,
            confusion_percentile: percentile,
            minipatch_clusters: n_clusters(&labels),
            high_obs: high.0,
            high_features: high.1,
            counted,
        });
        if let Some(log) = self.log.as_mut() {
            log.push(Minipatch { rows, cols, labels });
        }
        if stop {
            self.stopped = Some(StopReason::EarlyStop);
        } else if t >= self.t_max {
            self.stopped = Some(StopReason::TMax);
        }
        Ok(self.stopped.is_some())
    }

    /// Runs one iteration; returns `true` once the loop has terminated.
    pub fn step(&mut self) -> Result<bool> {
        if self.stopped.is_some() {
            return Ok(true);
        }
        self.t += 1;
        let t = self.t;
        if self.mode.adaptive_features() && t >= 2 {
            self.score_pending()?;
        }
        if self.mode.adaptive_observations() && t >= 2 {
            let confusion = self.consensus.confusion().to_vec();
            self.obs.update_obs_weights(&confusion, t, self.hp.alpha_i)?;
        }
        let (rows, cols, high_obs, high_feat) = self.draw(t)?;
        let (labels, patch) = cluster_minipatch(self.data, &rows, &cols, self.hp.metric, self.hp.h)?;
        if self.mode.adaptive_features() {
            self.pending = Some(Pending { cols: cols.clone(), labels: labels.clone(), patch });
        }
        self.absorb(rows, cols, labels, (high_obs, high_feat))
    }

    /// Uniform-mode iterations clustered in parallel batches, folded in
    /// iteration order. Gives the same state as repeated [`Engine::step`].
    fn run_parallel_uniform(&mut self) -> Result<()> {
        let batch = 4 * rayon::current_num_threads().max(1);
        let seed = self.hp.seed;
        let (n, m) = (self.data.n_rows(), self.data.n_cols());
        while self.stopped.is_none() {
            let first = self.t + 1;
            let last = (self.t + batch).min(self.t_max);
            let done: Vec<Result<Drawn>> = (first..=last)
                .into_par_iter()
                .map(|t| {
                    let rows = uniform_rows(seed, t, n, self.n_count)?;
                    let cols = uniform_cols(seed, t, m, self.m_count)?;
                    let (labels, _) = cluster_minipatch(self.data, &rows, &cols, self.hp.metric, self.hp.h)?;
                    Ok((rows, cols, labels))
                })
                .collect();
            for item in done {
                let (rows, cols, labels) = item?;
                self.t += 1;
                if self.absorb(rows, cols, labels, (0, 0))? {
                    break;
                }
            }
        }
        Ok(())
    }

    /// Iterates until the loop terminates.
    pub fn run_loop(&mut self) -> Result<()> {
        if self.mode == Mode::Mpcc && self.hp.parallel {
            self.run_parallel_uniform()
        } else {
            while !self.step()? {}
            Ok(())
        }
    }

    /// Runs to termination and assembles the result.
    pub fn run_to_end(mut self) -> Result<RunResult> {
        self.run_loop()?;
        self.finish()
    }

    /// Final clustering of the consensus matrix and result assembly. Any
    /// minipatch still awaiting feature scoring is scored first.
    pub fn finish(mut self) -> Result<RunResult> {
        if self.mode.adaptive_features() {
            self.score_pending()?;
        }
        if let Some(i) = self.consensus.times_sampled().iter().position(|&c| c == 0) {
            return Err(Error::Degenerate(format!(
                "observation {} was never sampled in {} iterations; raise t_max",
                self.data.row_ids()[i],
                self.t
            )));
        }
        let s = self.consensus.consensus();
        let labels = match (self.hp.k_final, self.hp.final_algo) {
            (Some(k), FinalAlgo::Hierarchical) => finalize_hierarchical(&s, k)?,
            (Some(k), FinalAlgo::Spectral) => finalize_spectral(&s, k, self.hp.seed)?,
            (None, FinalAlgo::Hierarchical) => finalize_auto(&s, self.hp.h)?,
            (None, FinalAlgo::Spectral) => {
                let k = n_clusters(&finalize_auto(&s, self.hp.h)?);
                finalize_spectral(&s, k, self.hp.seed)?
            }
        };
        let feature_scores = self.mode.adaptive_features().then(|| self.feat.importance());
        Ok(RunResult {
            labels,
            consensus: s,
            feature_scores,
            obs_weights: self.obs.weights().to_vec(),
            feature_weights: self.feat.weights().to_vec(),
            iterations_run: self.t,
            t_max: self.t_max,
            stop_reason: self.stopped.unwrap_or(StopReason::TMax),
            trace: self.trace,
            log: self.log,
            n_count: self.n_count,
            m_count: self.m_count,
        })
    }
}

fn uniform_rows(seed: u64, t: usize, n: usize, count: usize) -> Result<Vec<usize>> {
    draw_uniform(n, count, &mut substream(seed, Phase::ObservationDraw, t as u64))
}

fn uniform_cols(seed: u64, t: usize, m: usize, count: usize) -> Result<Vec<usize>> {
    draw_uniform(m, count, &mut substream(seed, Phase::FeatureDraw, t as u64))
}

/// Runs the ensemble in `mode` and clusters the consensus matrix.
pub fn run(data: &DataMatrix, mode: Mode, hp: &HyperParams) -> Result<RunResult> {
    Engine::new(data, mode, hp)?.run_to_end()
}
