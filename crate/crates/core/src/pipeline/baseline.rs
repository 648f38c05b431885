//! Reference methods for benchmarks: resampling consensus clustering on
//! full-feature subsamples, and a single Ward.D tree on all the data.

use crate::consensus::{ConsensusMatrix, ConsensusState};
use crate::dataio::DataMatrix;
use crate::dist::{pairwise, Metric};
use crate::error::{Error, Result};
use crate::hclust::{cut_k, ward_linkage};
use crate::rng::{substream, Phase};
use crate::sampling::draw_uniform;

use super::finalize_hierarchical;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub labels: Vec<usize>,
    pub consensus: ConsensusMatrix,
}

/// Resampling consensus clustering: each of `iterations` rounds clusters a
/// `subsample` fraction of the observations on all features into `k`
/// clusters; the consensus matrix is then cut into `k` clusters.
pub fn consensus_baseline(
    data: &DataMatrix,
    k: usize,
    iterations: usize,
    subsample: f64,
    metric: Metric,
    seed: u64,
) -> Result<BaselineResult> {
    let n = data.n_rows();
    if iterations == 0 {
        return Err(Error::InvalidParameter("iterations must be at least 1".into()));
    }
    if !(subsample > 0.0 && subsample <= 1.0) {
        return Err(Error::InvalidParameter(format!("subsample must lie in (0, 1], got {subsample}")));
    }
    let count = ((subsample * n as f64).ceil() as usize).clamp(k.max(2), n);
    let cols: Vec<usize> = (0..data.n_cols()).collect();
    let mut state = ConsensusState::new(n);
    for t in 1..=iterations {
        let rows = draw_uniform(n, count, &mut substream(seed, Phase::Baseline, t as u64))?;
        let labels = cut_k(&ward_linkage(&pairwise(data, &rows, &cols, metric)?), k)?;
        state.update(&rows, &labels)?;
    }
    let consensus = state.consensus();
    Ok(BaselineResult {
        labels: finalize_hierarchical(&consensus, k)?,
        consensus,
    })
}

/// Ward.D on all observations and features, cut into `k` clusters.
pub fn plain_hierarchical(data: &DataMatrix, k: usize, metric: Metric) -> Result<Vec<usize>> {
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    let cols: Vec<usize> = (0..data.n_cols()).collect();
    cut_k(&ward_linkage(&pairwise(data, &rows, &cols, metric)?), k)
}
