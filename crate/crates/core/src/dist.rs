//! Distance kernels over minipatches and the subsampled-distance deviation
//! checker.
//!
//! Clustering uses unnormalised sums (`sum_j |x_ij - x_i'j|`), matching R's
//! `dist`. Only [`deviation_experiment`] works with the per-feature mean
//! form `d = (1/m) * sum_j f(x_ij, x_i'j)` that the deviation bound is
//! stated for.

use rayon::prelude::*;

use crate::dataio::{rescale_unit, DataMatrix};
use crate::error::{Error, Result};
use crate::rng::{substream, Phase};
use crate::sampling::draw_uniform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Manhattan,
    SqEuclidean,
}

impl Metric {
    #[inline]
    pub fn per_feature(self, a: f64, b: f64) -> f64 {
        let d = a - b;
        match self {
            Metric::Manhattan => d.abs(),
            Metric::SqEuclidean => d * d,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "manhattan" => Ok(Metric::Manhattan),
            "sq_euclidean" | "sq-euclidean" => Ok(Metric::SqEuclidean),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// Symmetric dissimilarities stored as the row-major upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    condensed: Vec<f64>,
}

#[inline]
pub(crate) fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    n * i - i * (i + 1) / 2 + (j - i - 1)
}

impl DistanceMatrix {
    pub fn from_condensed(n: usize, condensed: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 points, got {n}")));
        }
        if condensed.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidInput(format!(
                "condensed length {} does not match n = {n}",
                condensed.len()
            )));
        }
        if condensed.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidInput(
                "distances must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { n, condensed })
    }

    /// Builds from a full square matrix, reading the upper triangle.
    pub fn from_square(n: usize, square: &[f64]) -> Result<Self> {
        let mut condensed = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            condensed.extend_from_slice(&square[i * n + i + 1..(i + 1) * n]);
        }
        Self::from_condensed(n, condensed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn condensed(&self) -> &[f64] {
        &self.condensed
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.condensed[condensed_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.condensed[condensed_index(self.n, j, i)],
        }
    }
}

// Below this many multiply-adds the rayon fan-out costs more than it saves.
const PARALLEL_WORK: usize = 1 << 18;

/// Distances between the rows of a contiguous row-major `n x m` buffer.
pub fn pairwise_dense(values: &[f64], n: usize, m: usize, metric: Metric) -> Result<DistanceMatrix> {
    if n < 2 || m < 1 {
        return Err(Error::InvalidInput(format!(
            "pairwise distances need n >= 2 rows and m >= 1 columns, got {n}x{m}"
        )));
    }
    debug_assert_eq!(values.len(), n * m);
    let row_block = |i: usize| -> Vec<f64> {
        let a = &values[i * m..(i + 1) * m];
        (i + 1..n)
            .map(|j| {
                let b = &values[j * m..(j + 1) * m];
                a.iter().zip(b).map(|(&x, &y)| metric.per_feature(x, y)).sum()
            })
            .collect()
    };
    let blocks: Vec<Vec<f64>> = if n * n * m / 2 >= PARALLEL_WORK {
        (0..n - 1).into_par_iter().map(row_block).collect()
    } else {
        (0..n - 1).map(row_block).collect()
    };
    Ok(DistanceMatrix {
        n,
        condensed: blocks.concat(),
    })
}

/// Distances between the selected `rows` of `data`, using only `cols`.
pub fn pairwise(data: &DataMatrix, rows: &[usize], cols: &[usize], metric: Metric) -> Result<DistanceMatrix> {
    let patch = data.gather(rows, cols);
    pairwise_dense(&patch, rows.len(), cols.len(), metric)
}

/// Hoeffding-Serfling bound on `P(|d_hat - d_star| >= eps)` for a mean
/// over `m_feat` of `total` features drawn without replacement, with
/// per-feature terms in [0, 1]. Clipped at 1.
pub fn hoeffding_bound(m_feat: usize, total: usize, eps: f64) -> Result<f64> {
    if m_feat == 0 || m_feat > total {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m_feat <= M, got m_feat = {m_feat}, M = {total}"
        )));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let m = m_feat as f64;
    let finite_pop = 1.0 - (m - 1.0) / total as f64;
    Ok((2.0 * (-2.0 * m * eps * eps / finite_pop).exp()).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRow {
    pub eps: f64,
    /// Fraction of subsamples with `|d_hat - d_star| >= eps`.
    pub exceedance: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub pair: (usize, usize),
    pub m_feat: usize,
    pub trials: usize,
    pub rows: Vec<DeviationRow>,
}

pub const MIN_DEVIATION_TRIALS: usize = 100;

/// Monte-Carlo check of [`hoeffding_bound`].
///
/// The data are min-max rescaled onto [0, 1] first so every per-feature
/// term lies in [0, 1]. A random pair of distinct observations is fixed
/// from `seed`, then `trials` uniform feature subsets of size `m_feat`
/// are drawn and the deviation of the subsampled mean distance from the
/// full mean distance is compared against each `eps`.
pub fn deviation_experiment(
    data: &DataMatrix,
    metric: Metric,
    m_feat: usize,
    trials: usize,
    eps_grid: &[f64],
    seed: u64,
) -> Result<DeviationReport> {
    if trials < MIN_DEVIATION_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_DEVIATION_TRIALS} trials are needed, got {trials}"
        )));
    }
    let total = data.n_cols();
    // Validates m_feat before any work.
    hoeffding_bound(m_feat, total, 1.0)?;
    let scaled = rescale_unit(data)?;

    let mut rng = substream(seed, Phase::Deviation, 0);
    let picked = draw_uniform(scaled.n_rows(), 2, &mut rng)?;
    let (i, j) = (picked[0].min(picked[1]), picked[0].max(picked[1]));
    let terms: Vec<f64> = (0..total)
        .map(|c| metric.per_feature(scaled.get(i, c), scaled.get(j, c)))
        .collect();
    let full = terms.iter().sum::<f64>() / total as f64;

    let deviations: Vec<f64> = (0..trials as u64)
        .map(|trial| {
            let mut rng = substream(seed, Phase::Deviation, trial + 1);
            let cols = draw_uniform(total, m_feat, &mut rng).expect("m_feat validated");
            let sub = cols.iter().map(|&c| terms[c]).sum::<f64>() / m_feat as f64;
            (sub - full).abs()
        })
        .collect();

    let rows = eps_grid
        .iter()
        .map(|&eps| {
            let hits = deviations.iter().filter(|&&d| d >= eps).count();
            Ok(DeviationRow {
                eps,
                exceedance: hits as f64 / trials as f64,
                bound: hoeffding_bound(m_feat, total, eps)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(DeviationReport {
        pair: (i, j),
        m_feat,
        trials,
        rows,
    })
}
