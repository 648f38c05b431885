//! Synthetic Gaussian mixtures with block-correlated noise.
//!
//! Rows are drawn from `N(mu_k, Sigma)` where `Sigma` is block diagonal in
//! 5x5 equicorrelated blocks. Three regimes differ only in the means:
//! sparse (few signal features, zero-mean noise), weak sparse (noise means
//! drawn once from `N(0, 1)`) and no-sparse (every feature carries signal,
//! with jittered means).

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::dataio::DataMatrix;
use crate::error::{Error, Result};
use crate::rng::{substream, Phase};

const BLOCK: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Sparse,
    WeakSparse,
    NoSparse,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(Regime::Sparse),
            "weak_sparse" | "weak-sparse" => Ok(Regime::WeakSparse),
            "no_sparse" | "no-sparse" => Ok(Regime::NoSparse),
            other => Err(Error::InvalidParameter(format!("unknown regime '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_obs: usize,
    pub n_features: usize,
    pub n_clusters: usize,
    /// Explicit cluster sizes; `None` uses [`default_sizes`].
    pub cluster_sizes: Option<Vec<usize>>,
    /// Signal features (ignored in the no-sparse regime, where all are).
    pub n_signal: usize,
    pub snr: f64,
    pub rho: f64,
    pub regime: Regime,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_obs: 500,
            n_features: 5000,
            n_clusters: 4,
            cluster_sizes: None,
            n_signal: 25,
            snr: 5.0,
            rho: 0.5,
            regime: Regime::Sparse,
            seed: 0,
        }
    }
}

impl SynthSpec {
    /// Low-dimensional regime with 100 features, all informative.
    pub fn no_sparse() -> Self {
        Self {
            n_features: 100,
            n_signal: 100,
            regime: Regime::NoSparse,
            ..Self::default()
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.cluster_sizes
            .clone()
            .unwrap_or_else(|| default_sizes(self.n_obs, self.n_clusters))
    }

    pub fn signal_count(&self) -> usize {
        match self.regime {
            Regime::NoSparse => self.n_features,
            _ => self.n_signal,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_clusters == 0 || self.n_clusters > 4 {
            return bad(format!(
                "mean patterns exist for 1 to 4 clusters, got {}",
                self.n_clusters
            ));
        }
        let sizes = self.sizes();
        if sizes.len() != self.n_clusters || sizes.iter().sum::<usize>() != self.n_obs {
            return bad(format!(
                "cluster sizes {sizes:?} do not give {} clusters over {} observations",
                self.n_clusters, self.n_obs
            ));
        }
        if self.n_obs < 2 || self.n_features == 0 || !self.n_features.is_multiple_of(BLOCK) {
            return bad(format!(
                "need at least 2 observations and a positive multiple of {BLOCK} features, got {} x {}",
                self.n_obs, self.n_features
            ));
        }
        if self.regime != Regime::NoSparse && (self.n_signal == 0 || self.n_signal > self.n_features) {
            return bad(format!(
                "signal feature count {} must lie in 1..={}",
                self.n_signal, self.n_features
            ));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1), got {}", self.rho));
        }
        if !(self.snr.is_finite() && self.snr >= 0.0) {
            return bad(format!("snr must be finite and nonnegative, got {}", self.snr));
        }
        Ok(())
    }
}

/// Cluster sizes in the proportions 4/16/24/56 for four clusters, equal
/// sizes (earlier clusters absorbing the remainder) otherwise.
pub fn default_sizes(n_obs: usize, k: usize) -> Vec<usize> {
    if k == 4 {
        let mut sizes: Vec<usize> = [4, 16, 24].iter().map(|p| n_obs * p / 100).collect();
        sizes.push(n_obs - sizes.iter().sum::<usize>());
        return sizes;
    }
    let k = k.max(1);
    (0..k).map(|c| n_obs / k + usize::from(c < n_obs % k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub matrix: DataMatrix,
    /// Cluster ids in `1..=K`.
    pub labels: Vec<usize>,
    pub signal_mask: Vec<bool>,
}

/// Sign of coordinate `j` (of `len`) in cluster `k`'s mean pattern: all
/// positive, positive then negative, negative then positive, all negative.
fn pattern_sign(k: usize, j: usize, len: usize) -> f64 {
    let first_half = j < len.div_ceil(2);
    let positive = match k {
        0 => true,
        1 => first_half,
        2 => !first_half,
        _ => false,
    };
    if positive {
        1.0
    } else {
        -1.0
    }
}

/// Per-cluster mean vectors over all features.
fn cluster_means(spec: &SynthSpec) -> Vec<Vec<f64>> {
    let m = spec.n_features;
    let mut rng = substream(spec.seed, Phase::SynthMeans, 0);
    match spec.regime {
        Regime::Sparse | Regime::WeakSparse => {
            let s = spec.n_signal;
            let magnitude = spec.snr / (s as f64).sqrt();
            let noise: Vec<f64> = if spec.regime == Regime::WeakSparse {
                (0..m - s).map(|_| rng.sample(StandardNormal)).collect()
            } else {
                vec![0.0; m - s]
            };
            (0..spec.n_clusters)
                .map(|k| {
                    let mut mu: Vec<f64> = (0..s).map(|j| magnitude * pattern_sign(k, j, s)).collect();
                    mu.extend_from_slice(&noise);
                    mu
                })
                .collect()
        }
        Regime::NoSparse => {
            let jitter = Normal::new(0.0, 0.1f64.sqrt()).expect("valid sd");
            let magnitude = spec.snr / 10.0;
            (0..spec.n_clusters)
                .map(|k| {
                    (0..m)
                        .map(|j| magnitude * pattern_sign(k, j, m) + jitter.sample(&mut rng))
                        .collect()
                })
                .collect()
        }
    }
}

/// Lower Cholesky factor of the 5x5 block with unit diagonal and `rho` off.
fn block_cholesky(rho: f64) -> [[f64; BLOCK]; BLOCK] {
    let mut a = [[rho; BLOCK]; BLOCK];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut l = [[0.0; BLOCK]; BLOCK];
    for i in 0..BLOCK {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            l[i][j] = if i == j {
                (a[i][i] - s).sqrt()
            } else {
                (a[i][j] - s) / l[j][j]
            };
        }
    }
    l
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let n = spec.n_obs;
    let m = spec.n_features;
    let sizes = spec.sizes();
    let means = cluster_means(spec);
    let chol = block_cholesky(spec.rho);
    let cluster_of: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(k, &c)| std::iter::repeat_n(k, c))
        .collect();

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(spec.seed, Phase::SynthRows, i as u64);
            let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            let mu = &means[cluster_of[i]];
            let mut row = vec![0.0; m];
            for b in (0..m).step_by(BLOCK) {
                for r in 0..BLOCK {
                    let e: f64 = (0..=r).map(|c| chol[r][c] * z[b + c]).sum();
                    row[b + r] = mu[b + r] + e;
                }
            }
            row
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = substream(spec.seed, Phase::SynthShuffle, 0);
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let values: Vec<f64> = order.iter().flat_map(|&i| rows[i].iter().copied()).collect();
    let labels: Vec<usize> = order.iter().map(|&i| cluster_of[i] + 1).collect();
    let signal = spec.signal_count();
    let signal_mask = (0..m).map(|j| j < signal).collect();
    Ok(SynthData {
        matrix: DataMatrix::from_values(n, m, values)?,
        labels,
        signal_mask,
    })
}

/// Euclidean norm of a mean vector.
pub fn snr_of(mu: &[f64]) -> f64 {
    mu.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Well-separated clusters: cluster `k` has mean `k * gap` on every feature
/// plus standard normal noise. Rows are not shuffled.
pub fn separable_blobs(sizes: &[usize], n_features: usize, gap: f64, seed: u64) -> Result<SynthData> {
    let n: usize = sizes.iter().sum();
    let mut values = Vec::with_capacity(n * n_features);
    let mut labels = Vec::with_capacity(n);
    let mut i = 0u64;
    for (k, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let mut rng = substream(seed, Phase::SynthRows, i);
            i += 1;
            values.extend((0..n_features).map(|_| k as f64 * gap + rng.sample::<f64, _>(StandardNormal)));
            labels.push(k + 1);
        }
    }
    Ok(SynthData {
        matrix: DataMatrix::from_values(n, n_features, values)?,
        labels,
        signal_mask: vec![true; n_features],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(regime: Regime, snr: f64) -> SynthSpec {
        SynthSpec {
            n_obs: 200,
            n_features: 100,
            n_signal: 10,
            snr,
            regime,
            seed: 3,
            ..SynthSpec::default()
        }
    }

    fn histogram(labels: &[usize], k: usize) -> Vec<usize> {
        let mut h = vec![0; k];
        for &l in labels {
            h[l - 1] += 1;
        }
        h
    }

    #[test]
    fn default_spec_shape() {
        let spec = SynthSpec::default();
        assert_eq!(spec.sizes(), vec![20, 80, 120, 280]);
        let d = generate(&spec).unwrap();
        assert_eq!((d.matrix.n_rows(), d.matrix.n_cols()), (500, 5000));
        assert_eq!(histogram(&d.labels, 4), vec![20, 80, 120, 280]);
        assert_eq!(d.signal_mask.iter().filter(|&&b| b).count(), 25);
    }

    #[test]
    fn desk_sizes() {
        assert_eq!(default_sizes(200, 4), vec![8, 32, 48, 112]);
        assert_eq!(default_sizes(10, 3), vec![4, 3, 3]);
    }

    #[test]
    fn no_sparse_shape() {
        let spec = SynthSpec { n_obs: 200, seed: 1, ..SynthSpec::no_sparse() };
        let d = generate(&spec).unwrap();
        assert_eq!(d.matrix.n_cols(), 100);
        assert!(d.signal_mask.iter().all(|&b| b));
    }

    #[test]
    fn sparse_means_have_requested_snr() {
        let spec = SynthSpec { snr: 5.0, ..SynthSpec::default() };
        for mu in cluster_means(&spec) {
            assert!((snr_of(&mu) - 5.0).abs() < 1e-12);
            assert_eq!(mu[..13].iter().filter(|&&v| v > 0.0).count() % 13, 0);
        }
        let zero = SynthSpec { snr: 0.0, ..SynthSpec::default() };
        assert_eq!(snr_of(&cluster_means(&zero)[0]), 0.0);
        assert!((snr_of(&[0.8; 25]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sign_patterns_split_ceil_floor() {
        let signs: Vec<f64> = (0..25).map(|j| pattern_sign(1, j, 25)).collect();
        assert_eq!(signs.iter().filter(|&&s| s > 0.0).count(), 13);
        assert!(signs[..13].iter().all(|&s| s > 0.0));
        assert!((0..25).all(|j| pattern_sign(2, j, 25) == -pattern_sign(1, j, 25)));
        assert!((0..25).all(|j| pattern_sign(3, j, 25) == -1.0));
    }

    #[test]
    fn zero_snr_columns_centre_on_zero() {
        let d = generate(&small(Regime::Sparse, 0.0)).unwrap();
        let n = d.matrix.n_rows() as f64;
        for j in 0..d.matrix.n_cols() {
            let mean: f64 = (0..d.matrix.n_rows()).map(|i| d.matrix.get(i, j)).sum::<f64>() / n;
            assert!(mean.abs() < 4.0 / n.sqrt(), "column {j} mean {mean}");
        }
    }

    #[test]
    fn block_covariance() {
        let spec = SynthSpec {
            n_obs: 5000,
            n_features: 10,
            n_clusters: 1,
            n_signal: 5,
            snr: 0.0,
            seed: 11,
            ..SynthSpec::default()
        };
        let d = generate(&spec).unwrap();
        let n = 5000.0;
        let col = |j: usize| -> Vec<f64> { (0..5000).map(|i| d.matrix.get(i, j)).collect() };
        let corr = |a: &[f64], b: &[f64]| {
            let ma = a.iter().sum::<f64>() / n;
            let mb = b.iter().sum::<f64>() / n;
            let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
            let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
            let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
            cov / (va * vb).sqrt()
        };
        let cols: Vec<Vec<f64>> = (0..10).map(col).collect();
        for i in 0..10 {
            for j in i + 1..10 {
                let r = corr(&cols[i], &cols[j]);
                if i / 5 == j / 5 {
                    assert!((r - 0.5).abs() < 0.1, "within block {i},{j}: {r}");
                } else {
                    assert!(r.abs() < 0.1, "across blocks {i},{j}: {r}");
                }
            }
        }
    }

    #[test]
    fn reproducible() {
        let a = generate(&small(Regime::WeakSparse, 3.0)).unwrap();
        let b = generate(&small(Regime::WeakSparse, 3.0)).unwrap();
        assert_eq!(a, b);
        let c = generate(&SynthSpec { seed: 4, ..small(Regime::WeakSparse, 3.0) }).unwrap();
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn invalid_specs() {
        assert!(generate(&SynthSpec { n_features: 12, ..small(Regime::Sparse, 1.0) }).is_err());
        assert!(generate(&SynthSpec { n_signal: 101, ..small(Regime::Sparse, 1.0) }).is_err());
        assert!(generate(&SynthSpec { rho: 1.0, ..small(Regime::Sparse, 1.0) }).is_err());
        assert!(generate(&SynthSpec { cluster_sizes: Some(vec![1, 2]), ..small(Regime::Sparse, 1.0) }).is_err());
        assert!(generate(&SynthSpec { n_clusters: 5, ..small(Regime::Sparse, 1.0) }).is_err());
    }

    #[test]
    fn blobs_are_labelled_in_order() {
        let d = separable_blobs(&[3, 2], 4, 10.0, 1).unwrap();
        assert_eq!(d.labels, vec![1, 1, 1, 2, 2]);
        assert!(d.matrix.get(4, 0) > d.matrix.get(0, 0));
    }
}
