//! Final partitions from a consensus matrix.

use rand::Rng;

use crate::consensus::ConsensusMatrix;
use crate::dist::DistanceMatrix;
use crate::error::{Error, Result};
use crate::hclust::{cut_k, cut_quantile, ward_linkage};
use crate::rng::{substream, Phase};

fn check_k(s: &ConsensusMatrix, k: usize) -> Result<()> {
    if k < 1 || k > s.n() {
        return Err(Error::InvalidParameter(format!("k must be in 1..={}, got {k}", s.n())));
    }
    Ok(())
}

fn dissimilarity(s: &ConsensusMatrix) -> Result<DistanceMatrix> {
    DistanceMatrix::from_condensed(s.n(), s.dissimilarity_condensed())
}

/// Ward.D on `1 - S`, cut into `k` clusters.
pub fn finalize_hierarchical(s: &ConsensusMatrix, k: usize) -> Result<Vec<usize>> {
    check_k(s, k)?;
    if s.n() < 2 {
        return Ok(vec![0; s.n()]);
    }
    cut_k(&ward_linkage(&dissimilarity(s)?), k)
}

/// Ward.D on `1 - S`, cut at the `h` quantile of merge heights.
pub fn finalize_auto(s: &ConsensusMatrix, h: f64) -> Result<Vec<usize>> {
    if s.n() < 2 {
        return Ok(vec![0; s.n()]);
    }
    cut_quantile(&ward_linkage(&dissimilarity(s)?), h)
}

/// Eigen-decomposition of a dense symmetric `n x n` matrix by cyclic
/// Jacobi rotations. Returns eigenvalues ascending and the matching
/// eigenvectors as columns of a row-major matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= total * 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + col] = v[r * n + src];
        }
    }
    (values, vectors)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means from a k-means++ start; returns labels and SSE.
fn kmeans_once(points: &[f64], n: usize, dim: usize, k: usize, rng: &mut impl Rng) -> (Vec<usize>, f64) {
    let point = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut centres: Vec<f64> = Vec::with_capacity(k * dim);
    centres.extend_from_slice(point(rng.random_range(0..n)));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(point(i), &centres[..dim])).collect();
    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centres.extend_from_slice(point(pick));
        let c = centres.len() / dim - 1;
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(point(i), &centres[c * dim..(c + 1) * dim]));
        }
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..300 {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| {
                    sq_dist(point(i), &centres[a * dim..(a + 1) * dim])
                        .total_cmp(&sq_dist(point(i), &centres[b * dim..(b + 1) * dim]))
                        .then(a.cmp(&b))
                })
                .unwrap_or(0);
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, x) in sums[labels[i] * dim..(labels[i] + 1) * dim].iter_mut().zip(point(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            // Empty clusters keep their previous centre.
            if counts[c] > 0 {
                for d in 0..dim {
                    centres[c * dim + d] = sums[c * dim + d] / counts[c] as f64;
                }
            }
        }
    }
    let sse = (0..n)
        .map(|i| sq_dist(point(i), &centres[labels[i] * dim..(labels[i] + 1) * dim]))
        .sum();
    (labels, sse)
}

const KMEANS_RESTARTS: u64 = 10;

/// Spectral clustering with `S` as the affinity: bottom-`k` eigenvectors of
/// `I - D^-1/2 S D^-1/2`, rows scaled to unit length, then k-means with
/// k-means++ starts and 10 restarts.
pub fn finalize_spectral(s: &ConsensusMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    check_k(s, k)?;
    let n = s.n();
    let degrees: Vec<f64> = (0..n).map(|i| s.row(i).iter().sum()).collect();
    if let Some(i) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::Degenerate(format!("observation {i} has no affinity to any observation")));
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut lap = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            lap[i * n + j] = delta - inv_sqrt[i] * s.get(i, j) * inv_sqrt[j];
        }
    }
    let (_, vectors) = symmetric_eigen(&lap, n);
    let mut embed = vec![0.0; n * k];
    for i in 0..n {
        let row = &mut embed[i * k..(i + 1) * k];
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = vectors[i * n + c];
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = substream(seed, Phase::Spectral, restart);
        let (labels, sse) = kmeans_once(&embed, n, k, k, &mut rng);
        if best.as_ref().is_none_or(|(_, b)| sse < *b) {
            best = Some((labels, sse));
        }
    }
    let labels = best.map(|(l, _)| l).unwrap_or_default();
    Ok(by_first_appearance(&labels))
}

fn by_first_appearance(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}
