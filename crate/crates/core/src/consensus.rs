//! Co-clustering evidence accumulated over minipatches.
//!
//! `V(i, i')` counts how often a pair landed in the same minipatch cluster,
//! `D(i, i')` how often it was sampled together. The consensus matrix is
//! `S = V / max(1, D)`. Counters live in condensed upper-triangular form
//! with a separate diagonal.
//!
//! Per-observation confusion `(1/N) * sum_i' S(1 - S)` is kept up to date
//! incrementally: an update only touches pairs inside the minipatch, so only
//! the rows of sampled observations change, and those rows are recomputed
//! in full. The maintained values are therefore bit-identical to
//! [`confusion`] applied to [`ConsensusState::consensus`].

use std::io::{Read, Write};

use crate::dist::condensed_index;
use crate::error::{Error, Result};
use crate::stats::quantile_type7;

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusState {
    n: usize,
    co_cluster: Vec<u32>,
    co_sample: Vec<u32>,
    times_sampled: Vec<u32>,
    confusion: Vec<f64>,
}

#[inline]
fn similarity(v: u32, d: u32) -> f64 {
    f64::from(v) / f64::from(d.max(1))
}

impl ConsensusState {
    pub fn new(n: usize) -> Self {
        let pairs = n * n.saturating_sub(1) / 2;
        Self {
            n,
            co_cluster: vec![0; pairs],
            co_sample: vec![0; pairs],
            times_sampled: vec![0; n],
            confusion: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(V(i, j), D(i, j))`; on the diagonal both equal the sample count.
    pub fn counts(&self, i: usize, j: usize) -> (u32, u32) {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => (self.times_sampled[i], self.times_sampled[i]),
            std::cmp::Ordering::Less => {
                let k = condensed_index(self.n, i, j);
                (self.co_cluster[k], self.co_sample[k])
            }
            std::cmp::Ordering::Greater => self.counts(j, i),
        }
    }

    pub fn times_sampled(&self) -> &[u32] {
        &self.times_sampled
    }

    pub fn all_sampled(&self) -> bool {
        self.times_sampled.iter().all(|&c| c > 0)
    }

    /// Current confusion values, identical to `confusion(&self.consensus())`.
    pub fn confusion(&self) -> &[f64] {
        &self.confusion
    }

    #[inline]
    fn similarity_at(&self, i: usize, j: usize) -> f64 {
        let (v, d) = self.counts(i, j);
        similarity(v, d)
    }

    fn recompute_confusion_row(&mut self, i: usize) {
        let mut acc = 0.0;
        for j in 0..self.n {
            let s = self.similarity_at(i, j);
            acc += s * (1.0 - s);
        }
        self.confusion[i] = acc / self.n as f64;
    }

    /// Records one clustered minipatch: `labels[k]` is the cluster of
    /// observation `sampled[k]`.
    pub fn update(&mut self, sampled: &[usize], labels: &[usize]) -> Result<()> {
        if sampled.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} sampled indices but {} labels",
                sampled.len(),
                labels.len()
            )));
        }
        let mut order: Vec<usize> = (0..sampled.len()).collect();
        order.sort_unstable_by_key(|&k| sampled[k]);
        for w in order.windows(2) {
            if sampled[w[0]] == sampled[w[1]] {
                return Err(Error::InvalidInput(format!(
                    "observation {} sampled twice in one minipatch",
                    sampled[w[0]]
                )));
            }
        }
        if let Some(&k) = order.last() {
            if sampled[k] >= self.n {
                return Err(Error::IndexOutOfRange {
                    index: sampled[k],
                    len: self.n,
                });
            }
        }

        for (a, &ka) in order.iter().enumerate() {
            let i = sampled[ka];
            self.times_sampled[i] += 1;
            for &kb in &order[a + 1..] {
                let idx = condensed_index(self.n, i, sampled[kb]);
                self.co_sample[idx] += 1;
                if labels[ka] == labels[kb] {
                    self.co_cluster[idx] += 1;
                }
            }
        }
        for &i in sampled {
            self.recompute_confusion_row(i);
        }
        Ok(())
    }

    /// Adds another accumulator's counts (integer addition, so the order of
    /// absorbing is irrelevant).
    pub fn absorb(&mut self, other: &ConsensusState) -> Result<()> {
        if other.n != self.n {
            return Err(Error::InvalidInput(format!(
                "cannot merge consensus states of size {} and {}",
                self.n, other.n
            )));
        }
        for (a, b) in self.co_cluster.iter_mut().zip(&other.co_cluster) {
            *a += b;
        }
        for (a, b) in self.co_sample.iter_mut().zip(&other.co_sample) {
            *a += b;
        }
        for (a, b) in self.times_sampled.iter_mut().zip(&other.times_sampled) {
            *a += b;
        }
        for i in 0..self.n {
            self.recompute_confusion_row(i);
        }
        Ok(())
    }

    /// `S = V / max(1, D)` as a dense matrix.
    pub fn consensus(&self) -> ConsensusMatrix {
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = self.similarity_at(i, j);
            }
        }
        ConsensusMatrix { n, values }
    }
}

/// Dense symmetric similarity matrix with entries in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusMatrix {
    n: usize,
    values: Vec<f64>,
}

impl ConsensusMatrix {
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {n}x{n} consensus matrix, got {}",
                n * n,
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidInput("consensus entries must lie in [0, 1]".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                if values[i * n + j] != values[j * n + i] {
                    return Err(Error::InvalidInput(format!(
                        "consensus matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Condensed `1 - S`, the dissimilarity used by the final clustering.
    pub fn dissimilarity_condensed(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            out.extend(self.row(i)[i + 1..].iter().map(|s| 1.0 - s));
        }
        out
    }
}

/// `confusion_i = (1/N) * sum_i' S(i, i') * (1 - S(i, i'))`, diagonal
/// included.
pub fn confusion(s: &ConsensusMatrix) -> Vec<f64> {
    (0..s.n)
        .map(|i| s.row(i).iter().map(|&v| v * (1.0 - v)).sum::<f64>() / s.n as f64)
        .collect()
}

/// Early stopping on the stability of a confusion percentile.
///
/// Each call compares the `q`-th percentile of the confusion values with
/// the previous call's value. The streak grows while the change stays
/// below `tolerance` and resets otherwise; stopping is signalled once the
/// streak reaches `patience`. The first comparison is against 0, the
/// percentile of the empty consensus matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StopTracker {
    pub q: f64,
    pub tolerance: f64,
    pub patience: usize,
    prev_percentile: f64,
    run_length: usize,
}

impl Default for StopTracker {
    fn default() -> Self {
        Self::new(90.0, 1e-5, 5)
    }
}

impl StopTracker {
    /// `q` is a percentile in [0, 100].
    pub fn new(q: f64, tolerance: f64, patience: usize) -> Self {
        Self {
            q,
            tolerance,
            patience,
            prev_percentile: 0.0,
            run_length: 0,
        }
    }

    pub fn run_length(&self) -> usize {
        self.run_length
    }

    pub fn previous(&self) -> f64 {
        self.prev_percentile
    }

    /// Percentile of `confusions` used by the tracker.
    pub fn percentile(&self, confusions: &[f64]) -> f64 {
        quantile_type7(confusions, self.q / 100.0).unwrap_or(0.0)
    }

    /// Feeds one percentile value; returns `true` when stopping is due.
    pub fn observe(&mut self, percentile: f64) -> bool {
        let change = (percentile - self.prev_percentile).abs();
        self.prev_percentile = percentile;
        if change < self.tolerance {
            self.run_length = (self.run_length + 1).min(self.patience);
        } else {
            self.run_length = 0;
        }
        self.run_length >= self.patience
    }

    /// Records the percentile without counting it towards the streak.
    pub fn observe_without_counting(&mut self, percentile: f64) {
        self.prev_percentile = percentile;
        self.run_length = 0;
    }

    pub fn should_stop(&mut self, s: &ConsensusMatrix) -> bool {
        let p = self.percentile(&confusion(s));
        self.observe(p)
    }
}

const BINARY_MAGIC: &[u8; 4] = b"MPCS";

/// Binary layout: `"MPCS"`, little-endian u32 N, then N*N little-endian
/// f32 values in row-major order.
pub fn write_binary(out: &mut impl Write, s: &ConsensusMatrix) -> std::io::Result<()> {
    let n = u32::try_from(s.n)
        .map_err(|_| std::io::Error::new(std::io::ErrorKind::InvalidInput, "N exceeds u32"))?;
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&n.to_le_bytes())?;
    let mut buf = Vec::with_capacity(s.values.len() * 4);
    for &v in &s.values {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out.write_all(&buf)
}

/// Reads the binary layout back; values are widened from f32.
pub fn read_binary(input: &mut impl Read) -> Result<ConsensusMatrix> {
    let io = |e| Error::io("<consensus binary>", e);
    let mut header = [0u8; 8];
    input.read_exact(&mut header).map_err(io)?;
    if &header[..4] != BINARY_MAGIC {
        return Err(Error::InvalidInput("missing MPCS magic bytes".into()));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes")) as usize;
    let mut body = vec![0u8; n * n * 4];
    input.read_exact(&mut body).map_err(io)?;
    let values = body
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    ConsensusMatrix::from_dense(n, values)
}

/// Dense CSV with an id header row and id column.
pub fn write_csv(out: &mut impl Write, s: &ConsensusMatrix, ids: &[String]) -> std::io::Result<()> {
    writeln!(out, "id,{}", ids.join(","))?;
    for (i, id) in ids.iter().enumerate().take(s.n) {
        let row: Vec<String> = s.row(i).iter().map(f64::to_string).collect();
        writeln!(out, "{id},{}", row.join(","))?;
    }
    Ok(())
}
