//! Agglomerative clustering with Ward.D linkage and dendrogram cuts.
//!
//! `ward_linkage` applies the Lance-Williams Ward recurrence directly to the
//! input dissimilarities (R's `ward.D`, no squaring). It uses the
//! nearest-neighbour chain algorithm, which needs O(n^2) time and produces
//! the same merges as the greedy "merge the closest pair" procedure because
//! the Ward update is reducible.

use crate::dist::DistanceMatrix;
use crate::error::{Error, Result};
use crate::stats::quantile_sorted;

/// One agglomeration step. Leaves are nodes `0..n`, the cluster created by
/// merge `r` is node `n + r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    merges: Vec<Merge>,
    leaf_count: usize,
}

impl Dendrogram {
    /// Builds a dendrogram from merges between node ids, checking that every
    /// node is used at most once and that sizes add up.
    pub fn from_merges(leaf_count: usize, merges: Vec<Merge>) -> Result<Self> {
        if leaf_count < 1 || merges.len() + 1 != leaf_count {
            return Err(Error::InvalidInput(format!(
                "{} merges cannot form a tree over {leaf_count} leaves",
                merges.len()
            )));
        }
        let mut sizes = vec![1usize; leaf_count];
        let mut used = vec![false; 2 * leaf_count - 1];
        for (r, m) in merges.iter().enumerate() {
            let node = leaf_count + r;
            for child in [m.left, m.right] {
                if child >= node || used[child] {
                    return Err(Error::InvalidInput(format!(
                        "merge {r} reuses or forward-references node {child}"
                    )));
                }
                used[child] = true;
            }
            if m.left == m.right || sizes[m.left] + sizes[m.right] != m.size {
                return Err(Error::InvalidInput(format!("merge {r} has an inconsistent size")));
            }
            sizes.push(m.size);
        }
        Ok(Self { merges, leaf_count })
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    /// A leaf contained in every node, for union-find over leaves.
    fn representatives(&self) -> Vec<usize> {
        let mut rep: Vec<usize> = (0..self.leaf_count).collect();
        for m in &self.merges {
            rep.push(rep[m.left]);
        }
        rep
    }

    /// Labels after performing the merges selected by `keep`.
    fn components(&self, keep: impl Fn(usize, &Merge) -> bool) -> Vec<usize> {
        let rep = self.representatives();
        let mut uf = UnionFind::new(self.leaf_count);
        for (r, m) in self.merges.iter().enumerate() {
            if keep(r, m) {
                uf.union(rep[m.left], rep[m.right]);
            }
        }
        uf.labels()
    }
}

/// Minimal union-find with path halving.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        lo
    }

    /// Component labels numbered by first appearance.
    pub(crate) fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut label_of_root = vec![usize::MAX; n];
        let mut next = 0;
        (0..n)
            .map(|i| {
                let root = self.find(i);
                if label_of_root[root] == usize::MAX {
                    label_of_root[root] = next;
                    next += 1;
                }
                label_of_root[root]
            })
            .collect()
    }
}

/// Lance-Williams update for Ward.D: distance from the union of `i` and
/// `j` to `k`, given the pre-merge distances and cluster sizes.
#[inline]
pub fn ward_update(d_ik: f64, d_jk: f64, d_ij: f64, n_i: usize, n_j: usize, n_k: usize) -> f64 {
    let (ni, nj, nk) = (n_i as f64, n_j as f64, n_k as f64);
    ((ni + nk) * d_ik + (nj + nk) * d_jk - nk * d_ij) / (ni + nj + nk)
}

/// Turns merges between leaf-slot representatives (in any valid order)
/// into a height-sorted dendrogram over node ids.
pub(crate) fn relabel(n: usize, mut slot_merges: Vec<(usize, usize, f64)>) -> Dendrogram {
    // Stable: equal heights keep the order they were produced in.
    slot_merges.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut uf = UnionFind::new(n);
    let mut node_of_root: Vec<usize> = (0..n).collect();
    let mut size_of_root = vec![1usize; n];
    let merges = slot_merges
        .into_iter()
        .enumerate()
        .map(|(r, (a, b, height))| {
            let (ra, rb) = (uf.find(a), uf.find(b));
            let (na, nb) = (node_of_root[ra], node_of_root[rb]);
            let size = size_of_root[ra] + size_of_root[rb];
            let root = uf.union(ra, rb);
            node_of_root[root] = n + r;
            size_of_root[root] = size;
            Merge {
                left: na.min(nb),
                right: na.max(nb),
                height,
                size,
            }
        })
        .collect();
    Dendrogram {
        merges,
        leaf_count: n,
    }
}

pub fn ward_linkage(d: &DistanceMatrix) -> Dendrogram {
    let n = d.n();
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = d.get(i, j);
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    }
    let mut size = vec![1usize; n];
    // Active slots in ascending order. A slot is named by the first leaf
    // that occupied it.
    let mut alive: Vec<usize> = (0..n).collect();
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut slot_merges = Vec::with_capacity(n - 1);

    while slot_merges.len() + 1 < n {
        if chain.is_empty() {
            chain.push(alive[0]);
        }
        loop {
            let a = *chain.last().expect("chain is non-empty");
            let prev = chain.len().checked_sub(2).map(|p| chain[p]);
            // Nearest neighbour of `a`; ties go to the chain predecessor
            // (guarantees termination), then to the lowest slot.
            let row = &dist[a * n..(a + 1) * n];
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            if let Some(p) = prev {
                best = p;
                best_d = row[p];
            }
            for &k in &alive {
                if k != a && row[k] < best_d {
                    best = k;
                    best_d = row[k];
                }
            }
            if Some(best) == prev {
                chain.pop();
                chain.pop();
                let (keep, drop) = (a.min(best), a.max(best));
                for &k in &alive {
                    if k == keep || k == drop {
                        continue;
                    }
                    let updated = ward_update(
                        dist[keep * n + k],
                        dist[drop * n + k],
                        best_d,
                        size[keep],
                        size[drop],
                        size[k],
                    );
                    dist[keep * n + k] = updated;
                    dist[k * n + keep] = updated;
                }
                size[keep] += size[drop];
                alive.retain(|&s| s != drop);
                slot_merges.push((keep, drop, best_d));
                break;
            }
            chain.push(best);
        }
    }
    debug_assert_eq!(alive.len(), 1);
    relabel(n, slot_merges)
}

/// Cuts at the type-7 `h`-quantile of the merge heights: exactly the merges
/// with height <= threshold are performed. Works for non-monotone heights.
pub fn cut_quantile(t: &Dendrogram, h: f64) -> Result<Vec<usize>> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidParameter(format!("quantile h must be in (0, 1], got {h}")));
    }
    if t.merges.is_empty() {
        return Ok(vec![0; t.leaf_count]);
    }
    let mut heights = t.heights();
    heights.sort_by(f64::total_cmp);
    let threshold = quantile_sorted(&heights, h);
    Ok(t.components(|_, m| m.height <= threshold))
}

/// Performs the first `n - k` merges in merge order, giving exactly `k`
/// clusters.
pub fn cut_k(t: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let n = t.leaf_count;
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("k must be in 1..={n}, got {k}")));
    }
    Ok(t.components(|r, _| r < n - k))
}

pub fn n_clusters(labels: &[usize]) -> usize {
    labels.iter().copied().max().map_or(0, |m| m + 1)
}
